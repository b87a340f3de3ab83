import functools

from hypothesis import settings

from gasbound import corpus
from gasbound.pipeline import load_fixture

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def program(name: str, with_srcmap: bool = True):
    return load_fixture(corpus.get(name), with_srcmap)
