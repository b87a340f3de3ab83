import dataclasses
from fractions import Fraction

import pytest

from gasbound import corpus
from gasbound.bounds.costmodel import CostModelConfig
from gasbound.soundness import CONFIGS, check_fixture, run_matrix


def test_every_scope_and_resource_is_covered():
    scopes = {c.scope for c in CONFIGS}
    assert scopes == {"all", "gas-family", "storage", "storage-optimization", "line", "selected"}
    assert CostModelConfig("instructions", "storage-optimization") in CONFIGS


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_no_violations(name):
    r = check_fixture(corpus.get(name))
    assert r.runs > 0 and r.checks > 0
    assert not r.violations, "\n".join(map(str, r.violations[:5]))


def test_matrix_catches_a_bound_that_is_too_small(monkeypatch):
    # halve every bound and the cross-check must notice
    from gasbound import pipeline

    real = pipeline.Program.analyze

    def halved(self, unit, config, schedule=None):
        rep = real(self, unit, config, schedule)
        entries = {k: b.scale(Fraction(1, 2)) for k, b in rep.entries.items()}
        return dataclasses.replace(rep, entries=entries)

    monkeypatch.setattr(pipeline.Program, "analyze", halved)
    r = run_matrix([corpus.get("straight_line"), corpus.get("array_loop")])
    assert r.violations
