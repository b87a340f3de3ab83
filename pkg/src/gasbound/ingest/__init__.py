from gasbound.ingest.layout import (
    MalformedLayout, StorageField, StorageLayout, parse_storage_layout, resolve_slot,
)
from gasbound.ingest.selector import BadSelector, Selector, resolve_selector
from gasbound.ingest.srcmap import MalformedSrcmap, SourceMap, parse_source_map

__all__ = [
    "MalformedLayout", "StorageField", "StorageLayout", "parse_storage_layout", "resolve_slot",
    "BadSelector", "Selector", "resolve_selector",
    "MalformedSrcmap", "SourceMap", "parse_source_map",
]
