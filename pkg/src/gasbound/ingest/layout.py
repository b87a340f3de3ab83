"""Storage layout sidecar: which slot holds which state variable.

Schema::

    {"fields": [{"name": "totalSupply", "slot": 3, "kind": "scalar",
                 "type": "uint256"}, ...]}

``kind`` is one of scalar, mapping, dyn_array, other; ``type`` is optional.
``from_solc_layout`` converts the compiler's ``storageLayout`` output.
"""

import json
from dataclasses import dataclass
from typing import Optional

UNKNOWN_FIELD = "unknown"

KINDS = {"scalar": "BasicScalar", "mapping": "Mapping", "dyn_array": "DynamicArray", "other": "Other"}


class MalformedLayout(ValueError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"storage layout entry {index}: {reason}")
        self.index = index


@dataclass(frozen=True)
class StorageField:
    slot: int
    name: str
    kind: str  # BasicScalar | Mapping | DynamicArray | Other
    type: Optional[str] = None


@dataclass(frozen=True)
class StorageLayout:
    entries: tuple = ()

    @property
    def scalars(self) -> dict:
        return {f.slot: f for f in self.entries if f.kind == "BasicScalar"}

    def field(self, name: str) -> Optional[StorageField]:
        for f in self.entries:
            if f.name == name:
                return f
        return None

    def field_at(self, slot: int) -> str:
        f = self.scalars.get(slot)
        return f.name if f else UNKNOWN_FIELD

    def to_json(self) -> str:
        inverse = {v: k for k, v in KINDS.items()}
        fields = []
        for f in self.entries:
            d = {"name": f.name, "slot": f.slot, "kind": inverse[f.kind]}
            if f.type:
                d["type"] = f.type
            fields.append(d)
        return json.dumps({"fields": fields}, indent=2)


def parse_storage_layout(text: str) -> StorageLayout:
    data = json.loads(text)
    if not isinstance(data, dict) or not isinstance(data.get("fields"), list):
        raise MalformedLayout(-1, 'expected an object with a "fields" list')
    entries = []
    slots, names = set(), set()
    for i, item in enumerate(data["fields"]):
        try:
            name, slot, kind = item["name"], item["slot"], item["kind"]
        except (KeyError, TypeError):
            raise MalformedLayout(i, "needs name, slot and kind") from None
        if not isinstance(name, str) or not name:
            raise MalformedLayout(i, "name must be a non-empty string")
        if isinstance(slot, bool) or not isinstance(slot, int) or slot < 0:
            raise MalformedLayout(i, "slot must be a non-negative integer")
        if kind not in KINDS:
            raise MalformedLayout(i, f"unknown kind {kind!r}")
        if name in names:
            raise MalformedLayout(i, f"duplicate name {name!r}")
        if kind == "scalar":
            if slot in slots:
                raise MalformedLayout(i, f"slot {slot} already holds a scalar")
            slots.add(slot)
        names.add(name)
        entries.append(StorageField(slot, name, KINDS[kind], item.get("type")))
    return StorageLayout(tuple(entries))


def from_solc_layout(layout: dict) -> StorageLayout:
    """Convert a solc ``storageLayout`` object.

    Packed variables (non-zero offset, or sharing a slot) are not tracked
    individually and map to kind ``other``.
    """
    types = layout.get("types") or {}
    by_slot = {}
    for var in layout.get("storage", []):
        by_slot.setdefault(int(var["slot"]), []).append(var)
    entries = []
    for var in layout.get("storage", []):
        slot = int(var["slot"])
        t = types.get(var["type"], {})
        encoding = t.get("encoding", "inplace")
        label = t.get("label", var["type"])
        if encoding == "mapping":
            kind = "Mapping"
        elif encoding == "dynamic_array":
            kind = "DynamicArray"
        elif (encoding == "inplace" and var.get("offset", 0) == 0 and len(by_slot[slot]) == 1
              and "members" not in t and "[" not in label):
            kind = "BasicScalar"
        else:
            kind = "Other"
        entries.append(StorageField(slot, var["label"], kind, label))
    return StorageLayout(tuple(entries))


def resolve_slot(operand, layout: Optional[StorageLayout]) -> str:
    """Field name for an SLOAD/SSTORE slot operand, or ``"unknown"``."""
    if layout is None or not operand.is_const:
        return UNKNOWN_FIELD
    return layout.field_at(operand.value)
