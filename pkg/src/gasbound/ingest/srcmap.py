"""Compressed source maps (``s:l:f:j:m`` entries, one per instruction)."""

import bisect
from dataclasses import dataclass, field


class MalformedSrcmap(ValueError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"srcmap entry {index}: {reason}")
        self.index = index


@dataclass(frozen=True)
class SourceMap:
    pc_to_line: dict = field(default_factory=dict)  # pc -> (line, file index)

    def __bool__(self):
        return bool(self.pc_to_line)

    def line(self, pc: int):
        """1-based line of file 0 for ``pc``, or None when unmapped."""
        entry = self.pc_to_line.get(pc)
        if entry is None or entry[1] != 0:
            return None
        return entry[0]

    @property
    def lines(self) -> set:
        return {self.line(pc) for pc in self.pc_to_line} - {None}


def decode_entries(text: str) -> list:
    """Expand inheritance; returns a list of ``(s, l, f)`` per entry."""
    out = []
    prev = [0, 0, 0, "-", 0]
    for i, raw in enumerate(text.strip().split(";")):
        parts = raw.split(":")
        if len(parts) > 5:
            raise MalformedSrcmap(i, f"too many fields in {raw!r}")
        cur = list(prev)
        for k, part in enumerate(parts):
            if part == "":
                continue
            if k == 3:
                if part not in ("i", "o", "-"):
                    raise MalformedSrcmap(i, f"bad jump marker {part!r}")
                cur[k] = part
                continue
            try:
                cur[k] = int(part)
            except ValueError:
                raise MalformedSrcmap(i, f"non-integer field {part!r}") from None
        if i == 0 and len(parts) < 3 and raw:
            raise MalformedSrcmap(i, "first entry must give s:l:f")
        out.append((cur[0], cur[1], cur[2]))
        prev = cur
    return out


def parse_source_map(text: str, instructions, source: str) -> SourceMap:
    """Map each instruction's pc to a 1-based source line.

    Entries with a negative offset or a file index other than 0 stay
    unmapped. The number of entries must equal the number of instructions.
    """
    if not text.strip():
        return SourceMap()
    entries = decode_entries(text)
    if len(entries) != len(instructions):
        raise MalformedSrcmap(min(len(entries), len(instructions)),
                              f"{len(entries)} entries for {len(instructions)} instructions")
    newlines = [i for i, ch in enumerate(source) if ch == "\n"]
    mapping = {}
    for i, (ins, (s, _l, f)) in enumerate(zip(instructions, entries)):
        if s < 0 or f < 0:
            continue
        if f == 0 and s > len(source):
            raise MalformedSrcmap(i, f"offset {s} beyond source end")
        mapping[ins.pc] = (bisect.bisect_left(newlines, s) + 1, f)
    return SourceMap(mapping)
