"""A tiny label-aware assembler used to hand-compile fixtures.

Syntax, one item per line (``;`` starts a comment)::

    name:            JUMPDEST labelled ``name``
    PUSH2 @name      push a label address (PUSHn chosen by the writer)
    PUSH @name       same, always PUSH2
    PUSH 0x20        shortest PUSH that fits the value
    .line 17         following instructions map to source line 17
    .line -          following instructions carry no source line
"""

from dataclasses import dataclass, field
from typing import Optional

from gasbound.evm.opcodes import BY_NAME


class AsmError(ValueError):
    pass


@dataclass
class Assembled:
    code: bytes
    labels: dict[str, int]
    pcs: list[int] = field(default_factory=list)
    lines: list[Optional[int]] = field(default_factory=list)

    def srcmap(self, source: str) -> str:
        """Compressed srcmap whose entries point at whole source lines."""
        starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                starts.append(i + 1)
        entries = []
        for line in self.lines:
            if line is None:
                entries.append((-1, 0, -1))
                continue
            if not 1 <= line <= len(starts):
                raise AsmError(f"line {line} outside source")
            begin = starts[line - 1]
            end = starts[line] - 1 if line < len(starts) else len(source)
            entries.append((begin, end - begin, 0))
        return compress_srcmap(entries)


def compress_srcmap(entries) -> str:
    out = []
    prev = None
    for entry in entries:
        if prev is None:
            out.append(":".join(str(x) for x in entry))
        else:
            fields = [str(x) if x != p else "" for x, p in zip(entry, prev)]
            while fields and fields[-1] == "":
                fields.pop()
            out.append(":".join(fields))
        prev = entry
    return ";".join(out)


def _parse_int(tok: str) -> int:
    return int(tok, 0)


def assemble(text: str) -> Assembled:
    items = []  # (mnemonic, operand, line)
    line: Optional[int] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.split(";", 1)[0].strip()
        if not stripped:
            continue
        for part in stripped.split("|"):
            part = part.strip()
            if not part:
                continue
            if part.startswith(".line"):
                arg = part.split()[1]
                line = None if arg == "-" else int(arg)
                continue
            if part.endswith(":"):
                items.append(("LABEL", part[:-1], line))
                continue
            toks = part.split()
            mnem = toks[0].upper()
            operand = toks[1] if len(toks) > 1 else None
            if len(toks) > 2:
                raise AsmError(f"line {lineno}: too many operands in {part!r}")
            items.append((mnem, operand, line))

    def width(mnem, operand):
        if mnem == "LABEL":
            return 1
        if mnem == "PUSH":
            if operand.startswith("@"):
                return 3
            v = _parse_int(operand)
            return 1 + max(1, (v.bit_length() + 7) // 8)
        return 1 + BY_NAME[mnem].immediate_len

    labels = {}
    pc = 0
    for mnem, operand, _ in items:
        if mnem == "LABEL":
            if operand in labels:
                raise AsmError(f"duplicate label {operand}")
            labels[operand] = pc
        elif mnem != "PUSH" and mnem not in BY_NAME:
            raise AsmError(f"unknown mnemonic {mnem}")
        pc += width(mnem, operand)

    code = bytearray()
    out = Assembled(b"", labels)
    for mnem, operand, src_line in items:
        out.pcs.append(len(code))
        out.lines.append(src_line)
        if mnem == "LABEL":
            code.append(BY_NAME["JUMPDEST"].code)
            continue
        if operand is not None and operand.startswith("@"):
            if operand[1:] not in labels:
                raise AsmError(f"undefined label {operand}")
            value = labels[operand[1:]]
        elif operand is not None:
            value = _parse_int(operand)
        else:
            value = None
        if mnem == "PUSH":
            mnem = f"PUSH{width(mnem, operand) - 1}"
        op = BY_NAME[mnem]
        code.append(op.code)
        if op.immediate_len:
            if value is None:
                raise AsmError(f"{mnem} needs an operand")
            if value.bit_length() > 8 * op.immediate_len:
                raise AsmError(f"{value:#x} does not fit {mnem}")
            code += value.to_bytes(op.immediate_len, "big")
        elif value is not None:
            raise AsmError(f"{mnem} takes no operand")
    out.code = bytes(code)
    return out
