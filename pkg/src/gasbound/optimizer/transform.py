"""Source-level storage caching for one function.

The function gets a local with the field's own name, initialised from a
getter, so its body keeps referring to the same identifier but now hits a
stack slot. Unless the field is only read, a setter call writes the local
back before every ``return`` and at the end of the body. Getter and setter
are appended after the function; inside them the identifier still resolves
to the state variable.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


class FunctionNotFound(LookupError):
    pass


class UnsupportedSyntax(ValueError):
    pass


@dataclass(frozen=True)
class TransformResult:
    new_source: str
    getter_name: str
    setter_name: Optional[str]
    savings_worst: Fraction = Fraction(0)
    savings_best: Fraction = Fraction(0)


def code_mask(text: str) -> list:
    """True for characters outside comments and string literals."""
    mask = [True] * len(text)
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            j = n if j < 0 else j + 2
        elif ch in "\"'":
            j = i + 1
            while j < n and text[j] != ch:
                j += 2 if text[j] == "\\" else 1
            j = min(j + 1, n)
        else:
            i += 1
            continue
        for k in range(i, j):
            mask[k] = False
        i = j
    return mask


def _match(text, mask, open_at: int) -> int:
    """Index of the bracket closing the one at ``open_at``."""
    pairs = {"{": "}", "(": ")", "[": "]"}
    close = pairs[text[open_at]]
    depth = 0
    for i in range(open_at, len(text)):
        if not mask[i]:
            continue
        if text[i] == text[open_at]:
            depth += 1
        elif text[i] == close:
            depth -= 1
            if depth == 0:
                return i
    raise UnsupportedSyntax(f"unbalanced {text[open_at]!r} at offset {open_at}")


def _tokens(text, mask, word, start, end) -> list:
    out = []
    for m in re.finditer(rf"\b{re.escape(word)}\b", text[start:end]):
        i = start + m.start()
        if mask[i]:
            out.append(i)
    return out


_TYPE = re.compile(r"^(u?int\d*|address|bool|bytes\d*|string|byte|var|fixed\w*|ufixed\w*|[A-Z]\w*)(\[\d*\])*$")
_DECL_TAIL = re.compile(r"([A-Za-z_][\w\[\]]*)(?:\s+(?:memory|storage|calldata|payable))*\s+$")


@dataclass(frozen=True)
class FunctionSpan:
    name: str
    start: int  # offset of "function"
    params: tuple  # (open, close) of the parameter list
    body_open: int
    body_close: int


def find_function(source: str, name: str, mask=None) -> FunctionSpan:
    mask = mask if mask is not None else code_mask(source)
    for m in re.finditer(rf"\bfunction\s+{re.escape(name)}\s*\(", source):
        if not mask[m.start()]:
            continue
        p_open = m.end() - 1
        p_close = _match(source, mask, p_open)
        i = p_close + 1
        while i < len(source) and (source[i] != "{" or not mask[i]):
            if source[i] == ";" and mask[i]:
                break
            if source[i] == "(" and mask[i]:
                i = _match(source, mask, i)
            i += 1
        if i >= len(source) or source[i] != "{":
            continue  # declaration without a body
        return FunctionSpan(name, m.start(), (p_open, p_close), i, _match(source, mask, i))
    raise FunctionNotFound(name)


def _declares(source, mask, field, start, end) -> bool:
    """Whether ``field`` is declared as a parameter or local in ``[start, end)``."""
    for i in _tokens(source, mask, field, start, end):
        m = _DECL_TAIL.search(source, start, i)
        if m and _TYPE.match(m.group(1)):
            return True
    return False


def field_type(source: str, field: str, default: str = "uint256") -> str:
    """Declared type of a state variable, read off its declaration line."""
    pat = re.compile(
        rf"^\s*([A-Za-z_][\w\[\]]*)\s+(?:(?:public|private|internal|constant)\s+)*{re.escape(field)}\s*(=[^;]*)?;",
        re.M)
    m = pat.search(source)
    return m.group(1) if m else default


def _line_indent(source: str, pos: int) -> str:
    line_start = source.rfind("\n", 0, pos) + 1
    return re.match(r"[ \t]*", source[line_start:]).group(0)


def _body_indent(source: str, span: FunctionSpan) -> str:
    for line in source[span.body_open + 1:span.body_close].splitlines():
        if line.strip():
            return re.match(r"[ \t]*", line).group(0)
    return _line_indent(source, span.start) + "    "


def _statement_end(source, mask, start) -> int:
    i = start
    while i < len(source):
        if mask[i]:
            if source[i] in "([{":
                i = _match(source, mask, i)
            elif source[i] == ";":
                return i
            elif source[i] == "}":
                break
        i += 1
    raise UnsupportedSyntax(f"unterminated statement at offset {start}")


def transform(source: str, function: str, field: str, read_only: bool = False,
              type_name: Optional[str] = None) -> TransformResult:
    """Cache ``field`` in a local inside ``function``; returns the rewritten source."""
    mask = code_mask(source)
    span = find_function(source, function, mask)
    body = (span.body_open + 1, span.body_close)
    if _tokens(source, mask, "assembly", *body):
        raise UnsupportedSyntax(f"{function} contains inline assembly")
    if _declares(source, mask, field, span.params[0], span.body_close):
        raise UnsupportedSyntax(f"{field} is already a parameter or local of {function}")
    type_name = type_name or field_type(source, field)
    getter = f"get_field_{field}"
    setter = None if read_only else f"set_field_{field}"
    indent = _body_indent(source, span)
    fn_indent = _line_indent(source, span.start)

    edits = []  # (offset, text), applied back to front
    edits.append((span.body_open + 1, f"\n{indent}{type_name} {field} = {getter}();"))
    if setter:
        call = f"{setter}({field});"
        for r in _tokens(source, mask, "return", *body):
            end = _statement_end(source, mask, r)
            edits.append((r, "{ " + call + " "))
            edits.append((end + 1, " }"))
        close_line = source.rfind("\n", 0, span.body_close) + 1
        if source[close_line:span.body_close].strip():
            edits.append((span.body_close, f" {call} "))
        else:
            edits.append((close_line, f"{indent}{call}\n"))

    helpers = (f"\n\n{fn_indent}function {getter}() internal view returns ({type_name}) {{\n"
               f"{fn_indent}    return {field};\n{fn_indent}}}")
    if setter:
        helpers += (f"\n\n{fn_indent}function {setter}({type_name} value) internal {{\n"
                    f"{fn_indent}    {field} = value;\n{fn_indent}}}")
    edits.append((span.body_close + 1, helpers))

    out = source
    for pos, text in sorted(edits, key=lambda e: e[0], reverse=True):
        out = out[:pos] + text + out[pos:]
    return TransformResult(out, getter, setter)


def opt_path(path: str) -> str:
    """``contract.sol`` -> ``contract_opt.sol``."""
    return re.sub(r"(\.sol)?$", "_opt.sol", path, count=1)
