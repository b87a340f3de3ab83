"""Split a contract CFG into public functions by matching the selector dispatcher."""

import logging
from dataclasses import dataclass, field
from typing import Optional

from gasbound.cfg.build import Cfg

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FunctionUnit:
    selector: Optional[int]
    entry: tuple
    reachable_blocks: frozenset
    dispatch_path: tuple = ()
    signature: Optional[str] = None
    kind: str = "function"  # "function" | "fallback" | "anonymous"

    @property
    def name(self) -> str:
        if self.signature:
            return self.signature
        if self.selector is not None:
            return f"0x{self.selector:08x}"
        return self.kind

    @property
    def selector_hex(self) -> Optional[str]:
        return None if self.selector is None else f"0x{self.selector:08x}"


def _match_selector(block) -> Optional[int]:
    """``PUSH4 sel (DUP|SWAP)* EQ PUSH tag JUMPI`` at the end of a block."""
    ins = block.instructions
    if len(ins) < 4 or ins[-1].mnemonic != "JUMPI" or not ins[-2].opcode.is_push:
        return None
    if ins[-3].mnemonic != "EQ":
        return None
    i = len(ins) - 4
    while i >= 0 and i >= len(ins) - 7:
        name = ins[i].mnemonic
        if name == "PUSH4":
            return ins[i].immediate
        if not name.startswith(("DUP", "SWAP")):
            return None
        i -= 1
    return None


def _reads_selector_word(block) -> bool:
    return any(
        ins.mnemonic == "CALLDATALOAD" and args and args[0].is_const and args[0].value == 0
        for ins, args in zip(block.instructions, block.operands)
    )


def _closure(cfg: Cfg, entry, exclude) -> frozenset:
    seen = {entry}
    stack = [entry]
    while stack:
        for s in cfg.blocks[stack.pop()].successors:
            if s not in seen and s not in exclude:
                seen.add(s)
                stack.append(s)
    return frozenset(seen)


def _edge(block, kind):
    for s in block.successors:
        if block.edge_kinds[s] == kind:
            return s
    return None


def anonymous_unit(cfg: Cfg) -> FunctionUnit:
    if cfg.entry is None:
        return FunctionUnit(None, None, frozenset(), kind="anonymous")
    return FunctionUnit(None, cfg.entry, frozenset(cfg.blocks), kind="anonymous")


def dispatcher_chain(cfg: Cfg):
    """Blocks along the dispatcher's fall-through chain and the selector matches.

    Returns ``(chain, matches)`` where ``matches`` lists
    ``(chain index, selector, target node)``.
    """
    chain, matches = [], []
    node = cfg.entry
    while node is not None and node not in chain:
        blk = cfg.blocks[node]
        chain.append(node)
        if blk.terminator.mnemonic != "JUMPI":
            break
        sel = _match_selector(blk)
        target = _edge(blk, "true")
        if sel is not None and target is not None:
            matches.append((len(chain) - 1, sel, target))
        node = _edge(blk, "false")
    return chain, matches


def split_functions(cfg: Cfg, signatures: Optional[dict] = None) -> list:
    """One ``FunctionUnit`` per dispatched selector, plus a fallback unit.

    Without a recognizable dispatcher the whole CFG is returned as a single
    anonymous unit.
    """
    signatures = signatures or {}
    if cfg.entry is None:
        return []
    chain, matches = dispatcher_chain(cfg)
    if not matches or not any(_reads_selector_word(cfg.blocks[n]) for n in chain[: matches[-1][0] + 1]):
        log.info("no selector dispatcher found; analysing the code as one unit")
        return [anonymous_unit(cfg)]

    last = matches[-1][0]
    dispatcher = frozenset(chain[: last + 1])
    units = []
    for idx, sel, target in matches:
        units.append(FunctionUnit(
            selector=sel,
            entry=target,
            reachable_blocks=_closure(cfg, target, dispatcher),
            dispatch_path=tuple(chain[: idx + 1]),
            signature=signatures.get(sel),
        ))
    tail = _edge(cfg.blocks[chain[last]], "false")
    if tail is not None and tail not in dispatcher:
        units.append(FunctionUnit(None, tail, _closure(cfg, tail, dispatcher),
                                  dispatch_path=tuple(chain[: last + 1]), kind="fallback"))
    return units


def dispatcher_blocks(cfg: Cfg) -> frozenset:
    chain, matches = dispatcher_chain(cfg)
    return frozenset(chain[: matches[-1][0] + 1]) if matches else frozenset()


def transitive_blocks(unit: FunctionUnit, units: list) -> frozenset:
    """Blocks of ``unit`` whose code also belongs to another public function.

    Compared by block start pc, since shared code is cloned per call context.
    """
    other_pcs = set()
    for u in units:
        if u is not unit and u.kind == "function":
            other_pcs |= {b[0] for b in u.reachable_blocks}
    return frozenset(b for b in unit.reachable_blocks if b[0] in other_pcs and b != unit.entry)
