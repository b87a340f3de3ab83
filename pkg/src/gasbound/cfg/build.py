"""Control-flow reconstruction by abstract stack simulation.

Block states are keyed by ``(block start, return-address signature)``: the
positions of stack entries that hold JUMPDEST constants. Blocks reached with
different pending return addresses (shared internal subroutines) are cloned,
so their return jumps resolve precisely; inside one context, stacks are
joined element-wise (``Const(a) | Const(b) = Unknown`` for ``a != b``).
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from gasbound.cfg.absval import UNKNOWN_VALUE, AbstractValue, transfer
from gasbound.cfg.dominators import immediate_dominators
from gasbound.evm.disasm import Instruction
from gasbound.evm.opcodes import HALTING

log = logging.getLogger(__name__)

MAX_STACK = 1024
MAX_CONTEXTS = 32
MERGED = "merged"

NodeId = tuple  # (start pc, context index)


class InvalidJumpTarget(ValueError):
    def __init__(self, pc: int, target: int):
        super().__init__(f"jump at pc {pc:#x} targets {target:#x}, which is not a JUMPDEST")
        self.pc = pc
        self.target = target


@dataclass
class BasicBlock:
    id: NodeId
    instructions: tuple
    successors: list = field(default_factory=list)
    entry_stack_height: int = 0
    edge_kinds: dict = field(default_factory=dict)
    entry_stack: tuple = ()
    operands: list = field(default_factory=list)
    unresolved: bool = False

    @property
    def start(self) -> int:
        return self.instructions[0].pc

    @property
    def end(self) -> int:
        return self.instructions[-1].pc

    @property
    def terminator(self) -> Instruction:
        return self.instructions[-1]

    def __repr__(self):
        return f"BasicBlock({self.start:#x}#{self.id[1]} -> {[hex(s[0]) for s in self.successors]})"


@dataclass
class Cfg:
    blocks: dict
    entry: Optional[NodeId]
    dominator_tree: dict
    instructions: list
    jumpdests: frozenset
    unresolved: dict = field(default_factory=dict)  # node id -> jump pc

    def predecessors(self) -> dict:
        preds = {b: [] for b in self.blocks}
        for b, blk in self.blocks.items():
            for s in blk.successors:
                preds[s].append(b)
        return preds

    def nodes_at(self, pc: int) -> list:
        return [b for b in self.blocks if b[0] == pc]

    def pc_edges(self) -> set:
        """Edges projected onto block start pcs."""
        return {(b[0], s[0]) for b, blk in self.blocks.items() for s in blk.successors}

    def dominates(self, a: NodeId, b: NodeId) -> bool:
        while b is not None:
            if a == b:
                return True
            b = self.dominator_tree.get(b)
        return False


def split_blocks(instructions) -> dict:
    """Raw basic blocks keyed by start pc, in program order."""
    blocks = {}
    current = []
    for ins in instructions:
        if ins.mnemonic == "JUMPDEST" and current:
            blocks[current[0].pc] = current
            current = []
        current.append(ins)
        if ins.mnemonic in ("JUMP", "JUMPI") or ins.mnemonic in HALTING:
            blocks[current[0].pc] = current
            current = []
    if current:
        blocks[current[0].pc] = current
    return blocks


def _signature(stack, jumpdests) -> tuple:
    return tuple(v.value if v.is_const and v.value in jumpdests else None for v in stack)


def _join(a: tuple, b: tuple) -> tuple:
    n = min(len(a), len(b))
    a, b = a[len(a) - n:], b[len(b) - n:]
    return tuple(x.join(y) for x, y in zip(a, b))


def simulate(block, entry: tuple, record: Optional[list] = None) -> list:
    """Run a block over abstract values; returns the exit stack (top last).

    Values below the known entry stack read as Unknown. When ``record`` is a
    list, the popped operands (top first) of every instruction are appended.
    """
    stack = list(entry)

    def pop():
        return stack.pop() if stack else UNKNOWN_VALUE

    for ins in block:
        name = ins.mnemonic
        op = ins.opcode
        if op.is_push:
            args = ()
            stack.append(AbstractValue.const(ins.immediate))
        elif name == "PUSH0":
            args = ()
            stack.append(AbstractValue.const(0))
        elif name.startswith("DUP"):
            n = op.stack_pops
            args = tuple(stack[-n:][::-1]) if len(stack) >= n else ()
            stack.append(stack[-n] if len(stack) >= n else UNKNOWN_VALUE)
        elif name.startswith("SWAP"):
            n = op.stack_pops
            if len(stack) < n:
                stack[:0] = [UNKNOWN_VALUE] * (n - len(stack))
            args = tuple(stack[-n:][::-1])
            stack[-1], stack[-n] = stack[-n], stack[-1]
        else:
            args = tuple(pop() for _ in range(op.stack_pops))
            if op.stack_pushes:
                stack.append(transfer(name, list(args), ins.pc))
        if record is not None:
            record.append(args)
    return stack


def build_cfg(instructions: list, strict: bool = True) -> Cfg:
    """Resolve jumps to a fixpoint and return the reachable CFG.

    With ``strict`` a constant jump to a non-JUMPDEST raises
    ``InvalidJumpTarget``; otherwise such a jump is treated as a throw.
    Jumps whose target stays Unknown are recorded in ``Cfg.unresolved``.
    """
    raw = split_blocks(instructions)
    jumpdests = frozenset(ins.pc for ins in instructions if ins.mnemonic == "JUMPDEST")
    order = list(raw)
    fallthrough = {s: (order[i + 1] if i + 1 < len(order) else None) for i, s in enumerate(order)}
    if not raw:
        return Cfg({}, None, {}, list(instructions), jumpdests)

    contexts = {}  # start -> {sig: index}
    states = {}  # (start, index) -> entry stack tuple
    queue = deque()

    def enter(start: int, stack: tuple) -> NodeId:
        ctxs = contexts.setdefault(start, {})
        sig = _signature(stack, jumpdests)
        if sig not in ctxs:
            if len(ctxs) >= MAX_CONTEXTS:
                sig = MERGED
            if sig not in ctxs:
                ctxs[sig] = len(ctxs)
        node = (start, ctxs[sig])
        old = states.get(node)
        new = stack if old is None else _join(old, stack)
        if new != old:
            states[node] = new
            queue.append(node)
        return node

    def successors(node, stack_exit, operands):
        """(successor start, kind) pairs plus the unresolved flag."""
        block = raw[node[0]]
        last = block[-1]
        name = last.mnemonic
        if name in HALTING or len(stack_exit) > MAX_STACK:
            return [], False
        if name not in ("JUMP", "JUMPI"):
            nxt = fallthrough[node[0]]
            return ([(nxt, "seq")] if nxt is not None else []), False
        target = operands[-1][0]
        out = []
        if name == "JUMPI":
            cond = operands[-1][1]
            if cond.is_const and cond.value == 0:
                target = None
            nxt = fallthrough[node[0]]
            if nxt is not None and not (cond.is_const and cond.value != 0):
                out.append((nxt, "false"))
        if target is None:
            return out, False
        if not target.is_const:
            return out, True
        if target.value not in jumpdests:
            if strict:
                raise InvalidJumpTarget(last.pc, target.value)
            return out, False
        kind = "true" if name == "JUMPI" else "seq"
        return [(target.value, kind)] + out, False

    entry = enter(order[0], ())
    while queue:
        node = queue.popleft()
        operands = []
        exit_stack = simulate(raw[node[0]], states[node], operands)
        succ, _ = successors(node, exit_stack, operands)
        for start, _kind in succ:
            enter(start, tuple(exit_stack))

    blocks = {}
    unresolved = {}
    for node, entry_stack in states.items():
        operands = []
        exit_stack = simulate(raw[node[0]], entry_stack, operands)
        succ, unres = successors(node, exit_stack, operands)
        blk = BasicBlock(node, tuple(raw[node[0]]), entry_stack_height=len(entry_stack),
                         entry_stack=entry_stack, operands=operands, unresolved=unres)
        sig = _signature(exit_stack, jumpdests)
        for start, kind in succ:
            ctxs = contexts[start]
            target = (start, ctxs[sig] if sig in ctxs else ctxs[MERGED])
            if target not in blk.edge_kinds:
                blk.successors.append(target)
                blk.edge_kinds[target] = kind
        if unres:
            unresolved[node] = blk.terminator.pc
            log.warning("unresolved jump at pc %#x", blk.terminator.pc)
        blocks[node] = blk

    succ_map = {b: blk.successors for b, blk in blocks.items()}
    idom = immediate_dominators(succ_map, entry)
    return Cfg(blocks, entry, idom, list(instructions), jumpdests, unresolved)
