"""Natural loops and counter-loop exit conditions.

Exit conditions are recovered by re-running the loop body symbolically with
the header's entry stack replaced by slot symbols, which exposes the
induction slot, its per-iteration step and the loop-invariant limit.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from gasbound.cfg.absval import UNKNOWN_VALUE, AbstractValue, transfer
from gasbound.cfg.build import Cfg, simulate

_CMP = ("LT", "GT", "SLT", "SGT", "EQ")
_FLIP = {"LT": "GT", "GT": "LT", "LE": "GE", "GE": "LE", "NE": "NE"}


@dataclass(frozen=True)
class Slot:
    """Header-entry stack slot ``index`` (from the bottom) plus ``delta``."""

    index: int
    delta: int = 0


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    inner: object


Sym = Union[Slot, Cmp, Not, AbstractValue]


@dataclass(frozen=True)
class ExitCondition:
    """Loop continues while ``slot[induction_slot] <op> limit``."""

    op: str  # LT | LE | GT | GE | NE
    induction_slot: int
    init: AbstractValue
    limit: AbstractValue
    step: Optional[int]


@dataclass
class LoopInfo:
    header: tuple
    body: frozenset
    back_edges: tuple
    exit_conditions: list = field(default_factory=list)
    irreducible: bool = False

    @property
    def latches(self) -> set:
        return {u for u, _ in self.back_edges}


def _sym_transfer(name: str, args: list, pc: int) -> Sym:
    if all(isinstance(a, AbstractValue) for a in args):
        return transfer(name, args, pc)
    if name in ("ADD", "SUB"):
        a, b = args
        if name == "ADD" and isinstance(b, Slot):
            a, b = b, a
        if isinstance(a, Slot) and isinstance(b, AbstractValue) and b.is_const and b.value < 1 << 64:
            return Slot(a.index, a.delta + (b.value if name == "ADD" else -b.value))
        return UNKNOWN_VALUE
    if name in _CMP:
        return Cmp(name, args[0], args[1])
    if name == "ISZERO":
        (a,) = args
        if isinstance(a, Not) and isinstance(a.inner, Cmp):
            return a.inner
        return Not(a)
    return UNKNOWN_VALUE


def _sym_simulate(block, entry: list):
    """Symbolic run of one block; returns (exit stack, JUMPI operands or None)."""
    stack = list(entry)

    def pop():
        return stack.pop() if stack else UNKNOWN_VALUE

    jumpi = None
    for ins in block.instructions:
        name = ins.mnemonic
        op = ins.opcode
        if op.is_push:
            stack.append(AbstractValue.const(ins.immediate))
        elif name == "PUSH0":
            stack.append(AbstractValue.const(0))
        elif name.startswith("DUP"):
            n = op.stack_pops
            stack.append(stack[-n] if len(stack) >= n else UNKNOWN_VALUE)
        elif name.startswith("SWAP"):
            n = op.stack_pops
            if len(stack) < n:
                stack[:0] = [UNKNOWN_VALUE] * (n - len(stack))
            stack[-1], stack[-n] = stack[-n], stack[-1]
        else:
            args = [pop() for _ in range(op.stack_pops)]
            if name == "JUMPI":
                jumpi = args
            if op.stack_pushes:
                stack.append(_sym_transfer(name, args, ins.pc))
    return stack, jumpi


def _join_stacks(a: list, b: list) -> list:
    n = min(len(a), len(b))
    a, b = a[len(a) - n:], b[len(b) - n:]
    return [x if x == y else UNKNOWN_VALUE for x, y in zip(a, b)]


def topo_order(nodes, succ) -> list:
    """Topological order of an acyclic subgraph (successors outside ignored)."""
    nodes = set(nodes)
    indeg = {n: 0 for n in nodes}
    for n in nodes:
        for s in succ(n):
            if s in nodes:
                indeg[s] += 1
    ready = sorted(n for n in nodes if indeg[n] == 0)
    out = []
    while ready:
        n = ready.pop()
        out.append(n)
        for s in succ(n):
            if s in nodes:
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
    if len(out) != len(nodes):
        raise ValueError("subgraph is not acyclic")
    return out


def strongly_connected(nodes, succ) -> list:
    """Tarjan's algorithm, iterative."""
    nodes = set(nodes)
    index, low, on_stack, stack, out = {}, {}, set(), [], []
    counter = [0]
    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, iter([s for s in succ(root) if s in nodes]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter([s for s in succ(w) if s in nodes])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(comp)
    return out


class _LoopAnalyzer:
    def __init__(self, cfg: Cfg, loops: list):
        self.cfg = cfg
        self.loops = {l.header: l for l in loops}
        self.back = {(u, l.header) for l in loops for u, _ in l.back_edges}
        self.preds = cfg.predecessors()

    def inner_loops(self, loop) -> list:
        return [l for h, l in self.loops.items() if h != loop.header and h in loop.body]

    def propagate(self, loop, entry: list):
        """Exit stacks and JUMPI operands per body node, from ``entry`` at the header."""
        nodes = loop.body
        succ = lambda n: [s for s in self.cfg.blocks[n].successors if (n, s) not in self.back]
        states, exits, jumps = {}, {}, {}
        for n in topo_order(nodes, succ):
            if n == loop.header:
                state = list(entry)
            else:
                incoming = [exits[p] for p in self.preds[n] if p in exits and (p, n) not in self.back]
                if not incoming:
                    continue
                state = incoming[0]
                for other in incoming[1:]:
                    state = _join_stacks(state, other)
                if n in self.loops and n != loop.header:
                    state = self._havoc(self.loops[n], state)
            states[n] = state
            exits[n], jumps[n] = _sym_simulate(self.cfg.blocks[n], state)
        return exits, jumps

    def _havoc(self, inner, state: list) -> list:
        """Forget slots an inner loop may modify across its iterations."""
        h = len(state)
        fresh = [Slot(i) for i in range(h)]
        exits, _ = self.propagate(inner, fresh)
        out = list(state)
        for latch in inner.latches:
            ex = exits.get(latch)
            if ex is None:
                continue
            if len(ex) != h:
                return [UNKNOWN_VALUE] * h
            for i, v in enumerate(ex):
                if v != Slot(i):
                    out[i] = UNKNOWN_VALUE
        return out

    def preheader_value(self, loop, index: int) -> AbstractValue:
        value = None
        for p in self.preds[loop.header]:
            if (p, loop.header) in self.back:
                continue
            blk = self.cfg.blocks[p]
            ex = simulate(blk.instructions, blk.entry_stack)
            v = ex[index] if len(ex) == self.cfg.blocks[loop.header].entry_stack_height else UNKNOWN_VALUE
            value = v if value is None else value.join(v)
        return value if value is not None else UNKNOWN_VALUE

    def exit_conditions(self, loop) -> list:
        header = self.cfg.blocks[loop.header]
        h = header.entry_stack_height
        exits, jumps = self.propagate(loop, [Slot(i) for i in range(h)])
        latch_states = [exits.get(u) for u in loop.latches]
        out = []
        for x in sorted(loop.body):
            blk = self.cfg.blocks[x]
            if blk.terminator.mnemonic != "JUMPI" or jumps.get(x) is None:
                continue
            inside = [s for s in blk.successors if s in loop.body]
            outside = [s for s in blk.successors if s not in loop.body]
            if len(inside) != 1 or len(outside) != 1:
                continue
            if not all(self.cfg.dominates(x, u) for u in loop.latches):
                continue
            cond = jumps[x][1]
            cont = cond if blk.edge_kinds[inside[0]] == "true" else Not(cond)
            parsed = _normalize(cont)
            if parsed is None:
                continue
            op, slot, limit = parsed
            step = _step(slot.index, latch_states, h)
            init = self.preheader_value(loop, slot.index)
            limit_value = self._limit_value(loop, limit, latch_states, h)
            if slot.delta and limit_value.as_linear() is not None:
                limit_value = AbstractValue.lin(limit_value.as_linear() - slot.delta)
            elif slot.delta:
                limit_value = UNKNOWN_VALUE
            out.append(ExitCondition(op, slot.index, init, limit_value, step))
        return out

    def _limit_value(self, loop, limit, latch_states, h) -> AbstractValue:
        if isinstance(limit, AbstractValue):
            return limit
        if isinstance(limit, Slot):
            for st in latch_states:
                if st is None or len(st) != h or st[limit.index] != Slot(limit.index):
                    return UNKNOWN_VALUE
            base = self.preheader_value(loop, limit.index).as_linear()
            if base is None:
                return UNKNOWN_VALUE
            return AbstractValue.lin(base + limit.delta)
        return UNKNOWN_VALUE


def _normalize(cont):
    """``(op, induction Slot, limit)`` for a continue-condition, or None."""
    negated = False
    while isinstance(cont, Not):
        negated = not negated
        cont = cont.inner
    if isinstance(cont, Slot):
        return None if negated else ("NE", cont, AbstractValue.const(0))
    if not isinstance(cont, Cmp):
        return None
    op = {"SLT": "LT", "SGT": "GT"}.get(cont.op, cont.op)
    if negated:
        op = {"LT": "GE", "GT": "LE", "EQ": "NE"}[op]
    elif op == "EQ":
        return None
    left, right = cont.left, cont.right
    if isinstance(left, Slot) and not (isinstance(right, Slot) and right.index == left.index):
        return op, left, right
    if isinstance(right, Slot):
        return _FLIP[op], right, left
    return None


def _step(index: int, latch_states, h: int) -> Optional[int]:
    steps = set()
    for st in latch_states:
        if st is None or len(st) != h:
            return None
        v = st[index]
        if not isinstance(v, Slot) or v.index != index:
            return None
        steps.add(v.delta)
    if len(steps) != 1:
        return None
    s = steps.pop()
    return s or None


def find_loops(cfg: Cfg, unit) -> list:
    """Natural loops of a function unit, nested loops reported separately.

    Cycles without a dominating header come back as irreducible loops with no
    exit conditions.
    """
    nodes = set(unit.reachable_blocks)
    succ = lambda n: [s for s in cfg.blocks[n].successors if s in nodes]
    preds = cfg.predecessors()

    by_header = {}
    for u in sorted(nodes):
        for h in succ(u):
            if cfg.dominates(h, u):
                by_header.setdefault(h, []).append((u, h))

    loops = []
    for h, edges in sorted(by_header.items()):
        body = {h}
        work = [u for u, _ in edges]
        while work:
            n = work.pop()
            if n in body:
                continue
            body.add(n)
            work.extend(p for p in preds[n] if p in nodes and p not in body)
        loops.append(LoopInfo(h, frozenset(body), tuple(sorted(edges))))

    back = {e for l in loops for e in l.back_edges}
    forward = lambda n: [s for s in succ(n) if (n, s) not in back]
    for comp in strongly_connected(nodes, forward):
        cyclic = len(comp) > 1 or any(n in forward(n) for n in comp)
        if cyclic:
            header = min(comp)
            edges = tuple(sorted((u, s) for u in comp for s in forward(u) if s == header))
            loops.append(LoopInfo(header, frozenset(comp), edges, irreducible=True))

    analyzer = _LoopAnalyzer(cfg, [l for l in loops if not l.irreducible])
    for l in loops:
        if l.irreducible:
            continue
        try:
            l.exit_conditions = analyzer.exit_conditions(l)
        except ValueError:
            # body contains an irreducible region
            l.exit_conditions = []
    return loops
