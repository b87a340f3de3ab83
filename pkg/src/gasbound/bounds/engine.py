"""Worst-path resource bounds for one function unit.

Costs are tracked per *atom*, the finest grouping any scope can ask for:
``(report key, mnemonic, source line, storage field)``. Every atom gets its
own worst-path bound (longest path over the loop-collapsed DAG, loops
contributing ``iterations * per-iteration cost + exit cost``), and a report
key's bound is the sum of its atoms. Summing per-atom maxima over-approximates
each key a little but makes every partition of the atoms add up exactly.
"""

from dataclasses import dataclass, field
from typing import Optional

from gasbound.bounds.costmodel import (ChargeContext, CostModelConfig, report_key,
                                       resource_amount)
from gasbound.bounds.loopbound import infer_loop_bound
from gasbound.bounds.memory import accessed_words, memory_gas
from gasbound.bounds.poly import INF, ZERO, SymbolicBound
from gasbound.cfg.loops import find_loops, topo_order
from gasbound.evm.schedule import NAMED_FAMILIES, GasSchedule
from gasbound.ingest.layout import resolve_slot


@dataclass
class BoundReport:
    function: object  # FunctionUnit
    config: CostModelConfig
    entries: dict = field(default_factory=dict)  # key -> SymbolicBound
    memory_gas: Optional[SymbolicBound] = None

    @property
    def unbounded(self) -> bool:
        return any(b.unbounded for b in self.entries.values())

    def total(self) -> SymbolicBound:
        out = ZERO
        for b in self.entries.values():
            out = out + b
        return out

    @property
    def params(self) -> set:
        out = set()
        for b in self.entries.values():
            out |= b.params
        if self.memory_gas is not None:
            out |= self.memory_gas.params
        return out

    def to_json(self) -> dict:
        unit = self.function
        return {
            "function": unit.name,
            "selector": unit.selector_hex,
            "kind": unit.kind,
            "resource": self.config.resource,
            "scope": self.config.scope,
            "filter": list(self.config.filter),
            "entries": {k: b.to_json() for k, b in self.entries.items()},
            "memory_gas": None if self.memory_gas is None else self.memory_gas.to_json(),
            "params": sorted(self.params),
            "unbounded": self.unbounded,
        }

    def render_text(self) -> str:
        unit = self.function
        mem = None if self.memory_gas is None else self.memory_gas.render()
        return _format(unit.name, unit.selector_hex,
                       self.config.resource, self.config.scope,
                       [(k, b.render()) for k, b in self.entries.items()], mem)


def render_json_report(data: dict) -> str:
    """Text form of a report that went through ``to_json``."""
    entries = [(k, SymbolicBound.from_json(b).render()) for k, b in data["entries"].items()]
    mem = data.get("memory_gas")
    mem = None if mem is None else SymbolicBound.from_json(mem).render()
    return _format(data["function"], data["selector"], data["resource"], data["scope"], entries, mem)


def _format(name, selector, resource, scope, entries, memory) -> str:
    head = name if selector in (None, name) else f"{name} [{selector}]"
    lines = [f"{head}  ({resource}, {scope})"]
    lines += [f"  {k}: {text}" for k, text in entries]
    if memory is not None:
        lines.append(f"  memory_gas: {memory}")
    return "\n".join(lines)


def _add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] + v if k in out else v
    return out


def _join(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k].join(v) if k in out else v
    return out


def _times(v: dict, n: SymbolicBound) -> dict:
    return {k: n.times(c) for k, c in v.items()}


class _Broken(Exception):
    """Loop structure the engine cannot collapse; every key becomes unbounded."""


class _Engine:
    def __init__(self, cfg, unit, loops, config, schedule, layout, srcmap, transitive):
        self.cfg = cfg
        self.unit = unit
        self.config = config
        self.schedule = schedule
        self.layout = layout
        self.srcmap = srcmap
        self.transitive = transitive
        self.loops = sorted(loops, key=lambda l: (len(l.body), l.header))
        self._cost = {}
        self._totals = {}
        self.parent = self._nest()

    def _nest(self) -> dict:
        parent = {}
        for i, l in enumerate(self.loops):
            parent[i] = None
            for j in range(i + 1, len(self.loops)):
                m = self.loops[j]
                if l.body < m.body:
                    parent[i] = j
                    break
                if l.body & m.body:
                    raise _Broken()
        return parent

    def children(self, idx) -> list:
        return [i for i, p in self.parent.items() if p == idx]

    def node_cost(self, n) -> dict:
        if n in self._cost:
            return self._cost[n]
        blk = self.cfg.blocks[n]
        has_map = bool(self.srcmap)
        vec = {}
        for ins, args in zip(blk.instructions, blk.operands):
            name = ins.mnemonic
            fld = None
            if name in ("SLOAD", "SSTORE"):
                fld = resolve_slot(args[0], self.layout)
            line = self.srcmap.line(ins.pc) if has_map else None
            ctx = ChargeContext(args, line, fld, n in self.transitive, has_map)
            key = report_key(ins, self.config, ctx)
            if key is None:
                continue
            atom = (key, name, line, fld)
            amount = resource_amount(ins, self.config, self.schedule, args)
            vec[atom] = vec[atom] + amount if atom in vec else amount
        self._cost[n] = vec
        return vec

    def _halts(self, n) -> bool:
        blk = self.cfg.blocks[n]
        return not blk.successors or blk.unresolved

    def longest(self, nodes, child_ids, entry, skip, target_nodes, exits_are_targets):
        """Worst-path vector from ``entry`` to any target inside ``nodes``."""
        rep = {n: n for n in nodes}
        for c in child_ids:
            for n in self.loops[c].body:
                rep[n] = (-1 - c, 0)  # loop stand-in; never a real pc
        succ = {r: set() for r in rep.values()}
        target = set()
        for n in nodes:
            r = rep[n]
            if n in target_nodes or (exits_are_targets and self._halts(n)):
                target.add(r)
            for s in self.cfg.blocks[n].successors:
                if (n, s) in skip:
                    continue
                if s not in nodes:
                    if exits_are_targets:
                        target.add(r)
                    continue
                if rep[s] != r:
                    succ[r].add(rep[s])
        try:
            order = topo_order(succ, lambda r: succ[r])
        except ValueError:
            raise _Broken() from None
        dist = {}
        for r in reversed(order):
            best = {} if r in target else None
            for s in succ[r]:
                d = dist.get(s)
                if d is not None:
                    best = d if best is None else _join(best, d)
            if best is None:
                continue
            cost = self.loop_total(-1 - r[0]) if r[0] < 0 else self.node_cost(r)
            dist[r] = _add(cost, best)
        return dist.get(rep[entry], {})

    def loop_total(self, idx) -> dict:
        if idx in self._totals:
            return self._totals[idx]
        loop = self.loops[idx]
        if loop.irreducible:
            atoms = {}
            for n in loop.body:
                atoms = _add(atoms, self.node_cost(n))
            total = {a: INF for a, c in atoms.items() if not c.is_zero()}
        else:
            kids = self.children(idx)
            skip = set(loop.back_edges)
            latches = loop.latches
            iteration = self.longest(loop.body, kids, loop.header, skip, latches, False)
            leaving = self.longest(loop.body, kids, loop.header, skip, set(), True)
            total = _add(_times(iteration, infer_loop_bound(loop)), leaving)
        self._totals[idx] = total
        return total

    def run(self) -> dict:
        nodes = set(self.unit.reachable_blocks)
        top = self.children(None)
        body = self.longest(nodes, top, self.unit.entry, set(), set(), True)
        prefix = {}
        for n in self.unit.dispatch_path:
            prefix = _add(prefix, self.node_cost(n))
        return _add(prefix, body)

    def all_atoms(self) -> dict:
        out = {}
        for n in set(self.unit.reachable_blocks) | set(self.unit.dispatch_path):
            out = _add(out, self.node_cost(n))
        return out


def _default_keys(config: CostModelConfig, layout, present) -> list:
    if config.filter:
        return list(dict.fromkeys(config.filter_keys))
    scope = config.scope
    if scope == "all":
        return ["all"]
    if scope == "gas-family":
        return list(NAMED_FAMILIES) + sorted(set(present) - set(NAMED_FAMILIES))
    if scope in ("storage", "storage-optimization"):
        names = [f.name for f in layout.entries if f.kind == "BasicScalar"] if layout else []
        return names + sorted(set(present) - set(names))
    if scope == "line":
        return sorted(present, key=int)
    return sorted(present)


def _touched(cfg, unit) -> list:
    return sorted(set(unit.reachable_blocks) | set(unit.dispatch_path))


def atom_bounds(cfg, unit, config: CostModelConfig, schedule: GasSchedule, *,
                loops=None, layout=None, srcmap=None, transitive=frozenset()):
    """Worst-path bound of every atom ``(key, mnemonic, line, field)``.

    Returns ``(bounds, poisoned)``. When the unit contains an unresolved jump
    or loops that cannot be nested, every atom is unbounded and ``poisoned``
    is set, since the unknown continuation may execute anything.
    """
    if loops is None:
        loops = find_loops(cfg, unit)
    poisoned = any(cfg.blocks[n].unresolved for n in _touched(cfg, unit))
    engine = None
    try:
        engine = _Engine(cfg, unit, loops, config, schedule, layout, srcmap, transitive)
        if not poisoned:
            return engine.run(), False
    except _Broken:
        pass
    atoms = engine.all_atoms() if engine is not None else {}
    return {a: INF for a in atoms}, True


def compute_bound(cfg, unit, config: CostModelConfig, schedule: GasSchedule, *,
                  loops=None, layout=None, srcmap=None, transitive=frozenset()) -> BoundReport:
    """Symbolic upper bound per report key for one execution of ``unit``."""
    per_atom, poisoned = atom_bounds(cfg, unit, config, schedule, loops=loops, layout=layout,
                                     srcmap=srcmap, transitive=transitive)
    keys = _default_keys(config, layout, {a[0] for a in per_atom})
    entries = {}
    for k in keys:
        total = INF if poisoned else ZERO
        for atom, b in per_atom.items():
            if atom[0] == k:
                total = total + b
        entries[k] = total
    report = BoundReport(unit, config, entries)
    if config.resource == "gas":
        report.memory_gas = memory_gas_bound(cfg, unit, schedule)
    return report


def memory_words_bound(cfg, unit) -> SymbolicBound:
    """Highest memory word any path of ``unit`` can touch (plus one)."""
    words = ZERO
    for n in _touched(cfg, unit):
        blk = cfg.blocks[n]
        if blk.unresolved:
            return INF
        for ins, args in zip(blk.instructions, blk.operands):
            w = accessed_words(ins.mnemonic, args)
            if w is not None:
                words = words.join(w)
    return words


def memory_gas_bound(cfg, unit, schedule: GasSchedule) -> SymbolicBound:
    return memory_gas(memory_words_bound(cfg, unit), schedule.memory_linear,
                      schedule.memory_quadratic_divisor)
