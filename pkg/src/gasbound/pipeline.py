"""Bytecode in, bound reports out: the glue between the analysis stages."""

from dataclasses import dataclass, field
from typing import Optional

from gasbound.bounds.costmodel import CostModelConfig
from gasbound.bounds.engine import BoundReport, compute_bound
from gasbound.cfg.build import Cfg, build_cfg
from gasbound.cfg.functions import FunctionUnit, split_functions, transitive_blocks
from gasbound.cfg.loops import find_loops
from gasbound.evm.disasm import disassemble
from gasbound.evm.schedule import GasSchedule, load_schedule
from gasbound.ingest.layout import StorageLayout
from gasbound.ingest.selector import resolve_selector
from gasbound.ingest.srcmap import SourceMap, parse_source_map


class FunctionNotFound(LookupError):
    pass


@dataclass
class Program:
    code: bytes
    instructions: list
    cfg: Cfg
    units: list
    layout: Optional[StorageLayout] = None
    srcmap: Optional[SourceMap] = None
    _loops: dict = field(default_factory=dict, repr=False)

    def unit(self, name: str) -> FunctionUnit:
        """Look a unit up by signature, ``0x`` selector, or kind (fallback/anonymous)."""
        for u in self.units:
            if name in (u.kind, u.signature):
                return u
        sel = resolve_selector(name).bytes4
        for u in self.units:
            if u.selector == sel:
                return u
        raise FunctionNotFound(name)

    def loops(self, unit: FunctionUnit) -> list:
        key = unit.entry
        if key not in self._loops:
            self._loops[key] = find_loops(self.cfg, unit)
        return self._loops[key]

    def transitive(self, unit: FunctionUnit) -> frozenset:
        return transitive_blocks(unit, self.units)

    def transitive_pcs(self, unit: FunctionUnit) -> set:
        return {ins.pc for n in self.transitive(unit) for ins in self.cfg.blocks[n].instructions}

    def analyze(self, unit: FunctionUnit, config: CostModelConfig,
                schedule: Optional[GasSchedule] = None) -> BoundReport:
        return compute_bound(self.cfg, unit, config, schedule or load_schedule(),
                             loops=self.loops(unit), layout=self.layout, srcmap=self.srcmap,
                             transitive=self.transitive(unit))

    def analyze_all(self, config: CostModelConfig, schedule: Optional[GasSchedule] = None) -> list:
        return [self.analyze(u, config, schedule) for u in self.units]


def load_program(code: bytes, layout: Optional[StorageLayout] = None,
                 srcmap_text: Optional[str] = None, source: Optional[str] = None,
                 signatures: Optional[dict] = None) -> Program:
    """Disassemble, build the CFG and split it into functions.

    Jumps to a non-JUMPDEST are treated as throws, the way the EVM executes
    them.
    """
    instructions = disassemble(code)
    cfg = build_cfg(instructions, strict=False)
    units = split_functions(cfg, signatures)
    srcmap = None
    if srcmap_text is not None:
        srcmap = parse_source_map(srcmap_text, instructions, source or "")
    return Program(bytes(code), instructions, cfg, units, layout, srcmap)


def load_fixture(fixture, with_srcmap: bool = True) -> Program:
    return load_program(fixture.code, fixture.layout,
                        fixture.srcmap if with_srcmap else None, fixture.source,
                        fixture.signature_map)
