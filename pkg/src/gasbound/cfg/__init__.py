from gasbound.cfg.absval import AbstractValue
from gasbound.cfg.build import BasicBlock, Cfg, InvalidJumpTarget, build_cfg
from gasbound.cfg.functions import FunctionUnit, split_functions
from gasbound.cfg.loops import ExitCondition, LoopInfo, find_loops

__all__ = [
    "AbstractValue", "BasicBlock", "Cfg", "InvalidJumpTarget", "build_cfg",
    "FunctionUnit", "split_functions", "ExitCondition", "LoopInfo", "find_loops",
]
