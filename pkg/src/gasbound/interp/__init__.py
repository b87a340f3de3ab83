"""Concrete execution used as the reference for bound checks."""

from gasbound.interp.machine import Env, ExecResult, Step, execute
from gasbound.interp.measure import measure, memory_charges

__all__ = ["Env", "ExecResult", "Step", "execute", "measure", "memory_charges"]
