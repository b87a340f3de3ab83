"""Symbolic bound engine: polynomials, cost models, loop bounds and reports."""
