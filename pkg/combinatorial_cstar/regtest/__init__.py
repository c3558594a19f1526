"""Acceptance runs of the combinatorial C*-algebra pipeline."""
