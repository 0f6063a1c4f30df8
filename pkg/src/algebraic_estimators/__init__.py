"""Algebraic estimating equations: construction, degree reduction, homotopy solving and Monte-Carlo checks."""
