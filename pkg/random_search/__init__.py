"""Stochastic random search with sign-of-difference updates."""

__all__ = [
    "constants",
    "errors",
    "rng",
    "directions",
    "objectives",
    "datasets",
    "estimators",
    "search",
    "planner",
    "baselines",
    "momentum_lab",
    "diagnostics",
    "storage",
    "harness",
    "cli",
]
