"""Theorem-driven parameter planner with unit big-O constants.

Every formula here is an order-of-magnitude heuristic; only the step-size caps
are enforced exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from .errors import PlanningError
from .objectives import TheoryConstants

logger = logging.getLogger(__name__)

_VR_BATCH_NOTE = (
    "epoch batch b(m) = d m^2 G^2 / eps^2 carries a factor d that the Case I/II batch "
    "formulas do not; implemented as written"
)


class PlanRegime(str, Enum):
    AVG_SMOOTH = "avg-smooth"
    SAMPLE_SMOOTH = "sample-smooth"
    FINITE_SUM_VR = "finite-sum-vr"
    HELPER = "helper"


@dataclass
class Plan:
    eta: float
    T: int
    b: int = 1
    m: Optional[int] = None
    caps_applied: List[str] = field(default_factory=list)
    caps: Dict[str, float] = field(default_factory=dict)
    calls: Optional[float] = None
    regime: Optional[PlanRegime] = None
    notes: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise PlanningError(f"Step size must be positive and finite, got {self.eta}")
        if self.T < 0:
            raise PlanningError(f"Iteration budget must be >= 0, got {self.T}")
        if self.b < 1:
            raise PlanningError(f"Batch size must be >= 1, got {self.b}")
        if self.m is not None and self.m < 1:
            raise PlanningError(f"Epoch length must be >= 1, got {self.m}")

    def satisfies_caps(self) -> bool:
        return all(self.eta <= cap * (1 + 1e-12) for cap in self.caps.values())


def _ratio(num: float, den: float) -> float:
    return math.inf if den == 0 else num / den


def iteration_budget(constants: TheoryConstants, epsilon: float) -> int:
    d = constants.dim
    T = d * constants.L1 / epsilon + d * constants.L0 * constants.F0 / epsilon**2
    return max(1, math.ceil(T))


def vr_batch(m: int, dim: int, G: float, epsilon: float) -> int:
    return max(1, math.ceil(dim * m * m * G * G / epsilon**2))


def epoch_calls(m: int, T: float, n: int, dim: int, G: float, epsilon: float) -> float:
    """Component calls of a VR run: (T / m) (n + (m - 1) b(m))."""
    return (T / m) * (n + (m - 1) * vr_batch(m, dim, G, epsilon))


def closed_form_epoch(n: int, dim: int, G: float, epsilon: float) -> float:
    ratio = n * epsilon**2 / (dim * G * G) if G > 0 else math.inf
    return min(ratio ** (1.0 / 3.0), ratio**0.5)


def brute_force_epoch(
    n: int, dim: int, G: float, epsilon: float, T: float = 1.0, m_max: int = 1000
) -> int:
    """Integer epoch length minimizing ``epoch_calls`` among feasible m (b(m) <= n, or m = 1)."""
    best_m, best_calls = 1, epoch_calls(1, T, n, dim, G, epsilon)
    for m in range(2, m_max + 1):
        if vr_batch(m, dim, G, epsilon) > n:
            break
        calls = epoch_calls(m, T, n, dim, G, epsilon)
        if calls < best_calls:
            best_m, best_calls = m, calls
    return best_m


def _select_epoch(n: int, dim: int, G: float, epsilon: float, notes: List[str]):
    m_star = closed_form_epoch(n, dim, G, epsilon)
    m = max(1, int(math.floor(m_star))) if math.isfinite(m_star) else n
    b = vr_batch(m, dim, G, epsilon)
    if b > n:
        while m > 1 and vr_batch(m, dim, G, epsilon) > n:
            m -= 1
        b = vr_batch(m, dim, G, epsilon)
        if b > n:
            b = n
            msg = f"b(1) exceeds n={n}; epoch batch clamped to n"
        else:
            msg = f"b(m*) exceeds n={n}; fell back to m={m}, the largest m with b(m) <= n"
        logger.warning(msg)
        notes.append(msg)
    return m_star, m, b


def plan_parameters(
    regime: PlanRegime | str,
    constants: TheoryConstants,
    epsilon: float,
    n: int,
    *,
    delta: float = 0.0,
) -> Plan:
    regime = PlanRegime(regime)
    if not epsilon > 0:
        raise PlanningError(f"Target accuracy epsilon must be > 0, got {epsilon}")
    if n < 1:
        raise PlanningError(f"Component count must be >= 1, got {n}")
    if delta < 0:
        raise PlanningError(f"Helper delta must be >= 0, got {delta}")

    c = constants
    d = c.dim
    notes: List[str] = []
    T = iteration_budget(c, epsilon)
    m: Optional[int] = None

    caps: Dict[str, float] = {}
    if regime in (PlanRegime.AVG_SMOOTH, PlanRegime.HELPER):
        caps["descent"] = _ratio(c.mu_D, c.L1)
    else:
        caps["descent-sample"] = _ratio(c.mu_D, 5.0 * c.L1)

    if regime is PlanRegime.AVG_SMOOTH:
        b = max(1, math.ceil((d * c.L0 * c.sigma0) ** 2 / epsilon**4))
        calls = 2.0 * b * T
    elif regime is PlanRegime.SAMPLE_SMOOTH:
        b = max(1, math.ceil(c.sigma1**2 / epsilon**2))
        caps["individual"] = _ratio(c.mu_D * math.sqrt(b), 32.0 * math.sqrt(2.0) * c.L1)
        calls = 2.0 * b * T
    elif regime is PlanRegime.FINITE_SUM_VR:
        m_star, m, b = _select_epoch(n, d, c.G, epsilon, notes)
        notes.append(f"closed-form m* = {m_star:.6g}, floored to m = {m}")
        notes.append(_VR_BATCH_NOTE)
        calls = (T / m) * (n + (m - 1) * b)
    else:
        b = 1
        calls = 2.0 * T
        notes.append("calls counts helper comparisons, not component queries")

    if b > n and regime in (PlanRegime.AVG_SMOOTH, PlanRegime.SAMPLE_SMOOTH):
        notes.append(f"planned batch {b} exceeds n={n}; sampling stays with replacement")

    candidates: Dict[str, float] = dict(caps)
    optimal = math.sqrt(_ratio(c.F0, c.L0 * T)) if c.F0 > 0 else math.inf
    candidates["optimal"] = optimal
    if regime is PlanRegime.HELPER and delta > 0:
        candidates["helper-floor"] = _ratio(2.0 * delta, c.L0) ** 0.5
    eta = min(candidates.values())
    if not (math.isfinite(eta) and eta > 0):
        raise PlanningError(
            f"No finite positive step size from constants {c} (candidates: {candidates})"
        )
    binding = [name for name, value in candidates.items() if value <= eta * (1 + 1e-12)]
    caps_applied = [name for name in binding if name in caps]
    if "optimal" in binding:
        notes.append("eta set by the optimizing value sqrt(F0 / (L0 T))")
    if "helper-floor" in binding:
        notes.append("eta set by the helper term sqrt(2 delta / L0)")

    return Plan(
        eta=eta,
        T=T,
        b=b,
        m=m,
        caps_applied=caps_applied,
        caps=caps,
        calls=calls,
        regime=regime,
        notes=notes,
    )


def format_plan(plan: Plan) -> str:
    lines = [
        f"regime: {plan.regime.value if plan.regime else 'manual'}",
        f"eta: {plan.eta!r}",
        f"T: {plan.T}",
        f"b: {plan.b}",
        f"m: {plan.m if plan.m is not None else '-'}",
        f"calls: {plan.calls!r}" if plan.calls is not None else "calls: -",
        "caps:",
    ]
    for name, value in plan.caps.items():
        lines.append(f"  {name}: {value!r}")
    lines.append(f"caps_applied: {', '.join(plan.caps_applied) if plan.caps_applied else 'none'}")
    for note in plan.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
