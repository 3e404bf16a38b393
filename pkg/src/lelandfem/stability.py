"""Mesh-ratio advice and a scalar measure of spurious oscillation.

The oscillation index of one time level looks at the second differences d_i of
the nodal values inside a window around x = ln K. Every neighbouring pair with
opposite signs contributes min(|d_i|, |d_{i+1}|); the sum is divided by
sum |d_i|. A convex (or otherwise smooth, sign-definite) profile scores 0, a
sawtooth scores close to 1, and the score is unchanged when a constant is added
to u or u is multiplied by a positive factor.

Only the later part of the run is scored, by default the levels with
tau >= tau_final / 2 (the half of the life of the option closest to t = 0). The
smoothed payoff kink produces a short, decaying ripple during the first steps,
most visibly at large dtau/h^2; the instability of interest persists and grows
towards t = 0, so a transient that has died out is not counted.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from lelandfem.mesh import Mesh1D
from lelandfem.timestepper import SchemeConfig, SolutionHistory

DEFAULT_THRESHOLD = 0.01
DEFAULT_WINDOW = 1.0
DEFAULT_SCORED_FRACTION = 0.5


@dataclass(frozen=True)
class StabilityReport:
    ratio_tau_h: float
    ratio_tau_h2: float
    oscillation_index: float
    flagged: bool
    threshold: float
    per_level_index: list[float] = field(repr=False)
    worst_level: int = 0
    tau_worst: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RatioAdvice:
    ratio_tau_h: float
    ratio_tau_h2: float
    status: str  # "ok" or "warn"
    messages: list[str]


def level_index(u: np.ndarray) -> float:
    d = np.diff(np.asarray(u, dtype=float), 2)
    total = float(np.sum(np.abs(d)))
    if d.size < 2 or total == 0.0:
        return 0.0
    flips = d[:-1] * d[1:] < 0
    alternating = np.minimum(np.abs(d[:-1]), np.abs(d[1:]))[flips].sum()
    return float(alternating / total)


def oscillation_series(history: SolutionHistory, center: float, window: float = DEFAULT_WINDOW) -> np.ndarray:
    x = history.nodes
    sel = (x >= center - window) & (x <= center + window)
    full = history.full_states()
    return np.array([level_index(row[sel]) for row in full])


def analyze(
    history: SolutionHistory,
    mesh: Mesh1D | None,
    cfg: SchemeConfig,
    threshold: float = DEFAULT_THRESHOLD,
    window: float = DEFAULT_WINDOW,
    scored_fraction: float = DEFAULT_SCORED_FRACTION,
) -> StabilityReport:
    """Mesh ratios and oscillation index of a finished run.

    The index is the largest per-level score over the window ln K +- ``window``,
    taken over the levels with tau >= (1 - scored_fraction) tau_final. Pass
    ``scored_fraction=1`` to score every level.
    """
    if not 0.0 < scored_fraction <= 1.0:
        raise ValueError("scored_fraction must lie in (0, 1]")
    if history.n_levels == 0:
        raise ValueError("empty history")
    mesh = history.mesh if mesh is None else mesh
    h = mesh.h_max if mesh is not None else float(np.max(np.diff(history.nodes)))
    series = oscillation_series(history, math.log(history.params.K), window)
    scored = series.copy()
    taus = history.tau_levels
    start = (1.0 - scored_fraction) * taus[-1]
    scored[taus < start * (1 - 1e-12)] = 0.0
    worst = int(np.argmax(scored))
    index = float(scored[worst])
    return StabilityReport(
        ratio_tau_h=cfg.d_tau / h,
        ratio_tau_h2=cfg.d_tau / h**2,
        oscillation_index=index,
        flagged=index > threshold,
        threshold=threshold,
        per_level_index=series.tolist(),
        worst_level=worst,
        tau_worst=float(history.tau_levels[worst]),
    )


def ratio_check(h: float, d_tau: float) -> RatioAdvice:
    if h <= 0 or d_tau <= 0:
        raise ValueError("h and d_tau must be positive")
    r1, r2 = d_tau / h, d_tau / h**2
    messages = []
    if r1 >= 1:
        messages.append(f"dtau/h = {r1:.4g} >= 1")
    if r2 >= 1:
        messages.append(f"dtau/h^2 = {r2:.4g} >= 1")
    status = "warn" if messages else "ok"
    if r2 < 1 and r2 > 0.5:
        messages.append(f"note: dtau/h^2 = {r2:.4g} is near the regime where oscillations were observed (0.8)")
    return RatioAdvice(r1, r2, status, messages)
