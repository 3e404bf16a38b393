"""Mesh refinement studies against a closed-form reference."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from lelandfem.assembly import assemble
from lelandfem.mesh import build_aligned
from lelandfem.model import MarketParams, PriceCurve
from lelandfem.oracles import bs_call_adjusted
from lelandfem.timestepper import SchemeConfig, price_curve_at, run

RatioRule = Literal["tau_h2", "tau_h"]


@dataclass(frozen=True)
class Level:
    h: float
    d_tau: float
    error: float


@dataclass
class RefinementStudy:
    order: int
    levels: list[Level] = field(default_factory=list)

    @property
    def errors(self) -> np.ndarray:
        return np.array([lv.error for lv in self.levels])

    @property
    def observed_orders(self) -> list[float]:
        out = []
        for a, b in zip(self.levels[:-1], self.levels[1:]):
            out.append(math.log(a.error / b.error) / math.log(a.h / b.h))
        return out

    def rows(self) -> list[dict]:
        orders = [float("nan")] + self.observed_orders
        return [
            {"h": lv.h, "d_tau": lv.d_tau, "error": lv.error, "order": q}
            for lv, q in zip(self.levels, orders)
        ]


def max_error(curve: PriceCurve, reference: Callable[[np.ndarray], np.ndarray], s_range: tuple[float, float]) -> float:
    sub = curve.restrict(*s_range)
    return float(np.max(np.abs(sub.V - reference(sub.S))))


def study(
    params: MarketParams,
    order: int,
    level_count: int,
    base_h: float,
    ratio_rule: RatioRule = "tau_h2",
    ratio: float = 0.1,
    theta: float = 0.5,
    n_rannacher: int = 4,
    reference: Callable[[np.ndarray], np.ndarray] | None = None,
    s_range: tuple[float, float] | None = None,
) -> RefinementStudy:
    """Run the solver on halved meshes and record the t = 0 error.

    ``ratio_rule`` keeps dtau/h^2 ("tau_h2") or dtau/h ("tau_h") at ``ratio``.
    The default reference is the closed form with volatility sigma sqrt(1 + Le),
    exact for the linear problem and for convex solutions.
    """
    if level_count < 2:
        raise ValueError("need at least two levels")
    Le = params.leland
    if reference is None:
        def reference(S):
            return bs_call_adjusted(S, params.K, params.r, params.sigma, Le, params.T)
    if s_range is None:
        s_range = (0.5 * params.K, 2.0 * params.K)

    result = RefinementStudy(order)
    for i in range(level_count):
        mesh = build_aligned(base_h / 2**i, params.K, order)
        h = mesh.h_max
        d_tau = ratio * (h**2 if ratio_rule == "tau_h2" else h)
        cfg = SchemeConfig(d_tau=d_tau, Le=Le, theta=theta, n_rannacher=n_rannacher)
        history = run(assemble(mesh, params.K), params, cfg)
        err = max_error(price_curve_at(history, 0.0, params), reference, s_range)
        result.levels.append(Level(h, d_tau, err))
    return result
