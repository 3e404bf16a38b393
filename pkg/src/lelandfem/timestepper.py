"""Linearized theta-scheme with Rannacher startup.

One step solves

    A u^{n+1} = M u^n + (1 - theta) dtau F^n + theta dtau Le Mbar |v^n|
                - b_M^{n+1} + b_M^n + theta dtau (b_K^{n+1} - b_P^{n+1}),

    A = M - theta dtau (K - P),   F^n = M v^n + Le Mbar |v^n|,

i.e. the implicit part of the nonlinear term is frozen at the previous level
(|v^{n+1}| replaced by |v^n|). The products M v^n and Mbar |v^n| use the interior
rows of the all-node matrices because v is defined on every node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from lelandfem.assembly import BandedLU, BoundaryTreatment, GlobalSystem, apply, compute_v
from lelandfem.mesh import Mesh1D
from lelandfem.model import MarketParams, PriceCurve, from_transformed, initial_profile

log = logging.getLogger(__name__)

Variant = Literal["v1", "v2"]


class NumericalBlowup(RuntimeError):
    """Non-finite values appeared in the solution."""


@dataclass(frozen=True)
class SchemeConfig:
    """Time discretization. ``variant="v2"`` replaces Mbar by M."""

    d_tau: float
    Le: float = 0.0
    theta: float = 0.5
    n_rannacher: int = 4
    variant: Variant = "v1"
    v_boundary: BoundaryTreatment = "dirichlet"

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.d_tau > 0:
            raise ValueError(f"d_tau must be positive, got {self.d_tau}")
        if self.n_rannacher < 0:
            raise ValueError("n_rannacher must be nonnegative")
        if self.Le < 0:
            raise ValueError("Le must be nonnegative")
        if self.variant not in ("v1", "v2"):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(eq=False)
class SolutionHistory:
    """Interior nodal u per time level, with what is needed to interpret it."""

    tau_levels: np.ndarray
    states: np.ndarray  # (n_levels, n_interior)
    nodes: np.ndarray  # all nodes, boundary included
    boundary: tuple[float, float]
    params: MarketParams
    mesh: Mesh1D | None = None
    system: GlobalSystem | None = field(default=None, repr=False)

    @property
    def n_levels(self) -> int:
        return self.tau_levels.size

    def full_state(self, level: int) -> np.ndarray:
        return np.concatenate(([self.boundary[0]], self.states[level], [self.boundary[1]]))

    def full_states(self) -> np.ndarray:
        n = self.n_levels
        left = np.full((n, 1), self.boundary[0])
        right = np.full((n, 1), self.boundary[1])
        return np.hstack([left, self.states, right])

    def state_at_tau(self, tau: float) -> np.ndarray:
        """All-node u at ``tau``, linear in tau between stored levels."""
        levels = self.tau_levels
        tol = 1e-12 * max(1.0, levels[-1])
        if tau < levels[0] - tol or tau > levels[-1] + tol:
            raise ValueError(f"tau={tau} outside the computed range [{levels[0]}, {levels[-1]}]")
        tau = min(max(tau, levels[0]), levels[-1])
        j = int(np.searchsorted(levels, tau))
        if j < levels.size and abs(levels[j] - tau) <= tol:
            return self.full_state(j)
        if j > 0 and abs(levels[j - 1] - tau) <= tol:
            return self.full_state(j - 1)
        w = (tau - levels[j - 1]) / (levels[j] - levels[j - 1])
        return (1 - w) * self.full_state(j - 1) + w * self.full_state(j)


class ThetaStepper:
    """Caches the factorized left-hand side per (theta, d_tau)."""

    def __init__(self, sys: GlobalSystem, Le: float, v_boundary: BoundaryTreatment = "dirichlet"):
        self.sys = sys
        self.Le = Le
        self.v_boundary = v_boundary
        self._lu: dict[tuple[float, float], BandedLU] = {}

    def lhs(self, theta: float, d_tau: float) -> BandedLU:
        key = (theta, d_tau)
        if key not in self._lu:
            s = self.sys
            self._lu[key] = BandedLU(s.M - (theta * d_tau) * (s.K - s.P))
        return self._lu[key]

    def __call__(self, u_n: np.ndarray, theta: float, d_tau: float, tau_n: float = 0.0) -> np.ndarray:
        s = self.sys
        tau_next = tau_n + d_tau
        v = compute_v(s, u_n, tau_n, self.v_boundary)
        abs_v = np.abs(v)
        Mv = s.mass.rows_interior(v)
        nonlinear = self.Le * s.abs_mass.rows_interior(abs_v)
        F = Mv + nonlinear
        bM_n = s.mass.boundary_vector(s.boundary_u(tau_n))
        bM_next, bK_next, bP_next = s.b_vectors(tau_next)
        rhs = (
            apply(s.M, u_n)
            + (1.0 - theta) * d_tau * F
            + theta * d_tau * nonlinear
            - bM_next
            + bM_n
            + theta * d_tau * (bK_next - bP_next)
        )
        return self.lhs(theta, d_tau).solve(rhs)


def step(
    sys: GlobalSystem,
    u_n: np.ndarray,
    cfg: SchemeConfig,
    theta_eff: float | None = None,
    d_tau_eff: float | None = None,
    tau_n: float = 0.0,
) -> np.ndarray:
    """Advance interior values by one (possibly sub-) step."""
    if not np.all(np.isfinite(u_n)):
        raise NumericalBlowup("u_n contains non-finite values")
    theta = cfg.theta if theta_eff is None else theta_eff
    d_tau = cfg.d_tau if d_tau_eff is None else d_tau_eff
    if not d_tau > 0:
        raise ValueError("step size must be positive")
    if cfg.variant == "v2":
        sys = sys.with_abs_mass_equal_to_mass()
    return ThetaStepper(sys, cfg.Le, cfg.v_boundary)(u_n, theta, d_tau, tau_n)


def initial_state(sys: GlobalSystem) -> np.ndarray:
    """Payoff interpolated at the interior nodes."""
    return initial_profile(sys.mesh.nodes[1:-1], sys.strike)


def n_main_steps(tau_final: float, d_tau: float) -> int:
    n = max(1, round(tau_final / d_tau))
    if abs(n * d_tau - tau_final) > 1e-6 * tau_final:
        log.info("d_tau=%g does not divide tau_final=%g; using %d steps of %g", d_tau, tau_final, n, tau_final / n)
    return n


def run(sys: GlobalSystem, params: MarketParams, cfg: SchemeConfig) -> SolutionHistory:
    """Integrate from tau = 0 to the horizon sigma^2 T / 2.

    The horizon is split into round(tau_final / d_tau) equal steps. With
    n_rannacher > 0 the first of them is replaced by that many backward Euler
    substeps; every substep level is stored.
    """
    tau_final = params.transform.tau_final
    n_steps = n_main_steps(tau_final, cfg.d_tau)
    d_tau = tau_final / n_steps
    if cfg.variant == "v2":
        sys = sys.with_abs_mass_equal_to_mass()
    stepper = ThetaStepper(sys, cfg.Le, cfg.v_boundary)

    schedule: list[tuple[float, float]] = []
    if cfg.n_rannacher > 0:
        schedule += [(1.0, d_tau / cfg.n_rannacher)] * cfg.n_rannacher
        schedule += [(cfg.theta, d_tau)] * (n_steps - 1)
    else:
        schedule += [(cfg.theta, d_tau)] * n_steps

    u = initial_state(sys)
    taus = [0.0]
    states = [u]
    tau = 0.0
    for k, (theta, dt) in enumerate(schedule):
        with np.errstate(over="ignore", invalid="ignore"):  # checked just below
            u = stepper(u, theta, dt, tau)
        tau = tau + dt
        if not np.all(np.isfinite(u)):
            raise NumericalBlowup(f"non-finite solution after step {k + 1} (tau={tau:.6g})")
        taus.append(tau)
        states.append(u)
    taus[-1] = tau_final  # remove round-off drift from summing substeps

    return SolutionHistory(
        tau_levels=np.array(taus),
        states=np.array(states),
        nodes=np.asarray(sys.mesh.nodes),
        boundary=sys.boundary_u(0.0),
        params=params,
        mesh=sys.mesh,
        system=sys,
    )


def price_curve_at(history: SolutionHistory, t: float, params: MarketParams | None = None) -> PriceCurve:
    params = history.params if params is None else params
    if not -1e-12 <= t <= params.T + 1e-12:
        raise ValueError(f"t={t} outside [0, T={params.T}]")
    tau = 0.5 * params.sigma**2 * (params.T - t)
    u = history.state_at_tau(tau)
    S, _, V = from_transformed(history.nodes, tau, u, params)
    return PriceCurve(float(t), np.asarray(S), np.asarray(V))


def final_v(history: SolutionHistory) -> np.ndarray:
    """All-node v at the last stored level (FEM histories only)."""
    if history.system is None:
        raise ValueError("history has no finite-element system attached")
    return compute_v(history.system, history.states[-1], float(history.tau_levels[-1]))

