"""Reference prices: Black-Scholes closed forms and a finite-difference solver.

The finite-difference solver works on the same transformed equation and the
same boundary data as the finite elements, so comparing the two isolates the
spatial discretization. It shares no code with the element assembly or the
banded LU used by the finite-element path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded as _lapack_solve_banded
from scipy.special import ndtr

from lelandfem.mesh import Mesh1D
from lelandfem.model import MarketParams, boundary_values, initial_profile
from lelandfem.timestepper import NumericalBlowup, SolutionHistory, n_main_steps


def norm_cdf(x):
    return ndtr(x)


def bs_call_closed_form(S, K: float, r: float, sigma: float, T_minus_t: float):
    """European call under constant volatility. Vectorized in S."""
    S = np.asarray(S, dtype=float)
    if T_minus_t <= 0:
        out = np.maximum(S - K, 0.0)
        return float(out) if out.ndim == 0 else out
    sqrt_t = np.sqrt(T_minus_t)
    with np.errstate(divide="ignore"):
        log_moneyness = np.log(S / K)
    d1 = (log_moneyness + (r + 0.5 * sigma**2) * T_minus_t) / (sigma * sqrt_t)
    d2 = d1 - sigma * sqrt_t
    out = S * norm_cdf(d1) - K * np.exp(-r * T_minus_t) * norm_cdf(d2)
    out = np.where(S > 0, out, 0.0)
    return float(out) if out.ndim == 0 else out


def bs_call_adjusted(S, K: float, r: float, sigma: float, Le: float, T_minus_t: float):
    """Closed form with the convex-payoff volatility sigma sqrt(1 + Le)."""
    if Le < 0:
        raise ValueError("Le must be nonnegative")
    return bs_call_closed_form(S, K, r, sigma * np.sqrt(1.0 + Le), T_minus_t)


@dataclass(frozen=True)
class FdmConfig:
    n_space: int
    d_tau: float
    theta: float = 0.5
    n_rannacher: int = 4

    def __post_init__(self) -> None:
        if self.n_space < 3:
            raise ValueError("n_space must be at least 3")
        if not self.d_tau > 0:
            raise ValueError("d_tau must be positive")
        if not 0 <= self.theta <= 1:
            raise ValueError("theta must lie in [0, 1]")

    @classmethod
    def matching(cls, mesh: Mesh1D, d_tau: float, **kw) -> FdmConfig:
        """Grid through the nodes of a uniform ``mesh``, else through its vertices.

        For a uniform P2 mesh the grid spacing is h/2 so that every finite
        element node is also a grid point.
        """
        nodes = np.asarray(mesh.nodes)
        gaps = np.diff(nodes)
        n = nodes.size if np.allclose(gaps, gaps[0], rtol=1e-9, atol=0) else mesh.n_elements + 1
        return cls(n_space=n, d_tau=d_tau, **kw)


def fdm_solve(params: MarketParams, R: float, fdm: FdmConfig) -> SolutionHistory:
    """Central differences for u_tau = u_xx - u_x + Le |u_xx - u_x|.

    Same linearization as the finite elements: the Le-term is taken at the old
    level, the linear part with the theta-scheme, and the first step is replaced
    by ``n_rannacher`` backward Euler substeps.
    """
    x = np.linspace(-R, R, fdm.n_space)
    h = x[1] - x[0]
    Le = params.leland
    left, right = boundary_values(0.0, R, params.K)
    lo = 1.0 / h**2 + 0.5 / h  # coefficient of u_{i-1}
    di = -2.0 / h**2
    up = 1.0 / h**2 - 0.5 / h  # coefficient of u_{i+1}

    def D(full: np.ndarray) -> np.ndarray:
        return lo * full[:-2] + di * full[1:-1] + up * full[2:]

    n = fdm.n_space - 2
    tau_final = params.transform.tau_final
    n_steps = n_main_steps(tau_final, fdm.d_tau)
    dt_main = tau_final / n_steps
    schedule = [(fdm.theta, dt_main)] * n_steps
    if fdm.n_rannacher > 0:
        schedule = [(1.0, dt_main / fdm.n_rannacher)] * fdm.n_rannacher + schedule[1:]

    full = initial_profile(x, params.K)
    full[0], full[-1] = left, right
    taus, states = [0.0], [full[1:-1].copy()]
    tau = 0.0
    cache: dict[tuple[float, float], np.ndarray] = {}
    for k, (theta, dt) in enumerate(schedule):
        if (theta, dt) not in cache:
            ab = np.zeros((3, n))
            ab[0, 1:] = -theta * dt * up
            ab[1, :] = 1.0 - theta * dt * di
            ab[2, :-1] = -theta * dt * lo
            cache[(theta, dt)] = ab
        d_old = D(full)
        rhs = full[1:-1] + (1.0 - theta) * dt * d_old + dt * Le * np.abs(d_old)
        rhs[0] += theta * dt * lo * left
        rhs[-1] += theta * dt * up * right
        inner = _lapack_solve_banded((1, 1), cache[(theta, dt)], rhs)
        tau += dt
        if not np.all(np.isfinite(inner)):
            raise NumericalBlowup(f"finite-difference solution blew up at step {k + 1} (tau={tau:.6g})")
        full = np.concatenate(([left], inner, [right]))
        taus.append(tau)
        states.append(inner)
    taus[-1] = tau_final
    return SolutionHistory(np.array(taus), np.array(states), x, (left, right), params)
