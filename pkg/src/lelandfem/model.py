"""Market data, the Leland number and the log-price change of variables.

Leland's equation for a European call,

    V_t + 1/2 sigma^2 S^2 (1 + Le sign(V_SS)) V_SS + r S V_S - r V = 0,

is mapped onto a constant-coefficient problem with

    tau = sigma^2 (T - t) / 2,   x = ln S + k tau,   u = e^{k tau} V.

With these substitutions V_t = sigma^2/2 e^{-k tau} (k u - k u_x - u_tau),
V_S = e^{-k tau} u_x / S and V_SS = e^{-k tau} (u_xx - u_x) / S^2. Dividing the
equation by sigma^2/2 e^{-k tau} leaves

    u_tau = (u_xx - u_x)(1 + Le sign) + (2r/sigma^2 - k) u_x + (k - 2r/sigma^2) u,

so k = 2r/sigma^2 is the only choice that removes the last two terms and gives

    u_tau = u_xx - u_x + Le |u_xx - u_x|.

The far-field condition u = e^x - K used at x = R is the discounted asymptote
S - K e^{-r(T-t)} written in the new variables (r (T - t) = k tau), so it needs
no extra discount factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A numerical setup is inconsistent (e.g. the domain does not contain ln K)."""


@dataclass(frozen=True)
class MarketParams:
    """Financial inputs of a Leland call.

    ``c`` is the round-trip transaction cost per currency unit and ``dt_hedge``
    the rehedging interval in years.
    """

    r: float = 0.1
    sigma: float = 0.2
    T: float = 1.0
    K: float = 100.0
    c: float = 0.0
    dt_hedge: float = 0.01

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not self.T > 0:
            raise DomainError(f"T must be positive, got {self.T}")
        if not self.K > 0:
            raise DomainError(f"K must be positive, got {self.K}")
        if not self.dt_hedge > 0:
            raise DomainError(f"dt_hedge must be positive, got {self.dt_hedge}")
        if self.c < 0:
            raise DomainError(f"transaction cost must be nonnegative, got {self.c}")
        if self.r < 0:
            raise DomainError(f"interest rate must be nonnegative, got {self.r}")

    @property
    def leland(self) -> float:
        return leland_number(self)

    @property
    def transform(self) -> TransformConstants:
        return TransformConstants.from_params(self)


@dataclass(frozen=True)
class TransformConstants:
    k: float
    tau_final: float

    @classmethod
    def from_params(cls, p: MarketParams) -> TransformConstants:
        return cls(k=2.0 * p.r / p.sigma**2, tau_final=0.5 * p.sigma**2 * p.T)


@dataclass(frozen=True)
class PriceCurve:
    """Option values V(S) at a fixed physical time t."""

    t: float
    S: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        if self.S.shape != self.V.shape:
            raise ValueError("S and V must have the same shape")

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.S.tolist(), self.V.tolist()))

    def restrict(self, s_min: float, s_max: float) -> PriceCurve:
        keep = (self.S >= s_min) & (self.S <= s_max)
        return PriceCurve(self.t, self.S[keep], self.V[keep])


def leland_number(p: MarketParams) -> float:
    """sqrt(2/pi) c / (sigma sqrt(dt_hedge))."""
    if p.sigma <= 0 or p.dt_hedge <= 0:
        raise DomainError("Leland number needs sigma > 0 and dt_hedge > 0")
    return math.sqrt(2.0 / math.pi) * p.c / (p.sigma * math.sqrt(p.dt_hedge))


def to_transformed(S, t, p: MarketParams):
    """Map (S, t) to (x, tau). Works elementwise on arrays."""
    S = np.asarray(S, dtype=float)
    if np.any(S <= 0):
        raise DomainError("asset price must be positive")
    tc = p.transform
    tau = 0.5 * p.sigma**2 * (p.T - np.asarray(t, dtype=float))
    x = np.log(S) + tc.k * tau
    return _scalarize(x), _scalarize(tau)


def from_transformed(x, tau, u_value, p: MarketParams):
    """Map (x, tau, u) back to (S, t, V)."""
    k = p.transform.k
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    u_value = np.asarray(u_value, dtype=float)
    S = np.exp(x - k * tau)
    t = p.T - 2.0 * tau / p.sigma**2
    V = np.exp(-k * tau) * u_value
    return _scalarize(S), _scalarize(t), _scalarize(V)


def initial_profile(x, K: float):
    """Payoff in transformed variables, max(e^x - K, 0)."""
    return _scalarize(np.maximum(np.exp(np.asarray(x, dtype=float)) - K, 0.0))


def boundary_values(tau: float, R: float, K: float) -> tuple[float, float]:
    """Dirichlet data (u(-R), u(R)); independent of tau."""
    if R <= math.log(K):
        raise ConfigurationError(f"half-width R={R} must exceed ln K={math.log(K):.6g}")
    return 0.0, math.exp(R) - K


def boundary_slopes(tau: float, R: float, K: float) -> tuple[float, float]:
    """u_x of the boundary data at (-R, R): 0 on the left, e^R on the right."""
    return 0.0, math.exp(R)


def default_half_width(K: float) -> float:
    """ln K + 2, widened when K < 1 so that -R stays left of ln K."""
    return abs(math.log(K)) + 2.0


def _scalarize(a: np.ndarray):
    return float(a) if a.ndim == 0 else a
