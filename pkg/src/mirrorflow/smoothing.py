"""Smooth surrogates for max{0,s} and |s|, their l1 aggregate, and the
decreasing mu(t) schedule used by the smoothed dynamics.

Both scalar surrogates match the exact function outside a band of width
proportional to mu and replace it by a quadratic inside, so

    0 <= surrogate(s, mu) - exact(s) <= mu / 4

everywhere, i.e. the approximation constant kappa is 1/4 per term and adds
up under nonnegative combinations (n/4 for the l1 norm in R^n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError
from .numerics import as_vector

#: gradient Lipschitz band constants (ell such that grad is ell/mu-Lipschitz)
ELL_MAX_ZERO = 0.5
ELL_ABS = 2.0


def _check_mu(mu: float) -> float:
    if not mu > 0:
        raise ParameterError(f"smoothing parameter must be positive, got {mu}")
    return float(mu)


def smooth_max_zero(s, mu: float):
    """max{0, s} outside |s| > mu, (s + mu)^2 / (4 mu) inside."""
    mu = _check_mu(mu)
    s = np.asarray(s, dtype=float)
    inner = (s + mu) ** 2 / (4.0 * mu)
    out = np.where(np.abs(s) > mu, np.maximum(s, 0.0), inner)
    return float(out) if out.ndim == 0 else out


def smooth_max_zero_grad(s, mu: float):
    mu = _check_mu(mu)
    s = np.asarray(s, dtype=float)
    inner = (s + mu) / (2.0 * mu)
    out = np.where(np.abs(s) > mu, (s > 0).astype(float), inner)
    return float(out) if out.ndim == 0 else out


def smooth_abs(s, mu: float):
    """|s| outside |s| > mu/2, s^2/mu + mu/4 inside."""
    mu = _check_mu(mu)
    s = np.asarray(s, dtype=float)
    inner = s * s / mu + 0.25 * mu
    out = np.where(np.abs(s) > 0.5 * mu, np.abs(s), inner)
    return float(out) if out.ndim == 0 else out


def smooth_abs_grad(s, mu: float):
    mu = _check_mu(mu)
    s = np.asarray(s, dtype=float)
    out = np.where(np.abs(s) > 0.5 * mu, np.sign(s), 2.0 * s / mu)
    return float(out) if out.ndim == 0 else out


def smooth_l1(x, mu: float):
    """Smoothed ||x||_1: value and gradient; kappa = len(x)/4."""
    x = as_vector(x, "l1 argument")
    return float(np.sum(smooth_abs(x, mu))), smooth_abs_grad(x, mu)


@dataclass(frozen=True)
class MuSchedule:
    """mu(t) = mu0 * t^(-2 alpha) for t >= t0 > 0, with alpha >= 2."""

    mu0: float
    alpha: float
    t0: float = 1.0

    def __post_init__(self):
        if not self.mu0 > 0:
            raise ParameterError("mu0 must be positive")
        if not self.alpha >= 2:
            raise ParameterError("mu schedule needs alpha >= 2")
        if not self.t0 > 0:
            raise ParameterError("mu schedule needs t0 > 0")

    def mu_at(self, t: float) -> float:
        if t < self.t0:
            raise ParameterError(f"mu_at called with t = {t} < t0 = {self.t0}")
        return self.mu0 * float(t) ** (-2.0 * self.alpha)

    def mu_dot(self, t: float) -> float:
        if t < self.t0:
            raise ParameterError(f"mu_dot called with t = {t} < t0 = {self.t0}")
        return -2.0 * self.alpha * self.mu0 * float(t) ** (-2.0 * self.alpha - 1.0)


@dataclass(frozen=True)
class SmoothedObjective:
    """A nonsmooth convex f with a parameterized smooth surrogate.

    ``value(x, mu)`` and ``grad(x, mu)`` evaluate the surrogate;
    ``exact(x)`` evaluates f itself (used for reporting) and kappa bounds
    the approximation error: |value(x, mu) - exact(x)| <= kappa * mu.
    """

    exact: Callable[[np.ndarray], float]
    value: Callable[[np.ndarray, float], float]
    grad: Callable[[np.ndarray, float], np.ndarray]
    kappa: float
    tag: str = ""


def smoothed_l1_objective(dim: int) -> SmoothedObjective:
    return SmoothedObjective(
        exact=lambda x: float(np.sum(np.abs(x))),
        value=lambda x, mu: float(np.sum(smooth_abs(np.asarray(x, dtype=float), mu))),
        grad=lambda x, mu: smooth_abs_grad(np.asarray(x, dtype=float), mu),
        kappa=dim / 4.0,
        tag="l1",
    )
