"""The accelerated primal-dual mirror vector fields.

Centralized flow on (x, u, lam, v) for min f(x) s.t. A x = b, x in X:

    dx   = (alpha/t) (grad_conj(u) - x)
    du   = -(t/alpha) (grad f(x) + beta A^T (A x - b) + A^T v)
    dlam = (alpha/t) (v - lam)
    dv   = (t/alpha) (A grad_conj(u) - b)

The consensus variant replaces A^T(Ax - b) by L x and A by L; the
monotropic variant adds auxiliary blocks (y, z) that decompose the coupled
resource constraint through the graph. Smoothed variants substitute the
surrogate gradient grad f(x, mu(t)) with mu given by a deterministic
schedule, never carried as extra state. An equivalent second-order form of
the centralized flow is provided for cross-validation; it needs the
conjugate Hessian and therefore only supports the smooth map kinds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError, SizeError, UnsupportedOperationError
from .mirror_maps import ProjectionMap
from .problems import ConsensusProblem, ConstrainedProblem, MonotropicProblem
from .smoothing import MuSchedule


@dataclass(frozen=True)
class SystemParams:
    alpha: float
    beta: float = 1.0
    t0: float = 1.0
    mu: MuSchedule | None = None

    def __post_init__(self):
        if not self.alpha >= 2:
            raise ParameterError(f"alpha must be >= 2, got {self.alpha}")
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not self.t0 > 0:
            raise ParameterError(f"t0 must be positive, got {self.t0}")


@dataclass(frozen=True)
class StateLayout:
    blocks: tuple  # ((name, size), ...)

    @property
    def size(self) -> int:
        return sum(s for _, s in self.blocks)

    def split(self, y: np.ndarray) -> dict:
        if y.shape[0] != self.size:
            raise SizeError(f"state has dim {y.shape[0]}, layout needs {self.size}")
        out, pos = {}, 0
        for name, s in self.blocks:
            out[name] = y[pos:pos + s]
            pos += s
        return out

    def pack(self, **parts) -> np.ndarray:
        return np.concatenate([np.asarray(parts[name], dtype=float) for name, _ in self.blocks])


@dataclass(frozen=True)
class VectorField:
    kind: str
    rhs: object  # callable (t, y) -> dy
    layout: StateLayout
    problem: object
    params: SystemParams
    initial_state: np.ndarray = field(repr=False, default=None)


def _check_time(t: float):
    if t <= 0:
        raise DomainError(f"the dynamics are defined for t > 0, got t = {t}")


def _require_smooth_objective(problem, name):
    if getattr(problem, "is_smoothed", False):
        raise ParameterError(f"{name} needs a smooth objective; use the smoothed system instead")


def _require_smoothed(problem, params, name):
    if not getattr(problem, "is_smoothed", False):
        raise ParameterError(f"{name} needs a smoothed objective")
    if params.mu is None:
        raise ParameterError(f"{name} needs a mu schedule in SystemParams")
    if params.mu.alpha < params.alpha:
        raise ParameterError(
            f"mu schedule must decay at least as fast as t^(-2 alpha): "
            f"schedule alpha {params.mu.alpha} < system alpha {params.alpha}"
        )


def _initial_dual(mirror) -> np.ndarray:
    """Default u0 per map kind, paired with x0 = grad_conj(u0).

    euclidean / simplex_entropy / projection: u0 = 0;
    neg_entropy: u0 = 1 + ln(x0) at the feasible x0 = exp(-4) (so u0 = -3);
    itakura_saito: u0 = -1/x0 at x0 = 1 (so u0 = -1).

    The small entropy start matters: orthant coordinates that should vanish
    decay only like t^(-alpha) through the averaging step, with a constant
    proportional to their starting value.
    """
    kind = mirror.kind
    if kind == "neg_entropy":
        return np.full(mirror.dim, -3.0)
    if kind == "itakura_saito":
        return -np.ones(mirror.dim)
    return np.zeros(mirror.dim)


# --------------------------------------------------------------------------
# centralized first-order flows
# --------------------------------------------------------------------------

def _centralized_field(problem: ConstrainedProblem, params: SystemParams, kind: str,
                       smoothed: bool) -> VectorField:
    a, b = problem.a, problem.b
    mirror = problem.mirror
    n, m = problem.dim, problem.n_constraints
    alpha, beta = params.alpha, params.beta
    layout = StateLayout((("x", n), ("u", n), ("lam", m), ("v", m)))
    mu = params.mu

    def rhs(t, y):
        _check_time(t)
        s = layout.split(y)
        x, u, lam, v = s["x"], s["u"], s["lam"], s["v"]
        gx = mirror.grad_conjugate(u)
        r = a @ x - b
        grad = problem.grad(x, mu.mu_at(t)) if smoothed else problem.grad(x)
        dx = (alpha / t) * (gx - x)
        du = -(t / alpha) * (grad + beta * (a.T @ r) + a.T @ v)
        dlam = (alpha / t) * (v - lam)
        dv = (t / alpha) * (a @ gx - b)
        return layout.pack(x=dx, u=du, lam=dlam, v=dv)

    u0 = _initial_dual(mirror)
    y0 = layout.pack(x=mirror.grad_conjugate(u0), u=u0, lam=np.zeros(m), v=np.zeros(m))
    return VectorField(kind, rhs, layout, problem, params, y0)


def apdmd_field(problem: ConstrainedProblem, params: SystemParams) -> VectorField:
    _require_smooth_objective(problem, "apdmd")
    return _centralized_field(problem, params, "apdmd", smoothed=False)


def apdpd_field(problem: ConstrainedProblem, params: SystemParams) -> VectorField:
    """The projection specialization: grad_conj is the Euclidean projection."""
    if not isinstance(problem.mirror, ProjectionMap):
        raise ParameterError("apdpd requires a projection mirror map")
    _require_smooth_objective(problem, "apdpd")
    return _centralized_field(problem, params, "apdpd", smoothed=False)


def sapdmd_field(problem: ConstrainedProblem, params: SystemParams) -> VectorField:
    _require_smoothed(problem, params, "sapdmd")
    return _centralized_field(problem, params, "sapdmd", smoothed=True)


def apdmd_second_order_field(problem: ConstrainedProblem, params: SystemParams) -> VectorField:
    """Equivalent second-order form on (x, dx, lam, dlam), for cross-checks.

    d2x   + (alpha+1)/t dx + H(w) (grad f(x) + beta A^T(Ax-b) + A^T(lam + t/alpha dlam)) = 0
    d2lam + (alpha+1)/t dlam - (A w - b) = 0,  where w = x + (t/alpha) dx
    and H(w) is the conjugate Hessian evaluated at grad_psi(w).
    """
    _require_smooth_objective(problem, "second-order form")
    mirror = problem.mirror
    if not mirror.smooth:
        raise UnsupportedOperationError("second-order form needs a smooth mirror map")
    a, b = problem.a, problem.b
    n, m = problem.dim, problem.n_constraints
    alpha, beta = params.alpha, params.beta
    layout = StateLayout((("x", n), ("dx", n), ("lam", m), ("dlam", m)))

    def rhs(t, y):
        _check_time(t)
        s = layout.split(y)
        x, dx, lam, dlam = s["x"], s["dx"], s["lam"], s["dlam"]
        w = x + (t / alpha) * dx
        h = mirror.hessian_conjugate(mirror.grad_psi(w))
        g = problem.grad(x) + beta * (a.T @ (a @ x - b)) + a.T @ (lam + (t / alpha) * dlam)
        ddx = -((alpha + 1.0) / t) * dx - h @ g
        ddlam = -((alpha + 1.0) / t) * dlam + a @ w - b
        return layout.pack(x=dx, dx=ddx, lam=dlam, dlam=ddlam)

    u0 = _initial_dual(mirror)
    y0 = layout.pack(x=mirror.grad_conjugate(u0), dx=np.zeros(n),
                     lam=np.zeros(m), dlam=np.zeros(m))
    return VectorField("apdmd2", rhs, layout, problem, params, y0)


# --------------------------------------------------------------------------
# distributed consensus flows
# --------------------------------------------------------------------------

def _consensus_field(problem: ConsensusProblem, params: SystemParams, kind: str,
                     smoothed: bool) -> VectorField:
    lap = problem.lifted
    n = problem.dim
    alpha, beta = params.alpha, params.beta
    layout = StateLayout((("x", n), ("u", n), ("lam", n), ("v", n)))
    mu = params.mu

    def rhs(t, y):
        _check_time(t)
        x, u, lam, v = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
        gx = problem.map_stacked(u)
        grad = problem.grad_stacked(x, mu.mu_at(t)) if smoothed else problem.grad_stacked(x)
        out = np.empty_like(y)
        out[:n] = (alpha / t) * (gx - x)
        out[n:2 * n] = -(t / alpha) * (grad + lap.apply(beta * x + v))
        out[2 * n:3 * n] = (alpha / t) * (v - lam)
        out[3 * n:] = (t / alpha) * lap.apply(gx)
        return out

    u0 = np.concatenate([_initial_dual(m) for m in problem.mirrors])
    y0 = layout.pack(x=problem.map_stacked(u0), u=u0, lam=np.zeros(n), v=np.zeros(n))
    return VectorField(kind, rhs, layout, problem, params, y0)


def adpdmd_field(problem: ConsensusProblem, params: SystemParams) -> VectorField:
    _require_smooth_objective(problem, "adpdmd")
    return _consensus_field(problem, params, "adpdmd", smoothed=False)


def sadpdmd_field(problem: ConsensusProblem, params: SystemParams) -> VectorField:
    _require_smoothed(problem, params, "sadpdmd")
    return _consensus_field(problem, params, "sadpdmd", smoothed=True)


# --------------------------------------------------------------------------
# distributed monotropic flows
# --------------------------------------------------------------------------

def _demo_field(problem: MonotropicProblem, params: SystemParams, kind: str,
                smoothed: bool) -> VectorField:
    if abs(params.beta - 1.0) > 0:
        raise ParameterError(f"{kind} is analyzed with beta = 1; got beta = {params.beta}")
    a_bar, d = problem.a_bar, problem.d
    lap = problem.lifted
    n, q = problem.dim, problem.multiplier_dim
    alpha = params.alpha
    layout = StateLayout((("x", n), ("u", n), ("lam", q), ("v", q), ("y", q), ("z", q)))
    mu = params.mu
    o1, o2, o3, o4, o5 = n, 2 * n, 2 * n + q, 2 * n + 2 * q, 2 * n + 3 * q

    def rhs(t, y):
        _check_time(t)
        x, u = y[:o1], y[o1:o2]
        lam, v, yv, z = y[o2:o3], y[o3:o4], y[o4:o5], y[o5:]
        gx = problem.map_stacked(u)
        grad = problem.grad_stacked(x, mu.mu_at(t)) if smoothed else problem.grad_stacked(x)
        out = np.empty_like(y)
        out[:o1] = (alpha / t) * (gx - x)
        out[o1:o2] = -(t / alpha) * (grad + a_bar.T @ v)
        out[o2:o3] = (alpha / t) * (v - lam)
        out[o3:o4] = (t / alpha) * (a_bar @ gx - d + lap.apply(z - lam))
        out[o4:o5] = (alpha / t) * (z - yv)
        out[o5:] = -(t / alpha) * lap.apply(v)
        return out

    u0 = np.concatenate([_initial_dual(m) for m in problem.mirrors])
    x0 = problem.map_stacked(u0)
    # start the auxiliary variable at the least-squares solution of
    # L y = d - A x0, which removes the representable part of the initial
    # resource residual (computable from problem data alone)
    aux0, *_ = np.linalg.lstsq(lap.matrix, d - a_bar @ x0, rcond=None)
    y0 = layout.pack(x=x0, u=u0, lam=np.zeros(q),
                     v=np.zeros(q), y=aux0, z=aux0)
    return VectorField(kind, rhs, layout, problem, params, y0)


def admd_field(problem: MonotropicProblem, params: SystemParams) -> VectorField:
    _require_smooth_objective(problem, "admd")
    return _demo_field(problem, params, "admd", smoothed=False)


def sadmd_field(problem: MonotropicProblem, params: SystemParams) -> VectorField:
    _require_smoothed(problem, params, "sadmd")
    return _demo_field(problem, params, "sadmd", smoothed=True)


SYSTEMS = {
    "apdmd": (apdmd_field, ConstrainedProblem, False),
    "apdpd": (apdpd_field, ConstrainedProblem, False),
    "sapdmd": (sapdmd_field, ConstrainedProblem, True),
    "adpdmd": (adpdmd_field, ConsensusProblem, False),
    "sadpdmd": (sadpdmd_field, ConsensusProblem, True),
    "admd": (admd_field, MonotropicProblem, False),
    "sadmd": (sadmd_field, MonotropicProblem, True),
}


def build_field(system: str, problem, params: SystemParams) -> VectorField:
    if system not in SYSTEMS:
        raise ParameterError(f"unknown system {system!r}; choose from {sorted(SYSTEMS)}")
    builder, ptype, needs_smoothing = SYSTEMS[system]
    if not isinstance(problem, ptype):
        raise ParameterError(
            f"system {system!r} expects a {ptype.__name__}, got {type(problem).__name__}"
        )
    return builder(problem, params)
