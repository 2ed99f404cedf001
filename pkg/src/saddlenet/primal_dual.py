"""Primal-dual splitting methods built around a twice-reflected forward term.

The central iteration (``pdtr``) solves the structured inclusion

    0 in A(x) + B(x) + K' C(K x)

with ``A`` maximally monotone (given through its resolvent), ``B`` monotone
Lipschitz (evaluated explicitly, no cocoercivity needed), ``K`` a linear map
and ``C`` accessed through the resolvent of ``sigma * C^{-1}``:

    x+ = J_{tau A}(x - tau K' y - 2 tau B(x) + tau B(x-))
    y+ = J_{sigma C^{-1}}(y + sigma K (2 x+ - x))

admissible whenever ``2 tau L + tau sigma ||K||^2 < 1``.  The reflected
history starts with ``x- = x0``.  Setting ``B = 0`` recovers PDHG; ``K = 0``
decouples into a reflected forward-backward step in ``x`` and proximal-point
steps in ``y``; ``K = Id`` matches a three-line reflected Douglas-Rachford
iteration with ``gamma = 1/sigma``.  The Condat-Vu baseline (single forward
evaluation, no reflection) is included for comparisons; it requires a
cocoercive ``B`` and is expected to fail on skew couplings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import estimate_operator_norm
from .trace import ConvergenceTrace, StoppingRule, TraceRow

__all__ = [
    "ForbState",
    "MMetric",
    "PdtrState",
    "PrimalDualProblem",
    "StepSizeError",
    "StepSizes",
    "balanced_step_sizes",
    "condat_vu_run",
    "condat_vu_step",
    "forb_run",
    "forb_step",
    "frdr_step",
    "m_metric",
    "metric_lipschitz_bound",
    "metric_lipschitz_ratio",
    "pdhg_run",
    "pdhg_step",
    "pdtr_run",
    "pdtr_step",
    "primal_resolvent_from_dual",
]


class StepSizeError(ValueError):
    """Raised when step sizes violate an admissibility condition."""


@dataclass(frozen=True)
class StepSizes:
    """Primal step ``tau`` and dual step ``sigma``."""

    tau: float
    sigma: float

    def __post_init__(self):
        if self.tau <= 0 or self.sigma <= 0:
            raise StepSizeError("step sizes must be positive")

    def admissible(self, lipschitz, k_norm):
        """Strict admissibility ``2 tau L + tau sigma ||K||^2 < 1``."""
        return 2.0 * self.tau * lipschitz + self.tau * self.sigma * k_norm**2 < 1.0


def balanced_step_sizes(lipschitz, k_norm, margin=0.9):
    """Equal steps ``tau = sigma = s`` with ``2 s L + s^2 ||K||^2 = margin``.

    The margin keeps the iteration strictly inside the admissible region;
    with neither a forward term nor a linear coupling any step works and
    ``s = 1`` is returned.
    """
    if not 0.0 < margin < 1.0:
        raise ValueError("margin must lie in (0, 1)")
    lip = float(lipschitz)
    kk = float(k_norm) ** 2
    if lip < 0 or kk < 0:
        raise ValueError("constants must be nonnegative")
    if kk == 0.0:
        s = margin / (2.0 * lip) if lip > 0 else 1.0
    else:
        s = (-lip + math.sqrt(lip * lip + margin * kk)) / kk
    return StepSizes(s, s)


@dataclass(frozen=True, eq=False)
class PrimalDualProblem:
    """Problem data for the primal-dual methods.

    ``resolvent`` evaluates ``J_{tau A}``, ``dual_resolvent`` evaluates
    ``J_{sigma C^{-1}}`` (identity when the dual has no regularizer), and
    ``k`` is the dense coupling matrix of shape (dual_dim, primal_dim); use
    an all-zero matrix for uncoupled problems.  ``k_norm`` is filled in by
    power iteration when not supplied.
    """

    resolvent: object
    forward: object
    dual_resolvent: object
    k: np.ndarray
    k_norm: float = None

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.k, dtype=float))
        object.__setattr__(self, "k", k)
        if self.k_norm is None:
            norm = estimate_operator_norm(k) if np.any(k) else 0.0
            object.__setattr__(self, "k_norm", norm)

    @property
    def primal_dim(self):
        return self.k.shape[1]

    @property
    def dual_dim(self):
        return self.k.shape[0]

    @property
    def lipschitz(self):
        return self.forward.lipschitz


@dataclass(frozen=True, eq=False)
class PdtrState:
    """Iterate pair plus the cached forward value at the previous point."""

    x: np.ndarray
    y: np.ndarray
    prev_x: np.ndarray
    prev_bx: np.ndarray

    @classmethod
    def start(cls, problem, x0, y0):
        """History convention: the pre-initial point coincides with ``x0``."""
        x0 = np.asarray(x0, dtype=float)
        y0 = np.asarray(y0, dtype=float)
        return cls(x0, y0, x0, problem.forward(x0))


def _dual_update(problem, steps, x_old, y, x_new):
    # shared by every method below so reductions agree bit for bit
    return problem.dual_resolvent(
        steps.sigma, y + steps.sigma * (problem.k @ (2.0 * x_new - x_old))
    )


def pdtr_step(problem, state, steps):
    """One twice-reflected primal-dual step."""
    bx = problem.forward(state.x)
    kty = problem.k.T @ state.y
    x_new = problem.resolvent(
        steps.tau,
        state.x - steps.tau * kty - (2.0 * steps.tau) * bx + steps.tau * state.prev_bx,
    )
    y_new = _dual_update(problem, steps, state.x, state.y, x_new)
    return PdtrState(x_new, y_new, state.x, bx)


def pdhg_step(problem, state, steps):
    """Plain PDHG step (no forward term); the ``B = 0`` reduction of pdtr."""
    bx = problem.forward(state.x)
    kty = problem.k.T @ state.y
    x_new = problem.resolvent(steps.tau, state.x - steps.tau * kty)
    y_new = _dual_update(problem, steps, state.x, state.y, x_new)
    return PdtrState(x_new, y_new, state.x, bx)


def condat_vu_step(problem, state, steps):
    """Forward-backward primal-dual step with a single unreflected B evaluation.

    Convergence theory needs a cocoercive ``B``; for merely monotone (for
    example skew) forward terms this iteration can diverge, which is exactly
    what the comparison tooling demonstrates.
    """
    bx = problem.forward(state.x)
    kty = problem.k.T @ state.y
    x_new = problem.resolvent(steps.tau, state.x - steps.tau * kty - steps.tau * bx)
    y_new = _dual_update(problem, steps, state.x, state.y, x_new)
    return PdtrState(x_new, y_new, state.x, bx)


def primal_resolvent_from_dual(dual_resolvent, gamma, point):
    """Evaluate ``J_{gamma C}`` given the resolvent of ``sigma C^{-1}``.

    Uses the exchange identity ``J_{gamma C}(w) = w - gamma J_{(1/gamma) C^{-1}}(w / gamma)``.
    """
    point = np.asarray(point, dtype=float)
    return point - gamma * dual_resolvent(1.0 / gamma, point / gamma)


def frdr_step(problem, state, gamma, tau):
    """Reflected Douglas-Rachford step; requires ``K = Id``.

    Equivalent to :func:`pdtr_step` with ``sigma = 1/gamma`` in exact
    arithmetic; the admissible range is ``tau < gamma / (1 + 2 gamma L)``.
    """
    k = problem.k
    if k.shape[0] != k.shape[1] or not np.array_equal(k, np.eye(k.shape[0])):
        raise ValueError("this reduction needs the coupling matrix to be the identity")
    bx = problem.forward(state.x)
    x_new = problem.resolvent(
        tau, state.x - tau * state.y - (2.0 * tau) * bx + tau * state.prev_bx
    )
    shift = 2.0 * x_new - state.x
    u_new = primal_resolvent_from_dual(problem.dual_resolvent, gamma, shift + gamma * state.y)
    y_new = state.y + (shift - u_new) / gamma
    return PdtrState(x_new, y_new, state.x, bx)


@dataclass(frozen=True, eq=False)
class ForbState:
    """Iterate plus cached forward value for the reflected forward-backward method."""

    x: np.ndarray
    prev_bx: np.ndarray

    @classmethod
    def start(cls, forward, x0):
        x0 = np.asarray(x0, dtype=float)
        return cls(x0, forward(x0))


def forb_step(resolvent, forward, state, tau):
    """Reflected forward-backward step ``x+ = J(x - 2 tau B(x) + tau B(x-))``."""
    bx = forward(state.x)
    x_new = resolvent(tau, state.x - (2.0 * tau) * bx + tau * state.prev_bx)
    return ForbState(x_new, bx)


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _sup_diff(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b))
    return float(d.max(initial=0.0))


def _iterate(step, state, stop, residual, observe=None):
    trace = ConvergenceTrace()
    converged = math.isinf(stop.tol)
    it = 0
    while not converged and it < stop.max_iters:
        new = step(state)
        res = residual(state, new)
        it += 1
        extras = observe(new) if observe is not None else {}
        trace.append(TraceRow(iteration=it, fp_residual=res, **extras))
        state = new
        converged = res <= stop.tol
    trace.converged = converged
    return state, trace


def _pair_residual(old, new):
    return max(_sup_diff(old.x, new.x), _sup_diff(old.y, new.y))


def _as_pd_state(problem, init):
    if isinstance(init, PdtrState):
        return init
    x0, y0 = init
    return PdtrState.start(problem, x0, y0)


def pdtr_run(problem, init, steps, stop=None, unsafe=False, observe=None):
    """Iterate :func:`pdtr_step` until the sup-norm residual meets the rule.

    ``init`` is a ``(x0, y0)`` pair or a prepared state.  Inadmissible steps
    raise unless ``unsafe=True`` (useful only for divergence demos).
    Returns the final state and the :class:`ConvergenceTrace`.
    """
    stop = stop or StoppingRule()
    if not unsafe and not steps.admissible(problem.lipschitz, problem.k_norm):
        raise StepSizeError(
            "steps violate 2*tau*L + tau*sigma*||K||^2 < 1 "
            f"(tau={steps.tau!r}, sigma={steps.sigma!r}, L={problem.lipschitz!r}, "
            f"||K||={problem.k_norm!r})"
        )
    state = _as_pd_state(problem, init)
    return _iterate(lambda s: pdtr_step(problem, s, steps), state, stop, _pair_residual, observe)


def pdhg_run(problem, init, steps, stop=None, unsafe=False, observe=None):
    """Iterate :func:`pdhg_step`; requires ``tau sigma ||K||^2 < 1``."""
    stop = stop or StoppingRule()
    if not unsafe and not steps.tau * steps.sigma * problem.k_norm**2 < 1.0:
        raise StepSizeError("steps violate tau*sigma*||K||^2 < 1")
    state = _as_pd_state(problem, init)
    return _iterate(lambda s: pdhg_step(problem, s, steps), state, stop, _pair_residual, observe)


def condat_vu_run(problem, init, steps, stop=None, observe=None):
    """Iterate :func:`condat_vu_step`.

    No admissibility gate: the step rule of this baseline depends on a
    cocoercivity constant the caller may not have, and running it outside
    its theory on purpose is a supported comparison scenario.
    """
    stop = stop or StoppingRule()
    state = _as_pd_state(problem, init)
    return _iterate(lambda s: condat_vu_step(problem, s, steps), state, stop, _pair_residual, observe)


def forb_run(resolvent, forward, x0, tau, stop=None, observe=None):
    """Reflected forward-backward iteration; needs ``tau < 1 / (2 L)``."""
    stop = stop or StoppingRule()
    if forward.lipschitz > 0 and not tau < 1.0 / (2.0 * forward.lipschitz):
        raise StepSizeError(
            f"tau={tau!r} must be below 1/(2L)={1.0 / (2.0 * forward.lipschitz)!r}"
        )
    state = ForbState.start(forward, x0)
    return _iterate(
        lambda s: forb_step(resolvent, forward, s, tau),
        state,
        stop,
        lambda old, new: _sup_diff(old.x, new.x),
        observe,
    )


# ---------------------------------------------------------------------------
# the step-size metric
# ---------------------------------------------------------------------------

class MMetric:
    """The block metric ``[[I/tau, -K'], [-K, I/sigma]]`` used by the analysis.

    Positive definite exactly when ``tau sigma ||K||^2 < 1``; construction
    fails otherwise.  Vectors are ``(x, y)`` pairs.
    """

    def __init__(self, steps, k, k_norm=None):
        k = np.atleast_2d(np.asarray(k, dtype=float))
        if k_norm is None:
            k_norm = estimate_operator_norm(k) if np.any(k) else 0.0
        if not steps.tau * steps.sigma * k_norm**2 < 1.0:
            raise StepSizeError("metric is not positive definite: tau*sigma*||K||^2 >= 1")
        self.steps = steps
        self.k = k
        self.k_norm = float(k_norm)
        q, p = k.shape
        self.dense = np.block(
            [
                [np.eye(p) / steps.tau, -k.T],
                [-k, np.eye(q) / steps.sigma],
            ]
        )

    def inner(self, z1, z2):
        v1 = np.concatenate([np.asarray(z1[0], dtype=float), np.asarray(z1[1], dtype=float)])
        v2 = np.concatenate([np.asarray(z2[0], dtype=float), np.asarray(z2[1], dtype=float)])
        return float(v1 @ self.dense @ v2)

    def norm(self, z):
        return math.sqrt(max(self.inner(z, z), 0.0))


def m_metric(steps, k, k_norm=None):
    """Build the :class:`MMetric` for the given steps and coupling matrix."""
    return MMetric(steps, k, k_norm)


def metric_lipschitz_bound(steps, lipschitz, k_norm):
    """Lipschitz constant of the metric-scaled forward map: ``tau L / (1 - tau sigma ||K||^2)``."""
    denom = 1.0 - steps.tau * steps.sigma * k_norm**2
    if denom <= 0:
        raise StepSizeError("bound undefined: tau*sigma*||K||^2 >= 1")
    return steps.tau * lipschitz / denom


def metric_lipschitz_ratio(problem, steps, samples=10000, seed=0):
    """Observed M-metric Lipschitz ratio of the metric-scaled forward map.

    Samples standard normal pairs ``z, z~`` and returns the largest value of
    ``||M^{-1} F(z) - M^{-1} F(z~)||_M / ||z - z~||_M`` where
    ``F(x, y) = (B(x), 0)``.  The analysis bounds this by
    :func:`metric_lipschitz_bound`; the numerator uses
    ``||M^{-1} r||_M^2 = r' M^{-1} r``.

    A handful of the sampled pairs differ in the primal block only, so on
    instances where those directions are extremal (``K = 0`` with scaled
    identity ``B``) the returned ratio attains the bound instead of merely
    approaching it.
    """
    metric = m_metric(steps, problem.k, problem.k_norm)
    p, q = problem.primal_dim, problem.dual_dim
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, p))
    xb = rng.standard_normal((samples, p))
    y = rng.standard_normal((samples, q))
    yb = rng.standard_normal((samples, q))
    axis = min(8, samples)
    yb[:axis] = y[:axis]

    if problem.forward.jacobian is not None:
        db = (x - xb) @ problem.forward.jacobian.T
    else:
        db = np.stack([problem.forward(x[s]) - problem.forward(xb[s]) for s in range(samples)])

    r = np.concatenate([db, np.zeros((samples, q))], axis=1)
    num2 = np.einsum("sj,sj->s", r, np.linalg.solve(metric.dense, r.T).T)
    dz = np.concatenate([x - xb, y - yb], axis=1)
    den2 = np.einsum("sj,sj->s", dz, dz @ metric.dense)
    ok = den2 > 0
    if not np.any(ok):
        return 0.0
    return float(np.sqrt(np.max(np.maximum(num2[ok], 0.0) / den2[ok])))
