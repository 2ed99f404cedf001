"""Decentralized solver for convex-concave min-max problems.

``n`` agents hold private convex ``f_i``, ``g_i`` (through proxes) and a
smooth coupling ``phi_i``; the network solves

    min_x max_y  sum_i  f_i(x) + phi_i(x, y) - g_i(y)

at consensus.  Each block mixes over its own matrix (``W1`` for the
minimization variables, ``W2`` for the maximization variables; they may
live on different graphs with the same agents).  Per round and agent the
iteration costs one gradient of ``phi_i``, one prox of each of ``f_i`` and
``g_i``, and one neighbor exchange per block:

    vx^k = 2 grad_x phi(x^k, y^k) - grad_x phi(x^{k-1}, y^{k-1})
    ux^{k+1} = W1 x^k + ux^k - (x^{k-1} + W1 x^{k-1}) / 2 - tau (vx^k - vx^{k-1})
    x^{k+1} = prox_{tau f}(ux^{k+1})

and the mirrored y-block with ``vy = -2 grad_y phi + grad_y phi(prev)`` and
``prox_{tau g}``.  Steps must satisfy
``0 < tau < (1 + min(lambda_min(W1), lambda_min(W2))) / (4 L)``.

Stacking ``z_i = (x_i, y_i)`` with the blockwise mixing and the monotone map
``(grad_x phi_i, -grad_y phi_i)`` turns this into the decentralized
inclusion iteration; :func:`stack_agents` builds exactly that reduction and
the test-suite holds the two paths to agreement at machine precision.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .inclusion import AgentInclusion, consensus_gap
from .operators import combine_couplings, combine_proxes, product_resolvent, saddle_forward
from .primal_dual import ForbState, StepSizeError, forb_step
from .trace import ConvergenceTrace, StoppingRule, TraceRow

__all__ = [
    "AgentSaddleProblem",
    "BlockMixing",
    "MinMaxState",
    "minmax_init",
    "minmax_run",
    "minmax_step",
    "product_space_problem",
    "saddle_residual",
    "stack_agents",
    "stacked_block_mixing",
    "stepsize_bound_pair",
    "sum_saddle_problem",
]


@dataclass(frozen=True, eq=False)
class AgentSaddleProblem:
    """One agent's private share of the min-max problem."""

    prox_min: object
    prox_max: object
    coupling: object

    @property
    def p(self):
        return self.coupling.p

    @property
    def d(self):
        return self.coupling.d

    @property
    def lipschitz(self):
        return self.coupling.lipschitz


@dataclass(frozen=True, eq=False)
class BlockMixing:
    """Blockwise mixing: ``W1`` on the first ``split`` columns, ``W2`` after.

    ``split`` is only needed when the pair is used as a single operator on
    stacked ``(x, y)`` rows; the min-max iteration itself applies the two
    matrices directly.
    """

    w1: object
    w2: object
    split: int | None = None

    def __post_init__(self):
        if self.w1.n != self.w2.n:
            raise ValueError("both mixing matrices must have the same number of agents")

    @property
    def n(self):
        return self.w1.n

    @property
    def lambda_min(self):
        return min(self.w1.lambda_min, self.w2.lambda_min)

    def blocks(self):
        if self.split is None:
            raise ValueError("split is not set")
        total = None  # upper bound checked by apply()
        return ((self.w1, 0, self.split), (self.w2, self.split, total))

    def apply(self, z):
        if self.split is None:
            raise ValueError("split must be set to apply a block mixing to stacked rows")
        z = np.asarray(z, dtype=float)
        left = self.w1.w @ np.ascontiguousarray(z[:, : self.split])
        right = self.w2.w @ np.ascontiguousarray(z[:, self.split :])
        return np.concatenate([left, right], axis=1)


def stepsize_bound_pair(mixing_pair, lipschitz):
    """Admissible supremum ``(1 + min lambda_min) / (4 L)`` for two mixings."""
    if lipschitz <= 0:
        raise ValueError("lipschitz must be positive; declare an upper bound")
    return (1.0 + mixing_pair.lambda_min) / (4.0 * lipschitz)


@dataclass(frozen=True, eq=False)
class MinMaxState:
    """Stacked per-agent state; ``grad_x``/``grad_y`` cache the coupling
    gradients at the current ``(x, y)`` so a step needs one fresh gradient."""

    ux: np.ndarray
    uy: np.ndarray
    x: np.ndarray
    y: np.ndarray
    prev_x: np.ndarray
    prev_y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    prev_vx: np.ndarray
    prev_vy: np.ndarray
    grad_x: np.ndarray
    grad_y: np.ndarray


def _grad_rows(problems, x, y):
    gx = np.stack([p.coupling.grad_x(x[i], y[i]) for i, p in enumerate(problems)])
    gy = np.stack([p.coupling.grad_y(x[i], y[i]) for i, p in enumerate(problems)])
    return gx, gy


def _prox_rows(problems, which, tau, u):
    if which == "min":
        return np.stack([p.prox_min(tau, u[i]) for i, p in enumerate(problems)])
    return np.stack([p.prox_max(tau, u[i]) for i, p in enumerate(problems)])


def _check_minmax(problems, mixing, x0, y0, tau):
    n = len(problems)
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if mixing.n != n:
        raise ValueError(f"mixing operates on {mixing.n} agents, got {n}")
    p, d = problems[0].p, problems[0].d
    for prob in problems:
        if (prob.p, prob.d) != (p, d):
            raise ValueError("all agents must share the same (p, d)")
    if x0.shape != (n, p) or y0.shape != (n, d):
        raise ValueError(f"expected x0 {(n, p)} and y0 {(n, d)}, got {x0.shape} and {y0.shape}")
    lip = max(prob.lipschitz for prob in problems)
    bound = stepsize_bound_pair(mixing, lip if lip > 0 else _declared(problems))
    if not 0.0 < tau < bound:
        raise StepSizeError(
            f"step size exceeds (1+lambda_min)/(4L): tau={tau!r} not in (0, {bound!r})"
        )
    return x0, y0


def _declared(problems):
    # all-zero couplings carry no curvature; any positive declared bound works
    return 1.0


def minmax_init(problems, mixing, x0, y0, tau):
    """Bootstrap from per-agent rows ``x0``, ``y0`` (no communication needed)."""
    x0, y0 = _check_minmax(problems, mixing, x0, y0, tau)
    gx0, gy0 = _grad_rows(problems, x0, y0)
    vx0 = gx0
    vy0 = -gy0
    ux1 = x0 - tau * vx0
    uy1 = y0 - tau * vy0
    x1 = _prox_rows(problems, "min", tau, ux1)
    y1 = _prox_rows(problems, "max", tau, uy1)
    gx1, gy1 = _grad_rows(problems, x1, y1)
    return MinMaxState(
        ux=ux1, uy=uy1, x=x1, y=y1, prev_x=x0, prev_y=y0,
        vx=2.0 * gx1 - gx0, vy=-2.0 * gy1 + gy0, prev_vx=vx0, prev_vy=vy0,
        grad_x=gx1, grad_y=gy1,
    )


def minmax_step(problems, mixing, state, tau):
    """Advance both blocks by one communication round."""
    w1, w2 = mixing.w1, mixing.w2
    ux_new = (w1.apply(state.x) + state.ux
              - 0.5 * (state.prev_x + w1.apply(state.prev_x))
              - tau * (state.vx - state.prev_vx))
    uy_new = (w2.apply(state.y) + state.uy
              - 0.5 * (state.prev_y + w2.apply(state.prev_y))
              - tau * (state.vy - state.prev_vy))
    x_new = _prox_rows(problems, "min", tau, ux_new)
    y_new = _prox_rows(problems, "max", tau, uy_new)
    gx_new, gy_new = _grad_rows(problems, x_new, y_new)
    return MinMaxState(
        ux=ux_new, uy=uy_new, x=x_new, y=y_new, prev_x=state.x, prev_y=state.y,
        vx=2.0 * gx_new - state.grad_x, vy=-2.0 * gy_new + state.grad_y,
        prev_vx=state.vx, prev_vy=state.vy,
        grad_x=gx_new, grad_y=gy_new,
    )


def minmax_run(problems, mixing, x0, y0, tau, stop=None, reference=None):
    """Run to the stopping rule and return ``(x*, y*, trace)``.

    ``x*``/``y*`` are the row averages of the final stacked iterate (the
    consensus point).  ``reference`` is an optional ``(x_ref, y_ref)`` pair
    for the distance column.  The trace also carries per-block consensus
    gaps; the Frobenius residual covers both blocks.
    """
    stop = stop or StoppingRule()
    trace = ConvergenceTrace()
    state = minmax_init(problems, mixing, x0, y0, tau)

    def dist(x, y):
        if reference is None:
            return None
        dx = x.mean(axis=0) - reference[0]
        dy = y.mean(axis=0) - reference[1]
        return float(np.sqrt(np.linalg.norm(dx) ** 2 + np.linalg.norm(dy) ** 2))

    def res_of(new, old_x, old_y):
        return float(np.sqrt(np.linalg.norm(new.x - old_x) ** 2
                             + np.linalg.norm(new.y - old_y) ** 2))

    res = res_of(state, state.prev_x, state.prev_y)
    trace.append(TraceRow(iteration=1, fp_residual=res,
                          consensus_gap_x=consensus_gap(state.x),
                          consensus_gap_y=consensus_gap(state.y),
                          distance_to_reference=dist(state.x, state.y)))
    it = 1
    converged = res <= stop.tol
    while not converged and it < stop.max_iters:
        new = minmax_step(problems, mixing, state, tau)
        res = res_of(new, state.x, state.y)
        it += 1
        trace.append(TraceRow(iteration=it, fp_residual=res,
                              consensus_gap_x=consensus_gap(new.x),
                              consensus_gap_y=consensus_gap(new.y),
                              distance_to_reference=dist(new.x, new.y)))
        state = new
        converged = res <= stop.tol
    trace.converged = converged
    return state.x.mean(axis=0), state.y.mean(axis=0), trace


# ---------------------------------------------------------------------------
# reduction to the stacked inclusion
# ---------------------------------------------------------------------------

def stack_agents(problems, lipschitz=None):
    """Per-agent inclusion data on ``z_i = (x_i, y_i)``: blockwise prox and
    the monotone coupling map.  Running the decentralized inclusion on these
    agents with :func:`stacked_block_mixing` reproduces the min-max method.

    ``lipschitz`` replaces the declared constant of every stacked forward
    map (needed when the couplings have vanishing curvature and the step
    gate wants an explicit upper bound instead).
    """
    out = []
    for prob in problems:
        forward = saddle_forward(prob.coupling)
        if lipschitz is not None:
            forward = dataclasses.replace(forward, lipschitz=float(lipschitz))
        out.append(AgentInclusion(
            resolvent=product_resolvent(prob.prox_min, prob.prox_max, split=prob.p),
            forward=forward,
        ))
    return out


def stacked_block_mixing(mixing, problems):
    """The same mixing pair viewed as one operator on stacked rows."""
    return BlockMixing(mixing.w1, mixing.w2, split=problems[0].p)


def stack_state(state):
    """Stacked-iterate view of a :class:`MinMaxState` (same memory layout)."""
    from .inclusion import StackedIterate

    return StackedIterate(
        u=np.concatenate([state.ux, state.uy], axis=1),
        x=np.concatenate([state.x, state.y], axis=1),
        prev_x=np.concatenate([state.prev_x, state.prev_y], axis=1),
        v=np.concatenate([state.vx, state.vy], axis=1),
        prev_v=np.concatenate([state.prev_vx, state.prev_vy], axis=1),
        bx=np.concatenate([state.grad_x, -state.grad_y], axis=1),
    )


def product_space_problem(problems, mixing, lipschitz=None):
    """The stacked formulation with its explicit consensus coupling matrix.

    Flattens the ``n x (p + d)`` iterate row-major and returns a
    :class:`~saddlenet.primal_dual.PrimalDualProblem` whose coupling matrix
    applies the symmetric square root of ``(I - W)/2`` blockwise (``W1`` on
    x-components, ``W2`` on y-components) and whose dual resolvent is the
    identity.  Running any of the centralized primal-dual methods on this
    problem is the un-eliminated form of the decentralized iterations; it
    is also how the comparison tooling applies those baselines to networked
    instances.  ``lipschitz`` overrides the declared constant as in
    :func:`stack_agents`.
    """
    from .inclusion import _psd_sqrt
    from .operators import Prox
    from .primal_dual import PrimalDualProblem

    n = len(problems)
    p, d = problems[0].p, problems[0].d
    h = p + d
    agents = stack_agents(problems, lipschitz=lipschitz)

    k1 = _psd_sqrt((np.eye(n) - mixing.w1.w) / 2.0)
    k2 = _psd_sqrt((np.eye(n) - mixing.w2.w) / 2.0)
    mask_x = np.diag(np.concatenate([np.ones(p), np.zeros(d)]))
    mask_y = np.diag(np.concatenate([np.zeros(p), np.ones(d)]))
    k = np.kron(k1, mask_x) + np.kron(k2, mask_y)
    k_norm = float(np.sqrt((1.0 - mixing.lambda_min) / 2.0))

    def res_fn(t, z):
        rows = z.reshape(n, h)
        return np.stack([agents[i].resolvent(t, rows[i]) for i in range(n)]).reshape(-1)

    def fwd_fn(z):
        rows = z.reshape(n, h)
        return np.stack([agents[i].forward(rows[i]) for i in range(n)]).reshape(-1)

    from .operators import ForwardOperator
    jac = None
    if all(a.forward.jacobian is not None for a in agents):
        jac = np.zeros((n * h, n * h))
        for i, a in enumerate(agents):
            jac[i * h : (i + 1) * h, i * h : (i + 1) * h] = a.forward.jacobian
    lip = max(a.lipschitz for a in agents)
    from .operators import zero_prox

    return PrimalDualProblem(
        resolvent=Prox(res_fn, kind="stacked", dim=n * h),
        forward=ForwardOperator(fwd_fn, lip, jac),
        dual_resolvent=zero_prox(),
        k=k,
        k_norm=k_norm,
    )


# ---------------------------------------------------------------------------
# centralized reference helpers
# ---------------------------------------------------------------------------

def sum_saddle_problem(problems):
    """Single-agent problem with the summed objective (library kinds only)."""
    return AgentSaddleProblem(
        prox_min=combine_proxes([p.prox_min for p in problems]),
        prox_max=combine_proxes([p.prox_max for p in problems]),
        coupling=combine_couplings([p.coupling for p in problems]),
    )


def saddle_residual(problems, x, y, tau=None):
    """Fixed-point residual of one centralized reflected step at ``(x, y)``.

    Zero exactly at saddle points of the summed problem; used as a
    solution certificate for decentralized output.
    """
    summed = sum_saddle_problem(problems)
    forward = saddle_forward(summed.coupling)
    if tau is None:
        lip = max(summed.coupling.lipschitz, 1e-12)
        tau = 0.25 / lip
    resolvent = product_resolvent(summed.prox_min, summed.prox_max, split=summed.p)
    z = np.concatenate([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
    new = forb_step(resolvent, forward, ForbState.start(forward, z), tau)
    return float(np.abs(new.x - z).max(initial=0.0))
