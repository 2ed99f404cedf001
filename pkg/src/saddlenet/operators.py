"""Proximal maps, smooth couplings and forward operators.

Everything here works on 1-D float arrays.  A :class:`Prox` is a callable
``prox(tau, point)`` evaluating the resolvent of ``tau`` times a maximally
monotone operator (for the library entries, the subdifferential of a proper
convex function).  A :class:`ForwardOperator` is a plain Lipschitz map with
a declared constant, evaluated explicitly by the solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ForwardOperator",
    "Prox",
    "SmoothCoupling",
    "affine_forward",
    "bilinear_coupling",
    "box_prox",
    "combine_couplings",
    "combine_proxes",
    "estimate_operator_norm",
    "l1_prox",
    "linear_forward",
    "make_prox",
    "product_resolvent",
    "quadratic_coupling",
    "quadratic_prox",
    "saddle_forward",
    "zero_point_prox",
    "zero_prox",
]


class Prox:
    """Resolvent of a scaled maximally monotone operator.

    Calling ``prox(tau, point)`` returns the unique solution of the
    regularized inclusion; for a convex function ``g`` this is
    ``argmin_v g(v) + ||v - point||^2 / (2 tau)``.

    ``kind``/``params`` identify library members so that sums of identical
    families can be formed for centralized reference runs.  ``dim`` is the
    expected input length when the map is dimension-specific, else None.
    """

    def __init__(self, fn, kind="custom", params=None, dim=None, value=None, domain="full-space"):
        self._fn = fn
        self.kind = kind
        self.params = dict(params or {})
        self.dim = dim
        self.value = value
        self.domain = domain

    def __call__(self, tau, point):
        if tau <= 0:
            raise ValueError("tau must be positive")
        point = np.asarray(point, dtype=float)
        if self.dim is not None and point.shape != (self.dim,):
            raise ValueError(f"{self.kind} prox expects shape ({self.dim},), got {point.shape}")
        return self._fn(float(tau), point)

    def __repr__(self):
        return f"Prox(kind={self.kind!r}, params={self.params!r})"


def zero_prox():
    """Prox of the zero function: the identity."""
    return Prox(lambda t, v: v.copy(), kind="zero")


def l1_prox(weight):
    """Soft thresholding, the prox of ``weight * ||.||_1``."""
    weight = float(weight)
    if weight < 0:
        raise ValueError("l1 weight must be nonnegative")

    def fn(t, v):
        return np.sign(v) * np.maximum(np.abs(v) - t * weight, 0.0)

    return Prox(fn, kind="l1", params={"weight": weight},
                value=lambda v: weight * float(np.abs(v).sum()))


def box_prox(lo, hi):
    """Projection onto the box ``[lo, hi]`` (the step size is irrelevant)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise ValueError("box bounds must satisfy lo <= hi")
    dim = None
    if lo.ndim > 0 or hi.ndim > 0:
        dim = int(np.broadcast(lo, hi).shape[0])
    return Prox(lambda t, v: np.clip(v, lo, hi), kind="box_indicator",
                params={"lo": lo, "hi": hi}, dim=dim, domain="box")


def quadratic_prox(q_matrix, q_vec=None):
    """Prox of ``v -> v' Q v / 2 + q' v`` for symmetric PSD ``Q``.

    Evaluates by solving ``(I + tau Q) out = point - tau q``.
    """
    q_matrix = np.asarray(q_matrix, dtype=float)
    h = q_matrix.shape[0]
    if q_matrix.shape != (h, h):
        raise ValueError("Q must be square")
    if np.abs(q_matrix - q_matrix.T).max(initial=0.0) > 1e-12:
        raise ValueError("Q must be symmetric")
    if float(np.linalg.eigvalsh(q_matrix)[0]) < -1e-10:
        raise ValueError("Q must be positive semidefinite")
    q_vec = np.zeros(h) if q_vec is None else np.asarray(q_vec, dtype=float)
    if q_vec.shape != (h,):
        raise ValueError("q has the wrong length")
    eye = np.eye(h)

    def fn(t, v):
        return np.linalg.solve(eye + t * q_matrix, v - t * q_vec)

    def value(v):
        return 0.5 * float(v @ q_matrix @ v) + float(q_vec @ v)

    return Prox(fn, kind="quadratic", params={"q_matrix": q_matrix, "q_vec": q_vec},
                dim=h, value=value)


def zero_point_prox():
    """Prox of the indicator of the origin: the zero map."""
    return Prox(lambda t, v: np.zeros_like(v), kind="zero_set_indicator", domain="affine-zero")


_PROX_FACTORIES = {
    "zero": lambda **kw: zero_prox(),
    "l1": lambda weight=1.0, **kw: l1_prox(weight),
    "box_indicator": lambda lo=-1.0, hi=1.0, **kw: box_prox(lo, hi),
    "quadratic": lambda q_matrix=None, q_vec=None, **kw: quadratic_prox(q_matrix, q_vec),
    "zero_set_indicator": lambda **kw: zero_point_prox(),
}


def make_prox(kind, **params):
    """Build a library prox by kind name (see ``_PROX_FACTORIES`` keys)."""
    try:
        factory = _PROX_FACTORIES[kind]
    except KeyError:
        raise ValueError(f"unknown prox kind {kind!r}") from None
    return factory(**params)


def product_resolvent(first, second, split=None):
    """Blockwise prox on a product space: ``first`` on ``z[:split]``, ``second`` after.

    When both factors carry a ``dim`` the split is inferred; otherwise it
    must be given.  The total length is checked at call time.
    """
    if split is None:
        if first.dim is None or second.dim is None:
            raise ValueError("split must be given when the factors have no declared dim")
        split = first.dim
    total = None
    if first.dim is not None and second.dim is not None:
        if first.dim != split:
            raise ValueError("split disagrees with the first factor's dim")
        total = first.dim + second.dim

    def fn(t, z):
        if total is not None and z.shape != (total,):
            raise ValueError(f"product prox expects shape ({total},), got {z.shape}")
        if z.shape[0] < split:
            raise ValueError("point is shorter than the first block")
        return np.concatenate([first(t, z[:split]), second(t, z[split:])])

    return Prox(fn, kind="product", params={"first": first, "second": second, "split": split},
                dim=total)


# ---------------------------------------------------------------------------
# operator norms
# ---------------------------------------------------------------------------

def estimate_operator_norm(m, max_iters=500, tol=1e-12):
    """Largest singular value of ``m`` by block power iteration on ``m' m``.

    Deterministic (fixed seeded start).  The block has width two because the
    singular values of (near-)skew matrices come in pairs, so the top of the
    Gram spectrum is often a two-cluster that a single power vector cannot
    resolve; a two-dimensional subspace captures the pair wholesale and its
    top Ritz value converges at the healthy third-eigenvalue rate.  Stops
    when that value is stable to a relative ``tol``; raises if the budget
    runs out.  An exactly zero matrix returns 0.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if not np.any(m):
        return 0.0
    gram = m.T @ m
    g = gram.shape[0]
    rng = np.random.default_rng(20210905)
    q, _ = np.linalg.qr(rng.standard_normal((g, min(2, g))))
    lam_prev = 0.0
    for it in range(max_iters):
        z = gram @ q
        if not np.any(z):
            # the subspace fell into the kernel; perturb and go on
            q, _ = np.linalg.qr(rng.standard_normal((g, min(2, g))))
            continue
        lam = float(np.linalg.eigvalsh(q.T @ z)[-1])
        q, _ = np.linalg.qr(z)
        if it >= 2 and abs(lam - lam_prev) <= tol * max(abs(lam), 1e-300):
            return float(np.sqrt(max(lam, 0.0)))
        lam_prev = lam
    raise RuntimeError(f"operator norm estimate did not converge in {max_iters} iterations")


# ---------------------------------------------------------------------------
# forward operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ForwardOperator:
    """A Lipschitz map evaluated explicitly by the splitting methods.

    ``lipschitz`` is a declared upper bound (any valid bound is fine, it
    only enters step-size rules).  ``jacobian`` is the constant Jacobian
    matrix when the map is affine, which lets diagnostics batch-evaluate
    differences; leave it None for genuinely nonlinear maps.
    """

    fn: callable
    lipschitz: float
    jacobian: np.ndarray | None = None

    def __call__(self, z):
        return self.fn(np.asarray(z, dtype=float))


def linear_forward(matrix, lipschitz=None):
    matrix = np.asarray(matrix, dtype=float)
    if lipschitz is None:
        lipschitz = estimate_operator_norm(matrix)
    return ForwardOperator(lambda z: matrix @ z, float(lipschitz), matrix)


def affine_forward(matrix, offset, lipschitz=None):
    matrix = np.asarray(matrix, dtype=float)
    offset = np.asarray(offset, dtype=float)
    if lipschitz is None:
        lipschitz = estimate_operator_norm(matrix) if np.any(matrix) else 0.0
    return ForwardOperator(lambda z: matrix @ z + offset, float(lipschitz), matrix)


# ---------------------------------------------------------------------------
# smooth couplings
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SmoothCoupling:
    """A convex-concave coupling ``phi(x, y)`` with Lipschitz gradients.

    ``grad_x``/``grad_y`` take (x, y) with ``x`` of length ``p`` and ``y``
    of length ``d`` (``d = 0`` is allowed for pure minimization).  ``value``
    is optional and used only by finite-difference diagnostics.
    """

    p: int
    d: int
    grad_x: callable
    grad_y: callable
    lipschitz: float
    value: callable | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)


def bilinear_coupling(m=None, a=None, b=None, p=None, d=None):
    """``phi(x, y) = x' M y + a' x - b' y`` with ``L = ||M||``.

    Any of ``m``, ``a``, ``b`` may be omitted (zero); dimensions are taken
    from whatever is present, or from explicit ``p``/``d``.
    """
    if m is not None:
        m = np.atleast_2d(np.asarray(m, dtype=float))
        p = m.shape[0] if p is None else p
        d = m.shape[1] if d is None else d
    if a is not None:
        a = np.asarray(a, dtype=float)
        p = a.shape[0] if p is None else p
    if b is not None:
        b = np.asarray(b, dtype=float)
        d = b.shape[0] if d is None else d
    if p is None or d is None:
        raise ValueError("dimensions cannot be inferred; pass p and d")
    m = np.zeros((p, d)) if m is None else m
    a = np.zeros(p) if a is None else a
    b = np.zeros(d) if b is None else b
    if m.shape != (p, d) or a.shape != (p,) or b.shape != (d,):
        raise ValueError("inconsistent coupling dimensions")
    lip = estimate_operator_norm(m) if np.any(m) else 0.0

    return SmoothCoupling(
        p=p,
        d=d,
        grad_x=lambda x, y: m @ y + a,
        grad_y=lambda x, y: m.T @ x - b,
        lipschitz=lip,
        value=lambda x, y: float(x @ m @ y) + float(a @ x) - float(b @ y),
        kind="bilinear",
        params={"m": m, "a": a, "b": b},
    )


def quadratic_coupling(p_matrix, m, r_matrix, a=None, b=None):
    """``phi = x' P x / 2 + x' M y - y' R y / 2 + a' x - b' y`` with PSD ``P, R``."""
    p_matrix = np.atleast_2d(np.asarray(p_matrix, dtype=float))
    r_matrix = np.atleast_2d(np.asarray(r_matrix, dtype=float))
    p, d = p_matrix.shape[0], r_matrix.shape[0]
    m = np.zeros((p, d)) if m is None else np.asarray(m, dtype=float).reshape(p, d)
    a = np.zeros(p) if a is None else np.asarray(a, dtype=float)
    b = np.zeros(d) if b is None else np.asarray(b, dtype=float)
    for name, mat in (("P", p_matrix), ("R", r_matrix)):
        if mat.shape[0] != mat.shape[1] or np.abs(mat - mat.T).max(initial=0.0) > 1e-12:
            raise ValueError(f"{name} must be square symmetric")
        if mat.size and float(np.linalg.eigvalsh(mat)[0]) < -1e-10:
            raise ValueError(f"{name} must be positive semidefinite")
    jac = np.block([[p_matrix, m], [-m.T, r_matrix]]) if p + d else np.zeros((0, 0))
    lip = estimate_operator_norm(jac) if np.any(jac) else 0.0

    def value(x, y):
        return (0.5 * float(x @ p_matrix @ x) + float(x @ m @ y)
                - 0.5 * float(y @ r_matrix @ y) + float(a @ x) - float(b @ y))

    return SmoothCoupling(
        p=p,
        d=d,
        grad_x=lambda x, y: p_matrix @ x + m @ y + a,
        grad_y=lambda x, y: m.T @ x - r_matrix @ y - b,
        lipschitz=lip,
        value=value,
        kind="quadratic",
        params={"p_matrix": p_matrix, "m": m, "r_matrix": r_matrix, "a": a, "b": b},
    )


def saddle_forward(coupling):
    """Monotone forward map ``z = (x, y) -> (grad_x phi, -grad_y phi)``.

    This is the operator the splitting methods evaluate on the product
    space; for the affine coupling families the constant Jacobian is
    attached so diagnostics can batch differences.
    """
    p, d = coupling.p, coupling.d

    def fn(z):
        x, y = z[:p], z[p:]
        return np.concatenate([coupling.grad_x(x, y), -coupling.grad_y(x, y)])

    jac = None
    if coupling.kind == "bilinear":
        m = coupling.params["m"]
        jac = np.block([[np.zeros((p, p)), m], [-m.T, np.zeros((d, d))]])
    elif coupling.kind == "quadratic":
        pm, m, rm = (coupling.params[k] for k in ("p_matrix", "m", "r_matrix"))
        jac = np.block([[pm, m], [-m.T, rm]])
    return ForwardOperator(fn, coupling.lipschitz, jac)


# ---------------------------------------------------------------------------
# sums across agents (centralized reference problems)
# ---------------------------------------------------------------------------

def combine_proxes(proxes):
    """Prox of the sum of the underlying functions, for matching library kinds.

    Sums are exact for: zero, l1 (weights add), identical boxes, quadratics
    (Q and q add) and identical zero-set indicators.  Anything else raises,
    because the prox of a sum is not composable in general.
    """
    kinds = {p.kind for p in proxes}
    if len(kinds) != 1:
        raise ValueError(f"cannot combine mixed prox kinds {sorted(kinds)}")
    kind = kinds.pop()
    if kind == "zero":
        return zero_prox()
    if kind == "zero_set_indicator":
        return zero_point_prox()
    if kind == "l1":
        return l1_prox(sum(p.params["weight"] for p in proxes))
    if kind == "box_indicator":
        first = proxes[0].params
        for p in proxes[1:]:
            if (np.any(np.asarray(p.params["lo"]) != np.asarray(first["lo"]))
                    or np.any(np.asarray(p.params["hi"]) != np.asarray(first["hi"]))):
                raise ValueError("box indicators must share identical bounds to be summed")
        return box_prox(first["lo"], first["hi"])
    if kind == "quadratic":
        q = sum(p.params["q_matrix"] for p in proxes)
        qv = sum(p.params["q_vec"] for p in proxes)
        return quadratic_prox(q, qv)
    raise ValueError(f"prox kind {kind!r} has no summation rule")


def combine_couplings(couplings):
    """Coupling whose value and gradients are the sum of the given ones."""
    kinds = {c.kind for c in couplings}
    if len(kinds) != 1:
        raise ValueError(f"cannot combine mixed coupling kinds {sorted(kinds)}")
    kind = kinds.pop()
    if kind == "bilinear":
        return bilinear_coupling(
            m=sum(c.params["m"] for c in couplings),
            a=sum(c.params["a"] for c in couplings),
            b=sum(c.params["b"] for c in couplings),
        )
    if kind == "quadratic":
        return quadratic_coupling(
            sum(c.params["p_matrix"] for c in couplings),
            sum(c.params["m"] for c in couplings),
            sum(c.params["r_matrix"] for c in couplings),
            a=sum(c.params["a"] for c in couplings),
            b=sum(c.params["b"] for c in couplings),
        )
    raise ValueError(f"coupling kind {kind!r} has no summation rule")
