"""Reproducible random problem instances.

All randomness flows through ``numpy.random.default_rng`` (PCG64) seeded
with a caller-supplied 64-bit integer, and every generator documents its
draw order, so instances are identical across platforms and sessions.
"""

from __future__ import annotations

import numpy as np

from .inclusion import AgentInclusion
from .minmax import AgentSaddleProblem
from .operators import (
    bilinear_coupling,
    box_prox,
    l1_prox,
    linear_forward,
    make_prox,
    quadratic_coupling,
    quadratic_prox,
    zero_prox,
)

__all__ = [
    "random_monotone_matrix",
    "random_inclusion_agents",
    "random_saddle_problems",
    "seeded_couplings",
]


def random_monotone_matrix(h, rng, skew_scale=1.0, sym_scale=0.3):
    """Monotone linear map: scaled skew part plus a PSD part.

    Draw order: one ``h x h`` standard normal for the skew part, one for
    the PSD part.  ``S + P`` is monotone because ``z'(S + P)z = z'Pz >= 0``.
    """
    a = rng.standard_normal((h, h))
    skew = 0.5 * (a - a.T) * skew_scale
    g = rng.standard_normal((h, h))
    psd = (g @ g.T) / h * sym_scale
    return skew + psd


_PROX_POOL = ("zero", "l1", "box_indicator", "quadratic")


def _random_prox(h, rng, pool=_PROX_POOL):
    """Draw order: one integer for the kind, then kind-specific draws."""
    kind = pool[int(rng.integers(0, len(pool)))]
    if kind == "zero":
        return zero_prox()
    if kind == "l1":
        return l1_prox(float(rng.uniform(0.01, 0.5)))
    if kind == "box_indicator":
        lo = rng.uniform(-2.0, 0.0, size=h)
        hi = lo + rng.uniform(0.5, 3.0, size=h)
        return box_prox(lo, hi)
    g = rng.standard_normal((h, h))
    q = (g @ g.T) / h
    return quadratic_prox(q, rng.standard_normal(h) * 0.5)


def random_inclusion_agents(n, h, seed, pool=_PROX_POOL):
    """``n`` agents with random library proxes and monotone linear maps.

    Per agent in order: prox draws, then the forward-matrix draws of
    :func:`random_monotone_matrix`.
    """
    rng = np.random.default_rng(seed)
    agents = []
    for _ in range(n):
        prox = _random_prox(h, rng, pool)
        agents.append(AgentInclusion(resolvent=prox, forward=linear_forward(random_monotone_matrix(h, rng))))
    return agents


def seeded_couplings(n, p, d, seed, kind="bilinear", scale=1.0):
    """Per-agent couplings from one seed.

    Draw order per agent: for ``bilinear`` the ``p x d`` matrix ``M`` (row
    major), then ``a`` (length p), then ``b`` (length d); for ``quadratic``
    additionally ``p x p`` and ``d x d`` Gaussian factors for the PSD blocks
    drawn first.  Entries are standard normal scaled by
    ``scale / sqrt(max(p, d, 1))``.
    """
    rng = np.random.default_rng(seed)
    s = scale / np.sqrt(max(p, d, 1))
    out = []
    for _ in range(n):
        if kind == "bilinear":
            m = rng.standard_normal((p, d)) * s
            a = rng.standard_normal(p) * s
            b = rng.standard_normal(d) * s
            out.append(bilinear_coupling(m=m, a=a, b=b, p=p, d=d))
        elif kind == "quadratic":
            gp = rng.standard_normal((p, p))
            gr = rng.standard_normal((d, d))
            m = rng.standard_normal((p, d)) * s
            a = rng.standard_normal(p) * s
            b = rng.standard_normal(d) * s
            out.append(quadratic_coupling((gp @ gp.T) / max(p, 1) * s,
                                          m,
                                          (gr @ gr.T) / max(d, 1) * s,
                                          a=a, b=b))
        elif kind == "zero":
            out.append(bilinear_coupling(p=p, d=d))
        else:
            raise ValueError(f"unknown coupling kind {kind!r}")
    return out


def random_saddle_problems(n, p, d, seed, coupling_kind="bilinear",
                           prox_min_kind="l1", prox_max_kind="box_indicator",
                           prox_min_params=None, prox_max_params=None, scale=1.0):
    """``n`` saddle agents with shared prox kinds and seeded couplings."""
    couplings = seeded_couplings(n, p, d, seed, kind=coupling_kind, scale=scale)
    pmin = dict(prox_min_params or {})
    pmax = dict(prox_max_params or {})
    return [
        AgentSaddleProblem(
            prox_min=make_prox(prox_min_kind, **pmin),
            prox_max=make_prox(prox_max_kind, **pmax),
            coupling=c,
        )
        for c in couplings
    ]
