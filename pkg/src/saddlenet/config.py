"""Experiment configuration: INI parsing, validation and object builders.

A config fully determines an experiment: the per-agent problem (prox kinds,
coupling family, seed or inline matrices), the communication graph(s), the
mixing construction(s), the algorithm and step sizes, and the run budget.
``parse_config`` and ``serialize_config`` round-trip exactly, which the
tests rely on.  Unknown sections or keys are errors that name the offender.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

import numpy as np

from .graphs import metropolis_mixing, mixing_from_laplacian, named_topology, parse_edge_list
from .minmax import AgentSaddleProblem, BlockMixing
from .operators import bilinear_coupling, make_prox, quadratic_coupling
from .instances import seeded_couplings

__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "ExperimentConfig",
    "build_block_mixing",
    "build_problems",
    "build_start",
    "load_config",
    "parse_config",
    "resolve_steps",
    "serialize_config",
]

ALGORITHMS = ("alg1", "alg2", "pdtr", "pdhg", "forb", "condat_vu", "pg_extra")
_PROX_KINDS = ("zero", "l1", "box_indicator", "quadratic", "zero_set_indicator")
_COUPLINGS = ("bilinear", "quadratic", "zero")
_TOPOLOGIES = ("path", "ring", "star", "complete", "random")
_SCHEMES = ("metropolis", "laplacian")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class ProblemConfig:
    n: int = 3
    p: int = 2
    d: int = 2
    prox_f: str = "zero"
    prox_f_weight: float = 1.0
    prox_f_lo: float = -1.0
    prox_f_hi: float = 1.0
    prox_g: str = "zero"
    prox_g_weight: float = 1.0
    prox_g_lo: float = -1.0
    prox_g_hi: float = 1.0
    coupling: str = "bilinear"
    seed: int = 0
    scale: float = 1.0
    lipschitz: float | None = None
    coupling_m: tuple | None = None
    coupling_a: tuple | None = None
    coupling_b: tuple | None = None
    x0: tuple | None = None
    y0: tuple | None = None


@dataclass(frozen=True)
class GraphConfig:
    topology: str = "ring"
    density: float = 0.3
    seed: int = 0
    edges: str | None = None
    edges_file: str | None = None
    topology_y: str | None = None
    density_y: float | None = None
    seed_y: int | None = None
    edges_y: str | None = None
    edges_file_y: str | None = None


@dataclass(frozen=True)
class MixingConfig:
    scheme: str = "metropolis"
    alpha: float | None = None
    scheme_y: str | None = None
    alpha_y: float | None = None


@dataclass(frozen=True)
class AlgorithmConfig:
    names: tuple = ("alg2",)
    tau: float | str = "auto"
    sigma: float | str = "auto"
    safety: float = 0.9
    init: str = "default"


@dataclass(frozen=True)
class RunConfig:
    max_iters: int = 100_000
    tol: float = 1e-10
    trace_every: int = 1
    reference: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    graph: GraphConfig = field(default_factory=GraphConfig)
    mixing: MixingConfig = field(default_factory=MixingConfig)
    algorithm: AlgorithmConfig = field(default_factory=AlgorithmConfig)
    run: RunConfig = field(default_factory=RunConfig)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _fail(where, message):
    raise ConfigError(f"{where}: {message}")


def _get(section_values, where, key, cast, default):
    if key not in section_values:
        return default
    raw = section_values.pop(key)
    try:
        return cast(raw)
    except (ValueError, TypeError) as exc:
        _fail(f"{where}.{key}", f"cannot parse {raw!r} ({exc})")


def _as_int(raw):
    return int(str(raw).strip())


def _as_float(raw):
    return float(str(raw).strip())


def _as_bool(raw):
    token = str(raw).strip().lower()
    if token in ("on", "true", "yes", "1"):
        return True
    if token in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {token!r}")


def _as_matrix(raw):
    """Rows split by ';' or newlines, entries by ','; stored as tuples."""
    rows = []
    for chunk in str(raw).replace(";", "\n").splitlines():
        chunk = chunk.strip().strip(",")
        if not chunk:
            continue
        rows.append(tuple(float(t) for t in chunk.split(",")))
    if not rows:
        raise ValueError("empty matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix rows")
    return tuple(rows)


def _as_vector(raw):
    mat = _as_matrix(raw)
    if len(mat) != 1:
        raise ValueError("expected a single row")
    return mat[0]


def _as_tau(raw):
    token = str(raw).strip().lower()
    if token == "auto":
        return "auto"
    return float(token)


def _choice(options):
    def cast(raw):
        token = str(raw).strip()
        if token not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return token

    return cast


def _names(raw):
    names = tuple(t.strip() for t in str(raw).split(",") if t.strip())
    if not names:
        raise ValueError("no algorithm names")
    for name in names:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}; known: {', '.join(ALGORITHMS)}")
    return names


def parse_config(text):
    """Parse INI text into an :class:`ExperimentConfig` (strict keys)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None

    known = {"problem", "graph", "mixing", "algorithm", "run"}
    for section in parser.sections():
        if section not in known:
            _fail(section, "unknown section")

    sections = {name: dict(parser[name]) if parser.has_section(name) else {} for name in known}

    pv = sections["problem"]
    problem = ProblemConfig(
        n=_get(pv, "problem", "n", _as_int, 3),
        p=_get(pv, "problem", "p", _as_int, 2),
        d=_get(pv, "problem", "d", _as_int, 2),
        prox_f=_get(pv, "problem", "prox_f", _choice(_PROX_KINDS), "zero"),
        prox_f_weight=_get(pv, "problem", "prox_f_weight", _as_float, 1.0),
        prox_f_lo=_get(pv, "problem", "prox_f_lo", _as_float, -1.0),
        prox_f_hi=_get(pv, "problem", "prox_f_hi", _as_float, 1.0),
        prox_g=_get(pv, "problem", "prox_g", _choice(_PROX_KINDS), "zero"),
        prox_g_weight=_get(pv, "problem", "prox_g_weight", _as_float, 1.0),
        prox_g_lo=_get(pv, "problem", "prox_g_lo", _as_float, -1.0),
        prox_g_hi=_get(pv, "problem", "prox_g_hi", _as_float, 1.0),
        coupling=_get(pv, "problem", "coupling", _choice(_COUPLINGS), "bilinear"),
        seed=_get(pv, "problem", "seed", _as_int, 0),
        scale=_get(pv, "problem", "scale", _as_float, 1.0),
        lipschitz=_get(pv, "problem", "lipschitz", _as_float, None),
        coupling_m=_get(pv, "problem", "coupling_m", _as_matrix, None),
        coupling_a=_get(pv, "problem", "coupling_a", _as_vector, None),
        coupling_b=_get(pv, "problem", "coupling_b", _as_vector, None),
        x0=_get(pv, "problem", "x0", _as_vector, None),
        y0=_get(pv, "problem", "y0", _as_vector, None),
    )
    if problem.n < 1:
        _fail("problem.n", "must be at least 1")
    if problem.p < 1:
        _fail("problem.p", "must be at least 1")
    if problem.d < 0:
        _fail("problem.d", "must be nonnegative")

    gv = sections["graph"]
    graph = GraphConfig(
        topology=_get(gv, "graph", "topology", _choice(_TOPOLOGIES), "ring"),
        density=_get(gv, "graph", "density", _as_float, 0.3),
        seed=_get(gv, "graph", "seed", _as_int, 0),
        edges=_get(gv, "graph", "edges", str, None),
        edges_file=_get(gv, "graph", "edges_file", str, None),
        topology_y=_get(gv, "graph", "topology_y", _choice(_TOPOLOGIES), None),
        density_y=_get(gv, "graph", "density_y", _as_float, None),
        seed_y=_get(gv, "graph", "seed_y", _as_int, None),
        edges_y=_get(gv, "graph", "edges_y", str, None),
        edges_file_y=_get(gv, "graph", "edges_file_y", str, None),
    )

    mv = sections["mixing"]
    mixing = MixingConfig(
        scheme=_get(mv, "mixing", "scheme", _choice(_SCHEMES), "metropolis"),
        alpha=_get(mv, "mixing", "alpha", _as_float, None),
        scheme_y=_get(mv, "mixing", "scheme_y", _choice(_SCHEMES), None),
        alpha_y=_get(mv, "mixing", "alpha_y", _as_float, None),
    )
    if mixing.scheme == "laplacian" and mixing.alpha is None:
        _fail("mixing.alpha", "required for the laplacian scheme")

    av = sections["algorithm"]
    algorithm = AlgorithmConfig(
        names=_get(av, "algorithm", "name", _names, ("alg2",)),
        tau=_get(av, "algorithm", "tau", _as_tau, "auto"),
        sigma=_get(av, "algorithm", "sigma", _as_tau, "auto"),
        safety=_get(av, "algorithm", "safety", _as_float, 0.9),
        init=_get(av, "algorithm", "init", _choice(("default", "premix")), "default"),
    )
    if not 0.0 < algorithm.safety < 1.0:
        _fail("algorithm.safety", "must lie in (0, 1)")
    if algorithm.tau != "auto" and algorithm.tau <= 0:
        _fail("algorithm.tau", "must be positive or 'auto'")
    if algorithm.sigma != "auto" and algorithm.sigma <= 0:
        _fail("algorithm.sigma", "must be positive or 'auto'")

    rv = sections["run"]
    run = RunConfig(
        max_iters=_get(rv, "run", "max_iters", _as_int, 100_000),
        tol=_get(rv, "run", "tol", _as_float, 1e-10),
        trace_every=_get(rv, "run", "trace_every", _as_int, 1),
        reference=_get(rv, "run", "reference", _as_bool, False),
    )
    if run.max_iters < 0:
        _fail("run.max_iters", "must be nonnegative")
    if run.tol < 0:
        _fail("run.tol", "must be nonnegative")
    if run.trace_every < 1:
        _fail("run.trace_every", "must be at least 1")

    for name in known:
        for key in sections[name]:
            _fail(f"{name}.{key}", "unknown key")

    return ExperimentConfig(problem=problem, graph=graph, mixing=mixing,
                            algorithm=algorithm, run=run)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return "; ".join(", ".join(repr(float(v)) for v in row) for row in value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def serialize_config(cfg):
    """Canonical INI text; ``parse_config(serialize_config(c)) == c``."""
    out = io.StringIO()
    p = cfg.problem
    out.write("[problem]\n")
    out.write(f"n = {p.n}\np = {p.p}\nd = {p.d}\n")
    out.write(f"prox_f = {p.prox_f}\n")
    if p.prox_f == "l1":
        out.write(f"prox_f_weight = {_fmt(p.prox_f_weight)}\n")
    if p.prox_f == "box_indicator":
        out.write(f"prox_f_lo = {_fmt(p.prox_f_lo)}\nprox_f_hi = {_fmt(p.prox_f_hi)}\n")
    out.write(f"prox_g = {p.prox_g}\n")
    if p.prox_g == "l1":
        out.write(f"prox_g_weight = {_fmt(p.prox_g_weight)}\n")
    if p.prox_g == "box_indicator":
        out.write(f"prox_g_lo = {_fmt(p.prox_g_lo)}\nprox_g_hi = {_fmt(p.prox_g_hi)}\n")
    out.write(f"coupling = {p.coupling}\nseed = {p.seed}\nscale = {_fmt(p.scale)}\n")
    if p.lipschitz is not None:
        out.write(f"lipschitz = {_fmt(p.lipschitz)}\n")
    for key in ("coupling_m", "coupling_a", "coupling_b", "x0", "y0"):
        value = getattr(p, key)
        if value is not None:
            out.write(f"{key} = {_fmt(value)}\n")

    g = cfg.graph
    out.write("\n[graph]\n")
    if g.edges is not None:
        out.write(f"edges = {g.edges}\n")
    elif g.edges_file is not None:
        out.write(f"edges_file = {g.edges_file}\n")
    else:
        out.write(f"topology = {g.topology}\n")
        if g.topology == "random":
            out.write(f"density = {_fmt(g.density)}\nseed = {g.seed}\n")
    if g.edges_y is not None:
        out.write(f"edges_y = {g.edges_y}\n")
    elif g.edges_file_y is not None:
        out.write(f"edges_file_y = {g.edges_file_y}\n")
    elif g.topology_y is not None:
        out.write(f"topology_y = {g.topology_y}\n")
        if g.topology_y == "random":
            if g.density_y is not None:
                out.write(f"density_y = {_fmt(g.density_y)}\n")
            if g.seed_y is not None:
                out.write(f"seed_y = {g.seed_y}\n")

    m = cfg.mixing
    out.write("\n[mixing]\n")
    out.write(f"scheme = {m.scheme}\n")
    if m.alpha is not None:
        out.write(f"alpha = {_fmt(m.alpha)}\n")
    if m.scheme_y is not None:
        out.write(f"scheme_y = {m.scheme_y}\n")
    if m.alpha_y is not None:
        out.write(f"alpha_y = {_fmt(m.alpha_y)}\n")

    a = cfg.algorithm
    out.write("\n[algorithm]\n")
    out.write(f"name = {', '.join(a.names)}\n")
    out.write(f"tau = {_fmt(a.tau) if a.tau != 'auto' else 'auto'}\n")
    out.write(f"sigma = {_fmt(a.sigma) if a.sigma != 'auto' else 'auto'}\n")
    out.write(f"safety = {_fmt(a.safety)}\ninit = {a.init}\n")

    r = cfg.run
    out.write("\n[run]\n")
    out.write(f"max_iters = {r.max_iters}\ntol = {_fmt(r.tol)}\n")
    out.write(f"trace_every = {r.trace_every}\nreference = {_fmt(r.reference)}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _build_graph(n, topology, density, seed, edges, edges_file, where):
    try:
        if edges is not None:
            g = parse_edge_list(edges)
        elif edges_file is not None:
            with open(edges_file, "r", encoding="utf-8") as fh:
                g = parse_edge_list(fh.read())
        else:
            g = named_topology(topology, n, density=density, seed=seed)
    except (OSError, ValueError) as exc:
        _fail(where, str(exc))
    if g.n != n:
        _fail(where, f"graph has {g.n} vertices but problem.n = {n}")
    return g


def _build_mixing(g, scheme, alpha, where):
    if scheme == "metropolis":
        return metropolis_mixing(g)
    if alpha is None:
        _fail(where, "alpha required for the laplacian scheme")
    return mixing_from_laplacian(g, alpha)


def build_block_mixing(cfg):
    """Certified mixing matrices for both blocks (y defaults to the x setup)."""
    n = cfg.problem.n
    g = cfg.graph
    gx = _build_graph(n, g.topology, g.density, g.seed, g.edges, g.edges_file, "graph")
    has_y = any(v is not None for v in (g.topology_y, g.edges_y, g.edges_file_y))
    if has_y:
        gy = _build_graph(
            n,
            g.topology_y or g.topology,
            g.density if g.density_y is None else g.density_y,
            g.seed if g.seed_y is None else g.seed_y,
            g.edges_y,
            g.edges_file_y,
            "graph",
        )
    else:
        gy = gx
    m = cfg.mixing
    w1 = _build_mixing(gx, m.scheme, m.alpha, "mixing")
    if has_y or m.scheme_y is not None or m.alpha_y is not None:
        w2 = _build_mixing(gy, m.scheme_y or m.scheme,
                           m.alpha if m.alpha_y is None else m.alpha_y, "mixing")
    else:
        w2 = w1
    return BlockMixing(w1, w2, split=cfg.problem.p)


def _prox_from_config(kind, weight, lo, hi, where):
    try:
        if kind == "l1":
            return make_prox("l1", weight=weight)
        if kind == "box_indicator":
            return make_prox("box_indicator", lo=lo, hi=hi)
        return make_prox(kind)
    except ValueError as exc:
        _fail(where, str(exc))


def build_problems(cfg):
    """Per-agent saddle problems from the problem section."""
    p = cfg.problem
    if p.coupling_m is not None or p.coupling_a is not None or p.coupling_b is not None:
        m = np.asarray(p.coupling_m, dtype=float) if p.coupling_m is not None else None
        a = np.asarray(p.coupling_a, dtype=float) if p.coupling_a is not None else None
        b = np.asarray(p.coupling_b, dtype=float) if p.coupling_b is not None else None
        if m is not None and m.shape != (p.p, p.d):
            _fail("problem.coupling_m", f"expected shape {(p.p, p.d)}, got {m.shape}")
        if a is not None and a.shape != (p.p,):
            _fail("problem.coupling_a", f"expected length {p.p}")
        if b is not None and b.shape != (p.d,):
            _fail("problem.coupling_b", f"expected length {p.d}")
        couplings = [bilinear_coupling(m=m, a=a, b=b, p=p.p, d=p.d) for _ in range(p.n)]
        if p.coupling == "quadratic":
            _fail("problem.coupling", "inline matrices are only supported for bilinear")
    else:
        couplings = seeded_couplings(p.n, p.p, p.d, p.seed, kind=p.coupling, scale=p.scale)

    prox_f = lambda: _prox_from_config(p.prox_f, p.prox_f_weight, p.prox_f_lo, p.prox_f_hi,  # noqa: E731
                                       "problem.prox_f")
    prox_g = lambda: _prox_from_config(p.prox_g, p.prox_g_weight, p.prox_g_lo, p.prox_g_hi,  # noqa: E731
                                       "problem.prox_g")
    return [AgentSaddleProblem(prox_min=prox_f(), prox_max=prox_g(), coupling=c)
            for c in couplings]


def declared_lipschitz(cfg, problems):
    """Declared network constant: config override, else the worst coupling."""
    if cfg.problem.lipschitz is not None:
        if cfg.problem.lipschitz <= 0:
            _fail("problem.lipschitz", "must be positive")
        return cfg.problem.lipschitz
    lip = max(prob.lipschitz for prob in problems)
    return lip if lip > 0 else 1.0


def resolve_steps(cfg, mixing, lipschitz):
    """Resolve ``tau`` (and ``sigma = 1/tau`` unless given) from the config.

    ``auto`` picks ``safety * (1 + lambda_min) / (4 L)``, the decentralized
    admissible range scaled inward; with ``sigma = 1/tau`` this same range
    is exactly what the centralized product-space methods need, so one rule
    serves every algorithm the CLI can run.
    """
    a = cfg.algorithm
    if a.tau == "auto":
        tau = a.safety * (1.0 + mixing.lambda_min) / (4.0 * lipschitz)
    else:
        tau = float(a.tau)
    sigma = 1.0 / tau if a.sigma == "auto" else float(a.sigma)
    return tau, sigma


def build_start(cfg):
    """Initial stacked rows; explicit vectors are replicated to all agents."""
    p = cfg.problem
    if p.x0 is not None:
        if len(p.x0) != p.p:
            _fail("problem.x0", f"expected length {p.p}")
        x0 = np.tile(np.asarray(p.x0, dtype=float), (p.n, 1))
    else:
        x0 = np.zeros((p.n, p.p))
    if p.y0 is not None:
        if len(p.y0) != p.d:
            _fail("problem.y0", f"expected length {p.d}")
        y0 = np.tile(np.asarray(p.y0, dtype=float), (p.n, 1))
    else:
        y0 = np.zeros((p.n, p.d))
    return x0, y0
