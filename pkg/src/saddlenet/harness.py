"""Simulated bulk-synchronous network execution with message auditing.

The harness runs an agent-local program in rounds.  Each round: every agent
publishes its outgoing per-block vectors from the *previous* barrier's
state, the harness delivers them along graph edges, then every agent
computes its next state in isolation, seeing only its own state and the
delivered neighbor values.  Inboxes refuse reads from non-neighbors, so an
algorithm that would peek at remote state fails loudly instead of silently
using information it could not have over a real network.

Every delivered vector counts as one message (two per edge per block per
round when everybody publishes).  ``sequential_equivalence`` replays the
same program under a permuted agent schedule and demands bit-identical
final states, which is what "the order agents compute in cannot matter"
means operationally.

Adapters at the bottom run the decentralized solvers of this package
through the harness; their per-agent state dicts match the dense stacked
implementations row for row, which the tests pin down numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .primal_dual import StepSizeError
from .inclusion import stepsize_bound, uniform_lipschitz, _pg_extra_bound

__all__ = [
    "InclusionProgram",
    "MinMaxProgram",
    "NonNeighborReadError",
    "PgExtraProgram",
    "RoundAudit",
    "run_synchronous",
    "sequential_equivalence",
]


class NonNeighborReadError(RuntimeError):
    """An agent tried to read a value that never arrived on an edge."""

    def __init__(self, agent, source, block):
        super().__init__(
            f"agent {agent} attempted to read block {block!r} from non-neighbor {source}"
        )
        self.agent = agent
        self.source = source
        self.block = block
        self.audits = None


@dataclass
class RoundAudit:
    """Communication record of one synchronous round."""

    round_index: int
    messages: int = 0
    bytes: int = 0
    illegal_attempts: int = 0
    messages_by_block: dict = field(default_factory=dict)


class Inbox:
    """Delivered neighbor values for one agent and block.

    Reading any source that is not an actual graph neighbor (or that sent
    nothing this round) raises :class:`NonNeighborReadError` after marking
    the attempt in the round audit.
    """

    def __init__(self, block, agent, values, audit):
        self._block = block
        self._agent = agent
        self._values = values
        self._audit = audit

    def __getitem__(self, source):
        try:
            return self._values[source]
        except KeyError:
            if self._audit is not None:
                self._audit.illegal_attempts += 1
            raise NonNeighborReadError(self._agent, source, self._block) from None

    def __contains__(self, source):
        return source in self._values

    def sources(self):
        return sorted(self._values)


def run_synchronous(program, rounds, order=None, audit=False):
    """Execute ``rounds`` barrier-synchronized rounds of ``program``.

    ``program`` provides ``n``, ``blocks`` (name -> Graph), ``initial_state(i)``,
    ``outgoing(i, state)`` and ``compute(i, state, inboxes, round_index)``.
    ``order`` permutes the per-round compute schedule (results must not
    depend on it).  Returns ``(states, audits)``; ``audits`` has one
    :class:`RoundAudit` per round regardless of ``audit``, but illegal
    reads are only *recorded* there in audit mode (they always raise).
    """
    n = program.n
    if order is None:
        order = range(n)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the agents")

    neighbor_sets = {
        name: [graph.neighbors(i) for i in range(n)] for name, graph in program.blocks.items()
    }
    states = [program.initial_state(i) for i in range(n)]
    audits = []
    for r in range(1, rounds + 1):
        audit_row = RoundAudit(round_index=r)
        outgoing = [program.outgoing(i, states[i]) for i in range(n)]
        inboxes = []
        for i in range(n):
            per_block = {}
            for name in program.blocks:
                values = {}
                for j in neighbor_sets[name][i]:
                    if name in outgoing[j]:
                        vec = outgoing[j][name]
                        values[j] = vec
                        audit_row.messages += 1
                        audit_row.bytes += int(np.asarray(vec).nbytes)
                        audit_row.messages_by_block[name] = (
                            audit_row.messages_by_block.get(name, 0) + 1
                        )
                per_block[name] = Inbox(name, i, values, audit_row if audit else None)
            inboxes.append(per_block)
        new_states = [None] * n
        try:
            for i in order:
                new_states[i] = program.compute(i, states[i], inboxes[i], r)
        except NonNeighborReadError as exc:
            exc.audits = audits + [audit_row]
            raise
        states = new_states
        audits.append(audit_row)
    return states, audits


def _states_equal(a, b):
    if a.keys() != b.keys():
        return False
    return all(np.array_equal(a[k], b[k]) for k in a)


def sequential_equivalence(program, rounds, seed=0):
    """True when a permuted compute schedule reproduces the states bitwise."""
    baseline, _ = run_synchronous(program, rounds)
    n = program.n
    if n > 1:
        rng = np.random.default_rng(seed)
        perm = rng.permutation(n)
        while np.array_equal(perm, np.arange(n)):
            perm = rng.permutation(n)
    else:
        perm = np.arange(n)
    permuted, _ = run_synchronous(program, rounds, order=perm)
    return all(_states_equal(a, b) for a, b in zip(baseline, permuted))


# ---------------------------------------------------------------------------
# agent-local programs for the package's decentralized methods
# ---------------------------------------------------------------------------

def _weight_rows(mixing):
    """Per-agent weights restricted to the closed neighborhood."""
    w, g = mixing.w, mixing.graph
    return [
        {j: float(w[i, j]) for j in (*g.neighbors(i), i)}
        for i in range(g.n)
    ]


def _local_mix(i, weights, own, inbox):
    """Weighted neighborhood average, summed in agent-index order."""
    total = 0.0
    for j in sorted(weights):
        total = total + weights[j] * (own if j == i else inbox[j])
    return total


class _RecursionProgram:
    """Shared machinery: one published vector per block per round.

    Round 1 publishes the start rows and runs the bootstrap step (which by
    design needs no neighbor data unless premixing is requested); later
    rounds publish the current iterate and run the recursion.  Neighbor
    values from the previous round are cached locally so each round needs a
    single exchange.
    """

    def outgoing(self, i, state):
        # state holds exactly the rows the recursion publishes next
        return {name: state[key] for name, key in self._publish}


class InclusionProgram(_RecursionProgram):
    """Agent-local execution of the decentralized inclusion iteration.

    After ``r`` rounds each agent's ``x`` equals row ``i`` of the dense
    stacked iterate after ``r - 1`` calls of ``inclusion_step`` following
    ``inclusion_init`` (round 1 performs the bootstrap).
    """

    block = "x"

    def __init__(self, agents, mixing, x0, tau, premix=False):
        x0 = np.asarray(x0, dtype=float)
        bound = stepsize_bound(mixing, uniform_lipschitz(agents))
        if not 0.0 < tau < bound:
            raise StepSizeError(f"tau={tau!r} not in (0, {bound!r})")
        self.agents = agents
        self.n = len(agents)
        self.blocks = {self.block: mixing.graph}
        self.x0 = x0
        self.tau = tau
        self.premix = premix
        self.weights = _weight_rows(mixing)
        self._publish = ((self.block, "x"),)

    def initial_state(self, i):
        x0 = self.x0[i].copy()
        return {"x": x0, "v": self.agents[i].forward(x0)}

    def compute(self, i, state, inboxes, round_index):
        inbox = inboxes[self.block]
        tau = self.tau
        agent = self.agents[i]
        if round_index == 1:
            x0, v0 = state["x"], state["v"]
            mix0 = _local_mix(i, self.weights[i], x0, inbox)
            u1 = (mix0 if self.premix else x0) - tau * v0
            x1 = agent.resolvent(tau, u1)
            b1 = agent.forward(x1)
            return {"u": u1, "x": x1, "prev_x": x0, "v": 2.0 * b1 - v0, "prev_v": v0,
                    "bx": b1, "wx_prev": mix0}
        mix = _local_mix(i, self.weights[i], state["x"], inbox)
        u_new = (mix + state["u"] - 0.5 * (state["prev_x"] + state["wx_prev"])
                 - tau * (state["v"] - state["prev_v"]))
        x_new = agent.resolvent(tau, u_new)
        b_new = agent.forward(x_new)
        return {"u": u_new, "x": x_new, "prev_x": state["x"],
                "v": 2.0 * b_new - state["bx"], "prev_v": state["v"],
                "bx": b_new, "wx_prev": mix}


class PgExtraProgram(_RecursionProgram):
    """Agent-local PG-EXTRA (plain gradient difference, same exchange pattern)."""

    block = "x"

    def __init__(self, agents, mixing, x0, tau, premix=False):
        x0 = np.asarray(x0, dtype=float)
        bound = _pg_extra_bound(mixing, uniform_lipschitz(agents))
        if not 0.0 < tau < bound:
            raise StepSizeError(f"tau={tau!r} not in (0, {bound!r})")
        self.agents = agents
        self.n = len(agents)
        self.blocks = {self.block: mixing.graph}
        self.x0 = x0
        self.tau = tau
        self.premix = premix
        self.weights = _weight_rows(mixing)
        self._publish = ((self.block, "x"),)

    def initial_state(self, i):
        x0 = self.x0[i].copy()
        return {"x": x0, "grad": self.agents[i].forward(x0)}

    def compute(self, i, state, inboxes, round_index):
        inbox = inboxes[self.block]
        tau = self.tau
        agent = self.agents[i]
        if round_index == 1:
            x0, g0 = state["x"], state["grad"]
            mix0 = _local_mix(i, self.weights[i], x0, inbox)
            u1 = (mix0 if self.premix else x0) - tau * g0
            x1 = agent.resolvent(tau, u1)
            return {"u": u1, "x": x1, "prev_x": x0, "grad": agent.forward(x1),
                    "prev_grad": g0, "wx_prev": mix0}
        mix = _local_mix(i, self.weights[i], state["x"], inbox)
        u_new = (mix + state["u"] - 0.5 * (state["prev_x"] + state["wx_prev"])
                 - tau * (state["grad"] - state["prev_grad"]))
        x_new = agent.resolvent(tau, u_new)
        return {"u": u_new, "x": x_new, "prev_x": state["x"],
                "grad": agent.forward(x_new), "prev_grad": state["grad"],
                "wx_prev": mix}


class MinMaxProgram(_RecursionProgram):
    """Agent-local execution of the decentralized min-max iteration.

    Publishes one x-vector on the W1 graph and one y-vector on the W2 graph
    per round; the two blocks may use different topologies.
    """

    def __init__(self, problems, mixing, x0, y0, tau):
        from .minmax import _check_minmax  # shares the validation logic

        x0, y0 = _check_minmax(problems, mixing, x0, y0, tau)
        self.problems = problems
        self.n = len(problems)
        self.blocks = {"x": mixing.w1.graph, "y": mixing.w2.graph}
        self.x0, self.y0 = x0, y0
        self.tau = tau
        self.wx = _weight_rows(mixing.w1)
        self.wy = _weight_rows(mixing.w2)
        self._publish = (("x", "x"), ("y", "y"))

    def initial_state(self, i):
        x0, y0 = self.x0[i].copy(), self.y0[i].copy()
        prob = self.problems[i]
        return {"x": x0, "y": y0,
                "gx": prob.coupling.grad_x(x0, y0), "gy": prob.coupling.grad_y(x0, y0)}

    def compute(self, i, state, inboxes, round_index):
        tau = self.tau
        prob = self.problems[i]
        if round_index == 1:
            x0, y0 = state["x"], state["y"]
            gx0, gy0 = state["gx"], state["gy"]
            mix_x = _local_mix(i, self.wx[i], x0, inboxes["x"])
            mix_y = _local_mix(i, self.wy[i], y0, inboxes["y"])
            ux1 = x0 - tau * gx0
            uy1 = y0 - tau * (-gy0)
            x1 = prob.prox_min(tau, ux1)
            y1 = prob.prox_max(tau, uy1)
            gx1 = prob.coupling.grad_x(x1, y1)
            gy1 = prob.coupling.grad_y(x1, y1)
            return {
                "ux": ux1, "uy": uy1, "x": x1, "y": y1, "prev_x": x0, "prev_y": y0,
                "vx": 2.0 * gx1 - gx0, "vy": -2.0 * gy1 + gy0,
                "prev_vx": gx0, "prev_vy": -gy0,
                "gx": gx1, "gy": gy1, "wx_prev": mix_x, "wy_prev": mix_y,
            }
        mix_x = _local_mix(i, self.wx[i], state["x"], inboxes["x"])
        mix_y = _local_mix(i, self.wy[i], state["y"], inboxes["y"])
        ux_new = (mix_x + state["ux"] - 0.5 * (state["prev_x"] + state["wx_prev"])
                  - tau * (state["vx"] - state["prev_vx"]))
        uy_new = (mix_y + state["uy"] - 0.5 * (state["prev_y"] + state["wy_prev"])
                  - tau * (state["vy"] - state["prev_vy"]))
        x_new = self.problems[i].prox_min(tau, ux_new)
        y_new = self.problems[i].prox_max(tau, uy_new)
        gx_new = prob.coupling.grad_x(x_new, y_new)
        gy_new = prob.coupling.grad_y(x_new, y_new)
        return {
            "ux": ux_new, "uy": uy_new, "x": x_new, "y": y_new,
            "prev_x": state["x"], "prev_y": state["y"],
            "vx": 2.0 * gx_new - state["gx"], "vy": -2.0 * gy_new + state["gy"],
            "prev_vx": state["vx"], "prev_vy": state["vy"],
            "gx": gx_new, "gy": gy_new, "wx_prev": mix_x, "wy_prev": mix_y,
        }
