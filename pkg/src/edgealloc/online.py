"""Online greedy primal-dual task allocation engine.

Tasks are revealed one at a time; each is either placed on a neighbor node
or rejected, and the dual bookkeeping (x per task, z per node, u per task)
is updated so that after every dual update the primal constraints hold.
The final dual value is the number of tasks served; the final primal value
upper-bounds it and yields the analytical competitive ratio.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .model import EdgeNode, Scenario, Task


class ContractViolationError(RuntimeError):
    """An operation was invoked outside its preconditions."""


class PrimalInfeasibilityError(AssertionError):
    """A primal constraint check failed after a dual update."""


@dataclass(frozen=True)
class AlgoConfig:
    """Tuning constants of the allocation rule.

    ``alpha`` >= 1 sharpens the preference for still-unloaded nodes
    (alpha = 100 effectively forbids reusing a node); ``delta`` in (0, 1]
    sets the growth constant c = (1 + delta)**(1/delta) of the per-node
    load variable.  delta = 1 (c = 2) is where the worst-case guarantee
    is tightest.
    """

    alpha: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")

    @property
    def c(self) -> float:
        return (1.0 + self.delta) ** (1.0 / self.delta)


def _load_pow(base: float, alpha: float) -> float:
    """(1 - z)**alpha with explicit semantics for a negative base.

    A node's load variable can exceed 1 after repeated acceptances, making
    the base negative.  For integral alpha the signed real power is used;
    a fractional power of a negative number has no real value and is
    rejected rather than silently going complex.
    """
    if base >= 0.0:
        return base ** alpha
    if float(alpha).is_integer():
        return -((-base) ** alpha) if int(alpha) % 2 else (-base) ** alpha
    raise ValueError(
        f"(1 - z)**alpha undefined: negative base {base} with fractional alpha {alpha}"
    )


@dataclass(frozen=True)
class StepOutcome:
    """Decision record for one task, with dual values snapshotted after it."""

    task_index: int
    node_id: int | None  # None = rejected
    delta_u: float
    primal_value_after: float
    dual_value_after: int
    x_value: float | None
    z_after: dict[int, float]
    u_after: tuple[float, ...]

    @property
    def accepted(self) -> bool:
        return self.node_id is not None

    def to_dict(self) -> dict:
        return {
            "task_index": self.task_index,
            "decision": "accepted" if self.accepted else "rejected",
            "node_id": self.node_id,
            "delta_u": self.delta_u,
            "x": self.x_value,
            "z": {str(k): v for k, v in sorted(self.z_after.items())},
            "u": list(self.u_after),
            "primal_value": self.primal_value_after,
            "dual_value": self.dual_value_after,
        }


def write_step_trace(outcomes: list[StepOutcome], path) -> None:
    """Write one JSON record per step, newline-delimited."""
    with open(path, "w") as fh:
        for outcome in outcomes:
            fh.write(json.dumps(outcome.to_dict()) + "\n")


@dataclass
class AllocState:
    """Live algorithm state for a single sequential run.

    ``y`` holds the accepted (task index, node id) pairs; ``x``, ``z`` and
    ``u`` are the dual variables; ``spent_tx_s`` accumulates transmission
    seconds of accepted tasks.  ``updated_through`` is the last task index
    that received a dual update: once the run halts, later tasks are
    rejected by the serve-in-order constraint without further bookkeeping.
    """

    nodes: tuple[EdgeNode, ...]
    n_tasks: int
    t_tot_s: float
    y: dict[tuple[int, int], int] = field(default_factory=dict)
    x: dict[int, float] = field(default_factory=dict)
    z: dict[int, float] = field(default_factory=dict)
    u: dict[int, float] = field(default_factory=dict)
    spent_tx_s: float = 0.0
    halted: bool = False
    dual_value: int = 0
    next_task: int = 1
    updated_through: int = 0

    @classmethod
    def for_scenario(cls, scenario: Scenario) -> "AllocState":
        return cls.initial(scenario.nodes, len(scenario.tasks), scenario.t_tot_s)

    @classmethod
    def initial(cls, nodes, n_tasks: int, t_tot_s: float) -> "AllocState":
        state = cls(nodes=tuple(nodes), n_tasks=n_tasks, t_tot_s=t_tot_s)
        for node in state.nodes:
            state.z[node.id] = 0.0
        for i in range(1, n_tasks + 1):
            state.u[i] = 0.0
        return state

    def assigned_node(self, task_index: int) -> int | None:
        for (i, j), v in self.y.items():
            if i == task_index and v == 1:
                return j
        return None

    def accepted_pairs(self) -> list[tuple[int, int]]:
        return sorted((i, j) for (i, j), v in self.y.items() if v == 1)


def select_node(state: AllocState, task: Task, nodes, cfg: AlgoConfig) -> int:
    """Pick the node maximizing (1 - z_j)**alpha / ((1/r_j + 1/f_j) d_i).

    Ties break toward the smallest node id.
    """
    if not nodes:
        raise ValueError("node set must be non-empty")
    best_id = None
    best_score = None
    for node in nodes:
        score = _load_pow(1.0 - state.z[node.id], cfg.alpha) / (
            node.unit_latency_s * task.size_bits
        )
        if best_score is None or score > best_score or (
            score == best_score and node.id < best_id
        ):
            best_id, best_score = node.id, score
    return best_id


def feasible(state: AllocState, task: Task, node: EdgeNode, t_tot_s: float) -> bool:
    """True iff the task fits the remaining budget on the given node.

    The budget check charges past accepted tasks their transmission time
    only and the candidate task its full transmission-plus-compute time;
    a halted run accepts nothing more.
    """
    if state.halted:
        return False
    return state.spent_tx_s + task.size_bits * node.unit_latency_s <= t_tot_s


def _add_to_prefix(state: AllocState, task_index: int, delta_u: float) -> None:
    if delta_u != 0.0:
        for i in range(1, task_index + 1):
            state.u[i] += delta_u


def accept_update(state: AllocState, task: Task, node: EdgeNode, cfg: AlgoConfig) -> StepOutcome:
    """Place the task on ``node`` and run the dual updates.

    Using the pre-update load z of the chosen node j*:
      x_i   = (1 - z)**alpha / ((1/r + 1/f) d_i)
      z_j*  = z (1 + beta) + beta / (c - 1),  beta = (1/r + 1/f) d_i / t_tot
      du_i  = max over other nodes j' of
              max(1 - [ (L_j'/L_j*) (1 - z)**alpha + z_j' ], 0)
    and du_i is added to u_1..u_i.
    """
    if not feasible(state, task, node, state.t_tot_s):
        raise ContractViolationError(
            f"accept_update called for infeasible task {task.index} on node {node.id}"
        )
    i = task.index
    z_old = state.z[node.id]
    latency = node.unit_latency_s
    loaded = _load_pow(1.0 - z_old, cfg.alpha)

    x_i = loaded / (latency * task.size_bits)
    delta_u = 0.0
    for other in state.nodes:
        if other.id == node.id:
            continue
        term = 1.0 - (other.unit_latency_s / latency * loaded + state.z[other.id])
        if term > delta_u:
            delta_u = term

    beta = latency * task.size_bits / state.t_tot_s
    state.y[(i, node.id)] = 1
    state.x[i] = x_i
    state.z[node.id] = z_old * (1.0 + beta) + beta / (cfg.c - 1.0)
    _add_to_prefix(state, i, delta_u)
    state.spent_tx_s += task.size_bits / node.rate_bps
    state.dual_value += 1
    state.next_task = i + 1
    state.updated_through = i
    return _snapshot(state, i, node.id, delta_u, x_i)


def reject_update(state: AllocState, task: Task) -> StepOutcome:
    """Reject the task and halt the run.

    The first rejection sets du_i = 1 on u_1..u_i, which restores primal
    feasibility for the rejected step.  Tasks arriving after the halt are
    rejected by the serve-in-order constraint alone and get no dual
    update (du = 0); the dual certificate covers tasks up to the halt.
    """
    i = task.index
    first = not state.halted
    state.halted = True
    delta_u = 0.0
    if first:
        delta_u = 1.0
        _add_to_prefix(state, i, delta_u)
        state.updated_through = i
    state.next_task = i + 1
    return _snapshot(state, i, None, delta_u, None)


def _snapshot(state, task_index, node_id, delta_u, x_value) -> StepOutcome:
    return StepOutcome(
        task_index=task_index,
        node_id=node_id,
        delta_u=delta_u,
        primal_value_after=primal_value(state, state.t_tot_s),
        dual_value_after=state.dual_value,
        x_value=x_value,
        z_after=dict(state.z),
        u_after=tuple(state.u[i] for i in range(1, state.n_tasks + 1)),
    )


def primal_value(state: AllocState, t_tot_s: float) -> float:
    """Objective of the covering program: sum t_tot x_i + sum z_j + u_1."""
    return (
        t_tot_s * sum(state.x.values())
        + sum(state.z.values())
        + state.u.get(1, 0.0)
    )


def dual_value(state: AllocState) -> int:
    """Objective of the packing program: the number of served tasks."""
    return state.dual_value


def min_primal_slack(state: AllocState, tasks, t_tot_s: float) -> float:
    """Smallest slack (LHS - 1) of the primal covering constraints.

    Evaluated for every task that has received a dual update and every
    node, with the current x, z, u values.  A sound run keeps this
    >= -tolerance after each update (the per-task constraint is
    ``(1/r + 1/f) d_i x_i + (d_i/r) sum_{i'>i} x_i' + z_j + u_i - u_{i+1}
    >= 1``, dropping the tail transmission term for the last task).
    """
    n = state.n_tasks
    worst = math.inf
    suffix = 0.0
    suffix_x = {n + 1: 0.0}
    for i in range(n, 0, -1):
        suffix += state.x.get(i, 0.0)
        suffix_x[i] = suffix
    for i in range(1, state.updated_through + 1):
        x_i = state.x.get(i, 0.0)
        d_i = tasks[i - 1].size_bits
        u_diff = state.u[i] - (state.u[i + 1] if i < n else 0.0)
        for node in state.nodes:
            lhs = node.unit_latency_s * d_i * x_i + state.z[node.id] + u_diff
            if i < n:
                lhs += d_i / node.rate_bps * suffix_x[i + 1]
            slack = lhs - 1.0
            if slack < worst:
                worst = slack
    return worst


def run_online(
    scenario: Scenario,
    cfg: AlgoConfig,
    check_invariants: bool = True,
    invariant_tol: float = 1e-9,
) -> tuple[AllocState, list[StepOutcome]]:
    """Run the engine over the scenario's task sequence.

    Tasks are consumed from an iterator so the decision logic structurally
    never sees a future task size.  With ``check_invariants`` the primal
    constraints are re-verified after every dual update and any violation
    raises :class:`PrimalInfeasibilityError`.
    """
    state = AllocState.for_scenario(scenario)
    outcomes: list[StepOutcome] = []
    seen: list[Task] = []
    for task in iter(scenario.tasks):
        seen.append(task)
        if state.halted:
            outcomes.append(reject_update(state, task))
            continue
        chosen = select_node(state, task, scenario.nodes, cfg)
        node = next(n for n in scenario.nodes if n.id == chosen)
        if feasible(state, task, node, scenario.t_tot_s):
            outcomes.append(accept_update(state, task, node, cfg))
        else:
            outcomes.append(reject_update(state, task))
        if check_invariants:
            slack = min_primal_slack(state, seen, scenario.t_tot_s)
            if slack < -invariant_tol:
                raise PrimalInfeasibilityError(
                    f"primal constraint violated by {-slack:.3e} after task {task.index}"
                )
    return state, outcomes
