"""Exact offline optimum for the prefix task-placement problem.

With every task size known in advance, the offline optimum is the longest
task prefix that can be placed on pairwise-distinct nodes within the time
budget.  A depth-first branch-and-bound finds it exactly; a brute-force
enumerator over all injective prefix assignments serves as its test oracle.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import Scenario

# exact search is intended for desk-scale instances
MAX_SEARCH_SIZE = 12
MAX_ENUM_SIZE = 8


class OracleLimitError(RuntimeError):
    """Instance exceeds the practical bound of the exact search."""


@dataclass(frozen=True)
class OfflineSolution:
    """Result of the exact search.

    ``k_opt`` is the maximum number of served tasks (always the prefix
    1..k_opt); ``assignment`` maps each served task index to its node id,
    injectively.  Among assignments achieving ``k_opt`` the returned one
    minimizes total transmission time (``total_tx_s``), which keeps the
    output deterministic.  ``explored_nodes`` counts search-tree
    expansions (0 when a shortcut certified the optimum without search).
    """

    k_opt: int
    assignment: dict[int, int]
    explored_nodes: int
    total_tx_s: float

    def to_dict(self) -> dict:
        return {
            "k_opt": self.k_opt,
            "assignment": {str(k): v for k, v in sorted(self.assignment.items())},
            "explored_nodes": self.explored_nodes,
            "total_tx_s": self.total_tx_s,
        }


def _problem_arrays(scenario: Scenario):
    sizes = [t.size_bits for t in scenario.tasks]
    ids = [n.id for n in scenario.nodes]
    inv_r = [1.0 / n.rate_bps for n in scenario.nodes]
    latency = [n.unit_latency_s for n in scenario.nodes]
    return sizes, ids, inv_r, latency


def _prefix_tx(sizes, inv_r, latency, assign, t_tot):
    """Total tx time of a full prefix assignment, or None if infeasible."""
    spent = 0.0
    for i, j in enumerate(assign):
        if spent + sizes[i] * latency[j] > t_tot:
            return None
        spent += sizes[i] * inv_r[j]
    return spent


def offline_optimal(scenario: Scenario) -> OfflineSolution:
    """Exact offline optimum via depth-first branch-and-bound.

    Tasks are placed in arrival order on unused nodes.  The search keeps
    an incumbent (count, total tx), seeded by a greedy warm start, and
    prunes with:

    - an optimistic completion bound that pairs the largest remaining
      sizes with the fastest unused links (plus the cheapest compute term
      for the last counted task);
    - a dominance table mapping each used-node set to the smallraft
      transmission total it was reached with;
    - a minimum-cost assignment shortcut: when the globally cheapest
      (by total tx) full assignment is prefix-feasible it is optimal
      outright and no search runs.

    Raises OracleLimitError beyond desk scale (I or J > 12).
    """
    n_tasks = len(scenario.tasks)
    n_nodes = len(scenario.nodes)
    if n_tasks > MAX_SEARCH_SIZE or n_nodes > MAX_SEARCH_SIZE:
        raise OracleLimitError(
            f"instance {n_tasks}x{n_nodes} exceeds the exact-search bound "
            f"of {MAX_SEARCH_SIZE}; the search would not complete at desk scale"
        )
    sizes, ids, inv_r, latency = _problem_arrays(scenario)
    t_tot = scenario.t_tot_s

    # fastest-link-first exploration order finds low-tx completions early
    order = sorted(range(n_nodes), key=lambda j: (inv_r[j], ids[j]))
    min_inv_f = min(1.0 / n.cpu_bps for n in scenario.nodes)

    if n_tasks <= n_nodes:
        cost = np.outer(sizes, inv_r)
        rows, cols = linear_sum_assignment(cost)
        cheapest = [int(c) for _, c in sorted(zip(rows.tolist(), cols.tolist()))]
        spent = _prefix_tx(sizes, inv_r, latency, cheapest, t_tot)
        if spent is not None:
            # no fuller solution exists and no k_opt solution has less tx
            return OfflineSolution(
                k_opt=n_tasks,
                assignment={i + 1: ids[j] for i, j in enumerate(cheapest)},
                explored_nodes=0,
                total_tx_s=spent,
            )

    # greedy warm start: cheapest feasible unused link per task
    warm: list[int] = []
    spent, used = 0.0, 0
    for i in range(n_tasks):
        pick = -1
        for j in order:
            if not used >> j & 1 and spent + sizes[i] * latency[j] <= t_tot:
                pick = j
                break
        if pick < 0:
            break
        spent += sizes[i] * inv_r[pick]
        used |= 1 << pick
        warm.append(pick)

    best = {"k": len(warm), "tx": spent if warm else 0.0, "assign": list(warm)}
    dominated: dict[int, float] = {}
    explored = 0
    path: list[int] = []

    def search(i: int, spent: float, used: int) -> None:
        nonlocal explored
        explored += 1
        if i > best["k"] or (i == best["k"] and spent < best["tx"]):
            best["k"], best["tx"], best["assign"] = i, spent, list(path)
        if i == n_tasks:
            return
        prev = dominated.get(used)
        if prev is not None and prev <= spent:
            return
        dominated[used] = spent

        free = sorted(inv_r[j] for j in range(n_nodes) if not used >> j & 1)
        reach = min(n_tasks - i, len(free))
        if not free or i + reach < best["k"]:
            return
        # optimistic bound: pair largest remaining sizes with fastest free links
        budget = t_tot - spent
        neg_sizes: list[float] = []
        extra = 0
        full_tx_bound = None
        for step in range(reach):
            bisect.insort(neg_sizes, -sizes[i + step])
            pair_tx = 0.0
            for q in range(len(neg_sizes)):
                pair_tx -= neg_sizes[q] * free[q]
            if pair_tx + sizes[i + step] * min_inv_f <= budget:
                extra = step + 1
            if step == reach - 1:
                full_tx_bound = pair_tx
        if i + extra < best["k"]:
            return
        if i + extra == best["k"]:
            # only the tx objective can improve; needs a full-length finish
            if i + reach < best["k"]:
                return
            if spent + full_tx_bound >= best["tx"]:
                return
        for j in order:
            if used >> j & 1:
                continue
            if spent + sizes[i] * latency[j] <= t_tot:
                path.append(j)
                search(i + 1, spent + sizes[i] * inv_r[j], used | 1 << j)
                path.pop()

    search(0, 0.0, 0)
    return OfflineSolution(
        k_opt=best["k"],
        assignment={i + 1: ids[j] for i, j in enumerate(best["assign"][: best["k"]])},
        explored_nodes=explored,
        total_tx_s=best["tx"] if best["k"] else 0.0,
    )


def enumerate_all(scenario: Scenario) -> OfflineSolution:
    """Brute-force test oracle: try every injective prefix assignment.

    Same result contract as :func:`offline_optimal`; guarded to tiny
    instances (I, J <= 8) since the cost is sum_k J!/(J-k)!.
    """
    n_tasks = len(scenario.tasks)
    n_nodes = len(scenario.nodes)
    if n_tasks > MAX_ENUM_SIZE or n_nodes > MAX_ENUM_SIZE:
        raise OracleLimitError(
            f"instance {n_tasks}x{n_nodes} exceeds the enumeration bound of {MAX_ENUM_SIZE}"
        )
    sizes, ids, inv_r, latency = _problem_arrays(scenario)
    t_tot = scenario.t_tot_s

    checked = 0
    for k in range(min(n_tasks, n_nodes), 0, -1):
        best_tx = None
        best_assign = None
        for perm in itertools.permutations(range(n_nodes), k):
            checked += 1
            spent = _prefix_tx(sizes[:k], inv_r, latency, perm, t_tot)
            if spent is not None and (best_tx is None or spent < best_tx):
                best_tx, best_assign = spent, perm
        if best_assign is not None:
            return OfflineSolution(
                k_opt=k,
                assignment={i + 1: ids[j] for i, j in enumerate(best_assign)},
                explored_nodes=checked,
                total_tx_s=best_tx,
            )
    return OfflineSolution(k_opt=0, assignment={}, explored_nodes=checked, total_tx_s=0.0)
