"""Assignment solvers: exact enumeration at desk scale plus baselines.

The exact solver enumerates every surjective assignment as a base-tau
counter (lexicographic order, giving reproducible tie-breaks) and is the
oracle the heuristics are measured against. The heuristics re-implement
the simple schemes common in the pilot-assignment literature: uniform
random assignment, linear-time greedy feasibility, iterative improvement
of the worst user's rate, and steepest-descent local search on the
reduced interference graph.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .objective import contamination_objective, pairwise_interference
from .reductions import Partition, WeightedGraph, pa_to_mkp
from .system_model import (
    CfMmimoSystem,
    PilotAssignment,
    check_assignment,
    system_throughput,
    uplink_rate,
)

__all__ = [
    "BudgetExceededError",
    "SolveReport",
    "PartitionSolveReport",
    "DEFAULT_BUDGET",
    "count_surjective_assignments",
    "brute_force_exact",
    "brute_force_partition",
    "decide",
    "greedy_feasible",
    "random_feasible",
    "greedy_worst_user",
    "local_search_move",
]

Value = Union[float, Fraction]

# Strong NP-hardness rules out cheap exactness at scale; refuse loudly
# rather than run for hours. 2e6 assignments is roughly K=21 at tau=2.
DEFAULT_BUDGET = 2_000_000


class BudgetExceededError(RuntimeError):
    """Exact enumeration would visit more assignments than allowed."""


@dataclass(frozen=True)
class SolveReport:
    """Solver output; objective always matches a recomputation of the
    contamination objective on the reported assignment."""

    assignment: PilotAssignment
    objective: Value
    throughput: float
    solver_name: str
    iterations: int
    elapsed_seconds: float
    optimality_certificate: str  # "exact" | "heuristic"


@dataclass(frozen=True)
class PartitionSolveReport:
    partition: Partition
    objective: Value
    iterations: int
    elapsed_seconds: float
    optimality_certificate: str


def count_surjective_assignments(k_users: int, n_pilots: int) -> int:
    """Number of surjections from k_users onto n_pilots, by inclusion-exclusion."""
    return sum(
        (-1) ** i * math.comb(n_pilots, i) * (n_pilots - i) ** k_users
        for i in range(n_pilots + 1)
    )


def _scaled_int_pairs(pairs):
    """Rescale rational pair weights to integers; returns (pairs, denominator)."""
    denom = 1
    for _, _, w in pairs:
        denom = math.lcm(denom, Fraction(w).denominator)
    scaled = [(i, j, int(Fraction(w) * denom)) for i, j, w in pairs]
    return scaled, denom


def _min_over_surjections(n: int, k: int, pairs, budget: int):
    """Minimize the same-label pair-weight sum over surjective labelings.

    pairs is a list of (i, j, w); zero-weight pairs may be omitted by the
    caller. Returns (best value, best labeling, surjections visited); the
    labeling is the lexicographically smallest optimum because candidates
    are enumerated in lexicographic order and replaced only on strict
    improvement.
    """
    total = count_surjective_assignments(n, k)
    if total > budget:
        raise BudgetExceededError(
            f"exact enumeration needs {total} assignments, budget is {budget}"
        )
    best_val = None
    best = None
    visited = 0
    for cand in itertools.product(range(k), repeat=n):
        if len(set(cand)) != k:
            continue
        visited += 1
        v = 0
        for i, j, w in pairs:
            if cand[i] == cand[j]:
                v += w
        if best_val is None or v < best_val:
            best_val = v
            best = cand
    return best_val, best, visited


def _interference_pairs(s: CfMmimoSystem, exact: bool):
    pairs = []
    for i in range(s.k_users):
        for j in range(i + 1, s.k_users):
            w = pairwise_interference(s, i, j, exact=exact)
            if w != 0:
                pairs.append((i, j, w))
    return pairs


def brute_force_exact(
    s: CfMmimoSystem, budget: int = DEFAULT_BUDGET, exact: bool = False
) -> SolveReport:
    """Global minimizer of the contamination objective by full enumeration.

    Visits exactly tau! * S2(K, tau) surjective assignments (S2 is the
    Stirling number of the second kind) and reports the lexicographically
    smallest optimum. Raises BudgetExceededError, with the required
    count, when the space is larger than budget; never truncates
    silently. ``exact=True`` evaluates in rational arithmetic.
    """
    t0 = time.perf_counter()
    pairs = _interference_pairs(s, exact)
    denom = 1
    if exact:
        pairs, denom = _scaled_int_pairs(pairs)
    best_val, best, visited = _min_over_surjections(
        s.k_users, s.tau_pilots, pairs, budget
    )
    assignment = PilotAssignment(best, s.tau_pilots)
    objective: Value = Fraction(best_val, denom) if exact else float(best_val)
    return SolveReport(
        assignment=assignment,
        objective=objective,
        throughput=system_throughput(s, assignment),
        solver_name="brute",
        iterations=visited,
        elapsed_seconds=time.perf_counter() - t0,
        optimality_certificate="exact",
    )


def brute_force_partition(
    g: WeightedGraph, budget: int = DEFAULT_BUDGET
) -> PartitionSolveReport:
    """Exact Min-k-Partition by enumeration of surjective labelings.

    Exact whenever the graph's weights are int or Fraction (they are
    rescaled to integers internally); float weights are summed as floats.
    """
    t0 = time.perf_counter()
    pairs = [(i, j, w) for (i, j), w in sorted(g.weights.items()) if w != 0]
    denom = 1
    rational = all(isinstance(w, (int, Fraction)) for _, _, w in pairs)
    if rational:
        pairs, denom = _scaled_int_pairs(pairs)
    best_val, best, visited = _min_over_surjections(
        g.n_vertices, g.k_parts, pairs, budget
    )
    objective: Value = (
        Fraction(best_val, denom) if rational else float(best_val)
    )
    return PartitionSolveReport(
        partition=Partition(best, g.k_parts),
        objective=objective,
        iterations=visited,
        elapsed_seconds=time.perf_counter() - t0,
        optimality_certificate="exact",
    )


def decide(s: CfMmimoSystem, q, budget: int = DEFAULT_BUDGET) -> bool:
    """Decision form: is the optimal contamination at most q?

    Runs in rational arithmetic whenever the system carries an exact
    beta-square payload, so threshold comparisons on reduced instances
    are not at the mercy of square-root rounding.
    """
    if q < 0:
        raise ValueError(f"threshold must be nonnegative, got {q}")
    exact = s.beta_sq_exact is not None
    report = brute_force_exact(s, budget=budget, exact=exact)
    return report.objective <= q


def greedy_feasible(
    s: CfMmimoSystem, rng: Optional[random.Random] = None
) -> PilotAssignment:
    """Feasible assignment in O(K) time.

    Picks tau - 1 users for the first tau - 1 pilots (users 0..tau-2 in
    the deterministic default, random distinct users when rng is given)
    and parks everyone else on the last pilot.
    """
    k, tau = s.k_users, s.tau_pilots
    if tau > k:
        raise ValueError(f"pilot count {tau} exceeds user count {k}")
    pilots = [tau - 1] * k
    leaders = rng.sample(range(k), tau - 1) if rng is not None else range(tau - 1)
    for pilot, user in enumerate(leaders):
        pilots[user] = pilot
    return PilotAssignment(tuple(pilots), tau)


def random_feasible(s: CfMmimoSystem, seed: int) -> PilotAssignment:
    """Uniform draw over feasible assignments.

    Rejection-samples uniform labelings until one is surjective, which
    leaves the uniform distribution on the surjections; deterministic
    for a given seed.
    """
    k, tau = s.k_users, s.tau_pilots
    if tau > k:
        raise ValueError(f"pilot count {tau} exceeds user count {k}")
    rng = random.Random(seed)
    while True:
        cand = [rng.randrange(tau) for _ in range(k)]
        if len(set(cand)) == tau:
            return PilotAssignment(tuple(cand), tau)


def _all_rates(s: CfMmimoSystem, a: PilotAssignment) -> list[float]:
    return [uplink_rate(s, a, k) for k in range(s.k_users)]


def greedy_worst_user(
    s: CfMmimoSystem, init: PilotAssignment, max_rounds: int = 100
) -> SolveReport:
    """Iteratively re-pilot the worst user to the pilot that helps it most.

    Each round finds the user with the minimum uplink rate, moves it to
    the surjectivity-preserving pilot maximizing its own rate, and keeps
    the move only if the system-wide worst rate strictly improves; stops
    at the first rejected move or after max_rounds accepted ones. The
    worst-user rate is therefore non-decreasing from init to output.
    """
    check_assignment(s, init)
    t0 = time.perf_counter()
    tau, k_users = s.tau_pilots, s.k_users
    current = init
    rates = _all_rates(s, current)
    accepted = 0
    while accepted < max_rounds:
        worst = min(range(k_users), key=lambda k: (rates[k], k))
        group_size = sum(1 for p in current.pilot_of if p == current.pilot_of[worst])
        if group_size < 2:
            break  # moving the worst user would empty its pilot
        best_rate = rates[worst]
        best_pilot = None
        for p in range(tau):
            if p == current.pilot_of[worst]:
                continue
            cand = list(current.pilot_of)
            cand[worst] = p
            cand_a = PilotAssignment(tuple(cand), tau)
            r = uplink_rate(s, cand_a, worst)
            if r > best_rate:
                best_rate = r
                best_pilot = p
        if best_pilot is None:
            break
        cand = list(current.pilot_of)
        cand[worst] = best_pilot
        cand_a = PilotAssignment(tuple(cand), tau)
        cand_rates = _all_rates(s, cand_a)
        if min(cand_rates) > min(rates):
            current, rates = cand_a, cand_rates
            accepted += 1
        else:
            break
    return SolveReport(
        assignment=current,
        objective=contamination_objective(s, current),
        throughput=sum(rates),
        solver_name="worst-user",
        iterations=accepted,
        elapsed_seconds=time.perf_counter() - t0,
        optimality_certificate="heuristic",
    )


def local_search_move(
    s: CfMmimoSystem,
    init: PilotAssignment,
    max_iters: int = 10_000,
    seed: Optional[int] = None,
) -> SolveReport:
    """Steepest-descent single-user moves on the reduced graph objective.

    At each step evaluates every surjectivity-preserving move of one user
    to another pilot, applies the move with the most negative objective
    change (ties: lowest user, then lowest pilot), and stops at a local
    optimum or after max_iters moves. The objective never increases. The
    search is deterministic; seed is accepted for interface symmetry with
    the randomized solvers and is currently unused.
    """
    del seed
    check_assignment(s, init)
    t0 = time.perf_counter()
    graph = pa_to_mkp(s)
    k_users, tau = s.k_users, s.tau_pilots
    w = [[0.0] * k_users for _ in range(k_users)]
    for (i, j), wij in graph.weights.items():
        w[i][j] = w[j][i] = float(wij)

    def objective_of(labels: Sequence[int]) -> float:
        total = 0.0
        for i in range(k_users):
            li = labels[i]
            row = w[i]
            for j in range(i + 1, k_users):
                if labels[j] == li:
                    total += row[j]
        return total

    labels = list(init.pilot_of)
    group = [0] * tau
    for p in labels:
        group[p] += 1
    cur = objective_of(labels)
    moves = 0
    while moves < max_iters:
        best_delta = 0.0
        best_move = None
        for k in range(k_users):
            if group[labels[k]] < 2:
                continue
            row = w[k]
            stay = sum(row[j] for j in range(k_users) if j != k and labels[j] == labels[k])
            for p in range(tau):
                if p == labels[k]:
                    continue
                go = sum(row[j] for j in range(k_users) if labels[j] == p)
                delta = go - stay
                if delta < best_delta:
                    best_delta = delta
                    best_move = (k, p)
        if best_move is None:
            break
        k, p = best_move
        trial = list(labels)
        trial[k] = p
        new = objective_of(trial)
        if new >= cur:  # float re-association guard; keeps descent strict
            break
        group[labels[k]] -= 1
        group[p] += 1
        labels, cur = trial, new
        moves += 1

    final = PilotAssignment(tuple(labels), tau)
    return SolveReport(
        assignment=final,
        objective=contamination_objective(s, final),
        throughput=system_throughput(s, final),
        solver_name="local-search",
        iterations=moves,
        elapsed_seconds=time.perf_counter() - t0,
        optimality_certificate="heuristic",
    )
