"""Pilot-contamination objective.

The cost of a feasible assignment is the total interference between
users forced to share a pilot:

    sum over unordered co-pilot pairs {k, k'} of w(k, k'),

    w(k, k') = sum_{m in A(k)} (beta[k', m] / beta[k, m])**2
             + sum_{m' in A(k')} (beta[k, m'] / beta[k', m'])**2.

Each co-pilot pair is counted exactly once with its full symmetric
weight; the equivalent ordered form (summing user by user over co-pilot
partners, one side at a time) reaches the same total because each pair
then contributes its two one-sided terms separately.

All functions accept ``exact=True`` to run in rational arithmetic, used
by the reduction verifier.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .system_model import (
    CfMmimoSystem,
    PilotAssignment,
    check_assignment,
    exact_beta_squares,
)

__all__ = [
    "ContaminationReport",
    "co_pilot_set",
    "pairwise_interference",
    "contamination_objective",
    "contamination_report",
]

Weight = Union[float, Fraction]


def co_pilot_set(a: PilotAssignment, k: int) -> set[int]:
    """Users sharing user k's pilot, excluding k itself."""
    if not 0 <= k < a.n_users:
        raise IndexError(f"user index {k} out of range [0, {a.n_users})")
    pk = a.pilot_of[k]
    return {j for j, p in enumerate(a.pilot_of) if p == pk and j != k}


def _one_sided(s: CfMmimoSystem, k: int, other: int) -> float:
    ratios = s.beta[other, list(s.serving_sets[k])] / s.beta[k, list(s.serving_sets[k])]
    return float((ratios * ratios).sum())


def _one_sided_exact(bsq, serving, k: int, other: int) -> Fraction:
    total = Fraction(0)
    row_o, row_k = bsq[other], bsq[k]
    for m in serving[k]:
        total += row_o[m] / row_k[m]
    return total


def pairwise_interference(
    s: CfMmimoSystem, k: int, k2: int, exact: bool = False
) -> Weight:
    """Symmetric interference weight between two distinct users.

    Zero exactly when neither user has a positive fading coefficient on
    the other's serving set.
    """
    if k == k2:
        raise ValueError(f"pair weight needs two distinct users, got k = k' = {k}")
    for u in (k, k2):
        if not 0 <= u < s.k_users:
            raise IndexError(f"user index {u} out of range [0, {s.k_users})")
    if exact:
        bsq = exact_beta_squares(s)
        return _one_sided_exact(bsq, s.serving_sets, k, k2) + _one_sided_exact(
            bsq, s.serving_sets, k2, k
        )
    return _one_sided(s, k, k2) + _one_sided(s, k2, k)


def contamination_objective(
    s: CfMmimoSystem, a: PilotAssignment, exact: bool = False
) -> Weight:
    """Total contamination of a feasible assignment (lower is better)."""
    check_assignment(s, a)
    total: Weight = Fraction(0) if exact else 0.0
    pilots = a.pilot_of
    for i in range(s.k_users):
        for j in range(i + 1, s.k_users):
            if pilots[i] == pilots[j]:
                total += pairwise_interference(s, i, j, exact=exact)
    return total


@dataclass(frozen=True)
class ContaminationReport:
    """Objective value with its per-pair and per-user breakdown.

    per_pair maps each co-pilot pair (i, j), i < j, to its symmetric
    weight; total is their sum. per_user[k] sums the symmetric weights of
    all pairs involving k, so the per-user vector counts every pair twice
    and total equals half its sum.
    """

    total: float
    per_pair: dict[tuple[int, int], float]
    per_user: tuple[float, ...]

    def to_csv(self) -> str:
        lines = ["pair_i,pair_j,weight"]
        for (i, j), w in sorted(self.per_pair.items()):
            lines.append(f"{i},{j},{w!r}")
        lines.append(f"total,,{self.total!r}")
        return "\n".join(lines) + "\n"


def contamination_report(s: CfMmimoSystem, a: PilotAssignment) -> ContaminationReport:
    """Evaluate the objective and keep the pairwise breakdown."""
    check_assignment(s, a)
    per_pair: dict[tuple[int, int], float] = {}
    per_user = [0.0] * s.k_users
    total = 0.0
    for i in range(s.k_users):
        for j in range(i + 1, s.k_users):
            if a.pilot_of[i] == a.pilot_of[j]:
                w = pairwise_interference(s, i, j)
                per_pair[(i, j)] = w
                per_user[i] += w
                per_user[j] += w
                total += w
    return ContaminationReport(total=total, per_pair=per_pair, per_user=tuple(per_user))
