"""Objective-preserving transformations between pilot assignment and
Min-k-Partition.

A system maps to a complete edge-weighted graph on its users whose edge
weights are the pairwise interference values, with the block count set
to the pilot count; a weighted graph maps back to a system in which each
vertex is served by its own dedicated AP and the fading matrix encodes
the edge weights (off-diagonal beta = sqrt(weight / 2)). Solutions
transfer by reading pilot labels as block labels and vice versa, and the
objective value is preserved without scaling in both directions.

Rational mode carries exact squared fading values through the
graph-to-system construction, so measure-equality certificates and
round trips can be checked with exact arithmetic instead of a floating
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .objective import contamination_objective, pairwise_interference
from .system_model import (
    CfMmimoSystem,
    PilotAssignment,
    _gamma_from_beta,
    validate_system,
)

__all__ = [
    "InvalidPartitionError",
    "WeightedGraph",
    "Partition",
    "MeasureEqualityReport",
    "mkp_objective",
    "pa_to_mkp",
    "mkp_to_pa",
    "pa_solution_to_mkp",
    "mkp_solution_to_pa",
    "coloring_to_mkp",
    "verify_measure_equality",
    "graphs_equal",
]

Weight = Union[int, float, Fraction]

DEFAULT_REL_TOL = 1e-9


class InvalidPartitionError(ValueError):
    """A vertex partition with an empty block or out-of-range labels."""


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected edge-weighted graph, the Min-k-Partition instance.

    weights maps unordered vertex pairs (stored with i < j) to
    nonnegative weights; absent pairs weigh 0. Weights may be int, float
    or Fraction; rational weights keep partition objectives exact.
    """

    n_vertices: int
    k_parts: int
    weights: dict[tuple[int, int], Weight]

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        if not 1 <= self.k_parts <= self.n_vertices:
            raise ValueError(
                f"k_parts={self.k_parts} must lie in [1, n_vertices={self.n_vertices}]"
            )
        norm: dict[tuple[int, int], Weight] = {}
        for (i, j), w in self.weights.items():
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop weight on vertex {i}")
            if not 0 <= i < self.n_vertices or not 0 <= j < self.n_vertices:
                raise ValueError(f"edge ({i}, {j}) out of range")
            if w < 0:
                raise ValueError(f"negative weight {w} on edge ({i}, {j})")
            key = (i, j) if i < j else (j, i)
            if key in norm and norm[key] != w:
                raise ValueError(f"conflicting weights for edge {key}")
            norm[key] = w
        object.__setattr__(self, "weights", norm)

    def weight(self, i: int, j: int) -> Weight:
        key = (i, j) if i < j else (j, i)
        return self.weights.get(key, 0)


@dataclass(frozen=True)
class Partition:
    """Assignment of vertices to blocks 0..n_blocks-1, all blocks nonempty."""

    block_of: tuple[int, ...]
    n_blocks: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "block_of", tuple(int(b) for b in self.block_of))
        if self.n_blocks < 1:
            raise InvalidPartitionError("need at least one block")
        seen = set()
        for b in self.block_of:
            if not 0 <= b < self.n_blocks:
                raise InvalidPartitionError(
                    f"block label {b} out of range [0, {self.n_blocks})"
                )
            seen.add(b)
        if len(seen) != self.n_blocks:
            empty = sorted(set(range(self.n_blocks)) - seen)
            raise InvalidPartitionError(f"blocks {empty} are empty")

    @property
    def n_vertices(self) -> int:
        return len(self.block_of)


def mkp_objective(g: WeightedGraph, p: Partition) -> Weight:
    """Total weight of edges with both endpoints in the same block."""
    if p.n_vertices != g.n_vertices:
        raise ValueError(
            f"partition covers {p.n_vertices} vertices, graph has {g.n_vertices}"
        )
    if p.n_blocks != g.k_parts:
        raise ValueError(
            f"block count mismatch: partition has {p.n_blocks}, graph wants {g.k_parts}"
        )
    blocks = p.block_of
    total: Weight = 0
    for (i, j) in sorted(g.weights):
        if blocks[i] == blocks[j]:
            total += g.weights[(i, j)]
    return total


def pa_to_mkp(s: CfMmimoSystem, exact: bool = False) -> WeightedGraph:
    """Reduce a system to its interference graph.

    Complete graph on the users (zero-weight edges kept explicit), edge
    weight equal to the pairwise interference, block count equal to the
    pilot count.
    """
    result = validate_system(s)
    if not result.ok:
        raise ValueError("invalid system: " + "; ".join(result.violations))
    weights: dict[tuple[int, int], Weight] = {}
    for i in range(s.k_users):
        for j in range(i + 1, s.k_users):
            weights[(i, j)] = pairwise_interference(s, i, j, exact=exact)
    return WeightedGraph(s.k_users, s.tau_pilots, weights)


def mkp_to_pa(
    g: WeightedGraph, n_dummy_aps: int = 0, exact: bool = False
) -> CfMmimoSystem:
    """Build a system whose assignment objective replays the graph's.

    Vertex i becomes user i served by the dedicated AP i, with
    beta[i, i] = 1, beta[i, j] = sqrt(weight(i, j) / 2) for the other
    in-range APs, and 0 on the optional dummy AP columns (zero columns
    change nothing measurable; a positive n_dummy_aps mimics deployments
    with many more APs than users). Radio parameters are inert defaults:
    the contamination objective never reads them. With ``exact=True`` the
    exact rational values weight/2 of the squared off-diagonal entries
    ride along so downstream certificates avoid square-root rounding.
    """
    if n_dummy_aps < 0:
        raise ValueError("n_dummy_aps must be nonnegative")
    n = g.n_vertices
    m = n + n_dummy_aps
    beta = np.zeros((n, m))
    for i in range(n):
        beta[i, i] = 1.0
    for (i, j), w in g.weights.items():
        val = math.sqrt(float(w) / 2.0)
        beta[i, j] = val
        beta[j, i] = val

    bsq = None
    if exact:
        rows = [[Fraction(0)] * m for _ in range(n)]
        for i in range(n):
            rows[i][i] = Fraction(1)
        for (i, j), w in g.weights.items():
            half = (Fraction(w) if isinstance(w, (int, Fraction)) else Fraction(float(w))) / 2
            rows[i][j] = half
            rows[j][i] = half
        bsq = tuple(tuple(r) for r in rows)

    tau = g.k_parts
    return CfMmimoSystem(
        m_aps=m,
        k_users=n,
        tau_pilots=tau,
        beta=beta,
        serving_sets=tuple((i,) for i in range(n)),
        gamma=_gamma_from_beta(beta, 1.0, tau),
        eta=np.ones(n),
        rho_u=1.0,
        tau_c=2 * tau,
        beta_sq_exact=bsq,
    )


def pa_solution_to_mkp(a: PilotAssignment) -> Partition:
    """Read pilot labels as block labels (feasible in, valid out)."""
    return Partition(a.pilot_of, a.n_pilots)


def mkp_solution_to_pa(p: Partition) -> PilotAssignment:
    """Read block labels as pilot labels; nonempty blocks give surjectivity."""
    return PilotAssignment(p.block_of, p.n_blocks)


def coloring_to_mkp(
    n_vertices: int, edges: Iterable[tuple[int, int]], k_parts: int
) -> WeightedGraph:
    """Unit-weight graph whose k-partition optimum is 0 iff the graph is
    k-colourable (a zero optimum means every edge is cut, i.e. every block
    is an independent set)."""
    weights: dict[tuple[int, int], Weight] = {}
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop on vertex {u}: input must be a simple graph")
        weights[(u, v) if u < v else (v, u)] = 1
    return WeightedGraph(n_vertices, k_parts, weights)


@dataclass(frozen=True)
class MeasureEqualityReport:
    """Outcome of checking that the graph-side objective replays the
    assignment-side objective on a reduced pair."""

    m_pa: Weight
    m_mkp: Weight
    abs_diff: float
    rel_diff: float
    passed: bool
    mode: str


def verify_measure_equality(
    s: CfMmimoSystem,
    a: PilotAssignment,
    exact: bool = False,
    rel_tol: float = DEFAULT_REL_TOL,
    graph: WeightedGraph | None = None,
) -> MeasureEqualityReport:
    """Certify that reducing (system, assignment) preserves the objective.

    Computes the contamination objective directly and the partition
    objective of the reduced (graph, partition) pair, then compares:
    within rel_tol in float mode, exactly in rational mode. ``graph``
    overrides the reduction output, which lets callers probe corrupted
    reductions; by default the graph is derived from the system.
    """
    if graph is None:
        graph = pa_to_mkp(s, exact=exact)
    m_pa = contamination_objective(s, a, exact=exact)
    m_mkp = mkp_objective(graph, pa_solution_to_mkp(a))
    abs_diff = abs(float(m_pa) - float(m_mkp))
    scale = max(abs(float(m_pa)), abs(float(m_mkp)))
    rel_diff = abs_diff / scale if scale > 0 else 0.0
    if exact:
        passed = m_pa == m_mkp
    else:
        passed = rel_diff <= rel_tol
    return MeasureEqualityReport(
        m_pa=m_pa,
        m_mkp=m_mkp,
        abs_diff=abs_diff,
        rel_diff=rel_diff,
        passed=passed,
        mode="rational" if exact else "float",
    )


def graphs_equal(g1: WeightedGraph, g2: WeightedGraph, check_parts: bool = True) -> bool:
    """Equality of graphs as weight functions (absent edge == weight 0)."""
    if g1.n_vertices != g2.n_vertices:
        return False
    if check_parts and g1.k_parts != g2.k_parts:
        return False
    for key in g1.weights.keys() | g2.weights.keys():
        if g1.weights.get(key, 0) != g2.weights.get(key, 0):
            return False
    return True
