"""Versioned text formats for instances, graphs, assignments, partitions.

All formats are line-oriented, diffable, and 0-indexed. Blank lines and
lines starting with ``#`` are ignored. Floats are written with their
shortest round-trip representation, so parse(serialize(x)) is
value-exact; graph weights may also be integers or rationals ``p/q``.

pa-instance/1            mkp-graph/1          pa-assignment/1
    pa-instance/1            mkp-graph/1          pa-assignment/1
    aps 4                    vertices 3           users 3
    users 2                  parts 2              pilots 2
    pilots 2                 edge 0 1 1           assign 0 1 0
    rho_u 100.0              edge 1 2 1/2
    tau_c 200                                 mkp-partition/1
    eta 1.0 1.0          (omitted edge            mkp-partition/1
    serve 0 1             weights default          vertices 3
    serve 2 3             to 1)                    parts 2
    beta <M floats> x K                            assign 0 1 0
    gamma <M floats> x K
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from .reductions import Partition, WeightedGraph
from .system_model import CfMmimoSystem, PilotAssignment

__all__ = [
    "FormatError",
    "format_instance",
    "parse_instance",
    "format_graph",
    "parse_graph",
    "format_assignment",
    "parse_assignment",
    "format_partition",
    "parse_partition",
    "read_instance",
    "write_instance",
    "read_graph",
    "write_graph",
    "read_assignment",
    "write_assignment",
    "read_partition",
    "write_partition",
]

INSTANCE_MAGIC = "pa-instance/1"
GRAPH_MAGIC = "mkp-graph/1"
ASSIGNMENT_MAGIC = "pa-assignment/1"
PARTITION_MAGIC = "mkp-partition/1"


class FormatError(ValueError):
    """Malformed or mismatched input text."""


def _fmt_float(x) -> str:
    return repr(float(x))


def _fmt_weight(w) -> str:
    if isinstance(w, Fraction):
        return f"{w.numerator}/{w.denominator}"
    if isinstance(w, int):
        return str(w)
    return _fmt_float(w)


def _parse_weight(token: str):
    if "/" in token:
        try:
            return Fraction(token)
        except (ValueError, ZeroDivisionError) as e:
            raise FormatError(f"bad rational weight {token!r}") from e
    try:
        if any(c in token for c in ".eE") or token in ("inf", "nan"):
            return float(token)
        return int(token)
    except ValueError as e:
        raise FormatError(f"bad weight {token!r}") from e


class _Lines:
    def __init__(self, text: str, magic: str):
        self.rows = [
            ln.strip()
            for ln in text.splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")
        ]
        self.pos = 0
        if not self.rows or self.rows[0] != magic:
            found = self.rows[0] if self.rows else "<empty>"
            raise FormatError(f"expected header {magic!r}, found {found!r}")
        self.pos = 1

    def next(self, key: str) -> list[str]:
        if self.pos >= len(self.rows):
            raise FormatError(f"unexpected end of input, expected {key!r} line")
        parts = self.rows[self.pos].split()
        if parts[0] != key:
            raise FormatError(f"expected {key!r} line, found {self.rows[self.pos]!r}")
        self.pos += 1
        return parts[1:]

    def peek_key(self) -> str | None:
        if self.pos >= len(self.rows):
            return None
        return self.rows[self.pos].split()[0]

    def done(self) -> None:
        if self.pos != len(self.rows):
            raise FormatError(f"trailing content: {self.rows[self.pos]!r}")


def _ints(tokens: list[str], what: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise FormatError(f"bad integer in {what}: {tokens}") from e


def _floats(tokens: list[str], what: str) -> list[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError as e:
        raise FormatError(f"bad float in {what}: {tokens}") from e


def _one_int(tokens: list[str], what: str) -> int:
    vals = _ints(tokens, what)
    if len(vals) != 1:
        raise FormatError(f"expected one integer for {what}, got {tokens}")
    return vals[0]


def format_instance(s: CfMmimoSystem) -> str:
    out = [INSTANCE_MAGIC]
    out.append(f"aps {s.m_aps}")
    out.append(f"users {s.k_users}")
    out.append(f"pilots {s.tau_pilots}")
    out.append(f"rho_u {_fmt_float(s.rho_u)}")
    out.append(f"tau_c {s.tau_c}")
    out.append("eta " + " ".join(_fmt_float(e) for e in s.eta))
    for aps in s.serving_sets:
        out.append("serve " + " ".join(str(m) for m in aps))
    for row in s.beta:
        out.append("beta " + " ".join(_fmt_float(b) for b in row))
    for row in s.gamma:
        out.append("gamma " + " ".join(_fmt_float(g) for g in row))
    return "\n".join(out) + "\n"


def parse_instance(text: str) -> CfMmimoSystem:
    ln = _Lines(text, INSTANCE_MAGIC)
    m = _one_int(ln.next("aps"), "aps")
    k = _one_int(ln.next("users"), "users")
    tau = _one_int(ln.next("pilots"), "pilots")
    rho_u = _floats(ln.next("rho_u"), "rho_u")
    if len(rho_u) != 1:
        raise FormatError("rho_u wants exactly one value")
    tau_c = _one_int(ln.next("tau_c"), "tau_c")
    eta = _floats(ln.next("eta"), "eta")
    if len(eta) != k:
        raise FormatError(f"eta has {len(eta)} entries for {k} users")
    serving = []
    for _ in range(k):
        serving.append(tuple(_ints(ln.next("serve"), "serve")))
    beta = []
    for _ in range(k):
        row = _floats(ln.next("beta"), "beta")
        if len(row) != m:
            raise FormatError(f"beta row has {len(row)} entries for {m} APs")
        beta.append(row)
    gamma = []
    for _ in range(k):
        row = _floats(ln.next("gamma"), "gamma")
        if len(row) != m:
            raise FormatError(f"gamma row has {len(row)} entries for {m} APs")
        gamma.append(row)
    ln.done()
    return CfMmimoSystem(
        m_aps=m,
        k_users=k,
        tau_pilots=tau,
        beta=np.array(beta),
        serving_sets=tuple(serving),
        gamma=np.array(gamma),
        eta=np.array(eta),
        rho_u=rho_u[0],
        tau_c=tau_c,
    )


def format_graph(g: WeightedGraph) -> str:
    out = [GRAPH_MAGIC, f"vertices {g.n_vertices}", f"parts {g.k_parts}"]
    for (i, j) in sorted(g.weights):
        out.append(f"edge {i} {j} {_fmt_weight(g.weights[(i, j)])}")
    return "\n".join(out) + "\n"


def parse_graph(text: str) -> WeightedGraph:
    ln = _Lines(text, GRAPH_MAGIC)
    n = _one_int(ln.next("vertices"), "vertices")
    k = _one_int(ln.next("parts"), "parts")
    weights = {}
    while ln.peek_key() == "edge":
        tokens = ln.next("edge")
        if len(tokens) not in (2, 3):
            raise FormatError(f"edge line wants 'i j [weight]', got {tokens}")
        i, j = _ints(tokens[:2], "edge")
        w = _parse_weight(tokens[2]) if len(tokens) == 3 else 1
        key = (i, j) if i < j else (j, i)
        if key in weights:
            raise FormatError(f"duplicate edge {key}")
        weights[key] = w
    ln.done()
    try:
        return WeightedGraph(n, k, weights)
    except ValueError as e:
        raise FormatError(str(e)) from e


def format_assignment(a: PilotAssignment) -> str:
    return (
        f"{ASSIGNMENT_MAGIC}\nusers {a.n_users}\npilots {a.n_pilots}\n"
        "assign " + " ".join(str(p) for p in a.pilot_of) + "\n"
    )


def parse_assignment(text: str) -> PilotAssignment:
    ln = _Lines(text, ASSIGNMENT_MAGIC)
    k = _one_int(ln.next("users"), "users")
    tau = _one_int(ln.next("pilots"), "pilots")
    pilots = _ints(ln.next("assign"), "assign")
    ln.done()
    if len(pilots) != k:
        raise FormatError(f"assign lists {len(pilots)} users, header says {k}")
    return PilotAssignment(tuple(pilots), tau)


def format_partition(p: Partition) -> str:
    return (
        f"{PARTITION_MAGIC}\nvertices {p.n_vertices}\nparts {p.n_blocks}\n"
        "assign " + " ".join(str(b) for b in p.block_of) + "\n"
    )


def parse_partition(text: str) -> Partition:
    ln = _Lines(text, PARTITION_MAGIC)
    n = _one_int(ln.next("vertices"), "vertices")
    k = _one_int(ln.next("parts"), "parts")
    blocks = _ints(ln.next("assign"), "assign")
    ln.done()
    if len(blocks) != n:
        raise FormatError(f"assign lists {len(blocks)} vertices, header says {n}")
    return Partition(tuple(blocks), k)


def _read(path) -> str:
    return Path(path).read_text()


def read_instance(path) -> CfMmimoSystem:
    return parse_instance(_read(path))


def write_instance(path, s: CfMmimoSystem) -> None:
    Path(path).write_text(format_instance(s))


def read_graph(path) -> WeightedGraph:
    return parse_graph(_read(path))


def write_graph(path, g: WeightedGraph) -> None:
    Path(path).write_text(format_graph(g))


def read_assignment(path) -> PilotAssignment:
    return parse_assignment(_read(path))


def write_assignment(path, a: PilotAssignment) -> None:
    Path(path).write_text(format_assignment(a))


def read_partition(path) -> Partition:
    return parse_partition(_read(path))


def write_partition(path, p: Partition) -> None:
    Path(path).write_text(format_partition(p))
