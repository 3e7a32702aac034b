"""Canonical data types for the three design families.

A Steiner triple system on points 1..n is a set of 3-element subsets
covering every unordered pair exactly once.  A 1-factorization of K_n is
stored as a proper edge coloring with colors 1..n-1 (each color class is
a perfect matching).  Both embed into symmetric Latin squares, and those
embeddings are provided here together with validation and a small JSON
interchange format used by every other module.

Conventions: vertices are labeled 1..n, colors 1..n-1, and unordered
pairs are keyed as (min, max).  All types are immutable after
validation and safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class DesignError(ValueError):
    """Base class for validation failures in this package."""


class BadVertexError(DesignError):
    """A vertex label lies outside {1..n}."""


class DuplicatePairError(DesignError):
    def __init__(self, i: int, j: int):
        self.pair = (min(i, j), max(i, j))
        super().__init__(f"pair {self.pair} is covered more than once")


class UncoveredPairError(DesignError):
    def __init__(self, i: int, j: int):
        self.pair = (min(i, j), max(i, j))
        super().__init__(f"pair {self.pair} is covered by no triple")


class ColorClashError(DesignError):
    def __init__(self, vertex: int, color: int):
        self.vertex = vertex
        self.color = color
        super().__init__(f"two edges at vertex {vertex} share color {color}")


class MissingEdgeError(DesignError):
    def __init__(self, i: int, j: int):
        self.pair = (min(i, j), max(i, j))
        super().__init__(f"edge {self.pair} has no color assigned")


class BadColorError(DesignError):
    """A color lies outside {1..n-1}."""


class SameVertexError(DesignError):
    """An operation on a pair was called with i == j."""


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------

def sts_feasible(n: int) -> bool:
    """Triple systems on n points exist iff n % 6 is 1 or 3 (n >= 1)."""
    return n >= 1 and n % 6 in (1, 3)


def one_factorization_feasible(n: int) -> bool:
    """1-factorizations of K_n exist iff n is even (n >= 2)."""
    return n >= 2 and n % 2 == 0


def pair_key(i: int, j: int) -> tuple[int, int]:
    """Canonical (min, max) key for an unordered pair."""
    return (i, j) if i < j else (j, i)


def _check_vertex(v: int, n: int) -> None:
    if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= n:
        raise BadVertexError(f"vertex label {v!r} outside 1..{n}")


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TripleSystem:
    """A validated Steiner triple system on points 1..n.

    ``table[i][j]`` is the unique third point completing the pair {i, j}
    (0 on the diagonal and on index 0; rows/columns are 1-based).
    """

    n: int
    triples: frozenset[frozenset[int]]
    table: tuple[tuple[int, ...], ...] = field(repr=False)

    def third(self, i: int, j: int) -> int:
        return third_point(self, i, j)

    def sorted_triples(self) -> list[tuple[int, int, int]]:
        return sorted(tuple(sorted(t)) for t in self.triples)


@dataclass(frozen=True)
class EdgeColoring:
    """A validated proper (n-1)-edge-coloring of K_n, n even.

    ``table[i][j]`` is the color of edge {i, j} (symmetric, 0 on the
    diagonal; 1-based).  Each color class is a perfect matching.
    """

    n: int
    table: tuple[tuple[int, ...], ...] = field(repr=False)

    def color(self, i: int, j: int) -> int:
        if i == j:
            raise SameVertexError(f"edge endpoints must differ, got {i}")
        _check_vertex(i, self.n)
        _check_vertex(j, self.n)
        return self.table[i][j]

    def color_map(self) -> dict[tuple[int, int], int]:
        return {
            (i, j): self.table[i][j]
            for i in range(1, self.n + 1)
            for j in range(i + 1, self.n + 1)
        }


@dataclass(frozen=True)
class LatinSquare:
    """An n x n matrix over symbols 1..n, one of each per row and column."""

    n: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not is_latin(self.rows):
            raise DesignError("matrix is not a Latin square")


@dataclass(frozen=True)
class CountResult:
    """Outcome of an exact count.

    ``count`` is exact and arbitrary precision whenever ``complete`` is
    True; a partial result (node budget hit) reports the portion of the
    search finished, never a silently wrong total.  ``count`` is 0 for
    parity/residue-infeasible n.
    """

    kind: str                      # "sts" | "1f" | "latin"
    n: int
    count: int
    labeled: bool | None = None    # 1f only
    complete: bool = True
    nodes: int = 0
    seconds: float = 0.0


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_triple_system(n: int, triples: Iterable[Sequence[int]]) -> TripleSystem:
    """Validate a triple list and build the pair -> third-point table.

    Raises BadVertexError, DuplicatePairError, or UncoveredPairError if
    any pair of distinct points is covered other than exactly once.
    """
    if n < 1:
        raise BadVertexError(f"n must be >= 1, got {n}")
    table = [[0] * (n + 1) for _ in range(n + 1)]
    seen: set[frozenset[int]] = set()
    for t in triples:
        tt = tuple(t)
        if len(tt) != 3 or len(set(tt)) != 3:
            raise DesignError(f"not a 3-element subset: {tt!r}")
        for v in tt:
            _check_vertex(v, n)
        fs = frozenset(tt)
        if fs in seen:
            a, b = sorted(tt)[:2]
            raise DuplicatePairError(a, b)
        seen.add(fs)
        a, b, c = sorted(tt)
        for (i, j, k) in ((a, b, c), (a, c, b), (b, c, a)):
            if table[i][j] != 0:
                raise DuplicatePairError(i, j)
            table[i][j] = k
            table[j][i] = k
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if table[i][j] == 0:
                raise UncoveredPairError(i, j)
    return TripleSystem(n=n, triples=frozenset(seen),
                        table=tuple(tuple(row) for row in table))


def validate_edge_coloring(n: int, colors: Mapping[tuple[int, int], int]) -> EdgeColoring:
    """Validate a {pair: color} map as a proper (n-1)-edge-coloring of K_n.

    The map must cover all n(n-1)/2 edges with colors in 1..n-1 and no
    two edges at a vertex may share a color (so each color class is a
    perfect matching).
    """
    if not one_factorization_feasible(n):
        raise DesignError(f"K_{n} has no 1-factorization (n must be even, >= 2)")
    table = [[0] * (n + 1) for _ in range(n + 1)]
    used = [0] * (n + 1)      # bitmask of colors seen at each vertex
    for (i, j), c in colors.items():
        _check_vertex(i, n)
        _check_vertex(j, n)
        if i == j:
            raise SameVertexError(f"edge endpoints must differ, got {i}")
        if not isinstance(c, int) or isinstance(c, bool) or not 1 <= c <= n - 1:
            raise BadColorError(f"color {c!r} outside 1..{n - 1}")
        if table[i][j] != 0:
            if table[i][j] != c:
                raise DesignError(f"edge {pair_key(i, j)} given two colors")
            continue
        bit = 1 << c
        for v in (i, j):
            if used[v] & bit:
                raise ColorClashError(v, c)
        used[i] |= bit
        used[j] |= bit
        table[i][j] = c
        table[j][i] = c
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if table[i][j] == 0:
                raise MissingEdgeError(i, j)
    return EdgeColoring(n=n, table=tuple(tuple(row) for row in table))


def third_point(ts: TripleSystem, i: int, j: int) -> int:
    """The unique point completing {i, j} to a triple; symmetric in i, j."""
    if i == j:
        raise SameVertexError(f"third_point needs two distinct points, got {i}")
    _check_vertex(i, ts.n)
    _check_vertex(j, ts.n)
    return ts.table[i][j]


# ---------------------------------------------------------------------------
# Latin-square view
# ---------------------------------------------------------------------------

def is_latin(rows: Sequence[Sequence[int]]) -> bool:
    """True iff every row and every column is a permutation of 1..n."""
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        return False
    want = set(range(1, n + 1))
    for r in rows:
        if set(r) != want:
            return False
    for j in range(n):
        if {rows[i][j] for i in range(n)} != want:
            return False
    return True


def to_latin_cube(obj: TripleSystem | EdgeColoring) -> LatinSquare:
    """Embed a design into its Latin-square matrix form.

    EdgeColoring: L(i,j) = color(i,j) off the diagonal, L(i,i) = n; the
    result is symmetric with constant diagonal.  TripleSystem:
    L(i,j) = third(i,j) off the diagonal, L(i,i) = i; the result is
    symmetric and totally so: L(i,j) = k implies L(j,k) = i and
    L(i,k) = j.
    """
    n = obj.n
    if isinstance(obj, EdgeColoring):
        diag = lambda i: n
    elif isinstance(obj, TripleSystem):
        diag = lambda i: i
    else:
        raise TypeError(f"cannot embed {type(obj).__name__}")
    rows = tuple(
        tuple(diag(i) if i == j else obj.table[i][j] for j in range(1, n + 1))
        for i in range(1, n + 1)
    )
    return LatinSquare(n=n, rows=rows)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------
# {"kind":"sts","n":7,"triples":[[1,2,3],...]}
# {"kind":"1f","n":6,"colors":[[i,j,c],...]}  with i < j
# {"kind":"latin","n":4,"rows":[[...],...]}

def to_json_dict(obj: TripleSystem | EdgeColoring | LatinSquare) -> dict:
    if isinstance(obj, TripleSystem):
        return {"kind": "sts", "n": obj.n,
                "triples": [list(t) for t in obj.sorted_triples()]}
    if isinstance(obj, EdgeColoring):
        return {"kind": "1f", "n": obj.n,
                "colors": [[i, j, c] for (i, j), c in sorted(obj.color_map().items())]}
    if isinstance(obj, LatinSquare):
        return {"kind": "latin", "n": obj.n, "rows": [list(r) for r in obj.rows]}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_json_dict(d: Mapping) -> TripleSystem | EdgeColoring | LatinSquare:
    kind = d.get("kind")
    n = d.get("n")
    if kind == "sts":
        return validate_triple_system(n, d["triples"])
    if kind == "1f":
        colors = {(i, j): c for i, j, c in d["colors"]}
        return validate_edge_coloring(n, colors)
    if kind == "latin":
        rows = tuple(tuple(r) for r in d["rows"])
        if len(rows) != n:
            raise DesignError(f"declared n={n} but got {len(rows)} rows")
        return LatinSquare(n=n, rows=rows)
    raise DesignError(f"unknown kind {kind!r}")


def dumps(obj: TripleSystem | EdgeColoring | LatinSquare) -> str:
    return json.dumps(to_json_dict(obj), separators=(",", ":"), sort_keys=True)


def loads(text: str) -> TripleSystem | EdgeColoring | LatinSquare:
    return from_json_dict(json.loads(text))
