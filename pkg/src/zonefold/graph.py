"""Fundamental graphs of periodic lattices and their quotient constructions.

A periodic graph is stored through its fundamental (quotient) graph: finitely
many vertices carrying potentials, and directed edges carrying integer offset
vectors that record which lattice translate of the head the edge reaches.
Rolling the lattice up along a chiral sublattice produces either a view with
a restricted quasimomentum map (primitive case) or an explicit lower
dimensional fundamental graph with multiplied vertex count (general case).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from math import isfinite
from typing import Iterable, Sequence

import numpy as np

from .errors import DisconnectedGraph, NotPrimitive, RankDeficient, ValidationError
from .intlat import (
    IntMatrix,
    UnimodularCompletion,
    as_chiral_matrix,
    complete_to_basis,
    is_primitive_set,
    saturation,
    smith_normal_form,
    unimodular_inverse,
)

OFFSET_LIMIT = 10**6  # keeps phase dot products accurate to well under 1e-9


@dataclass(frozen=True)
class Vertex:
    """Fundamental-domain vertex: a label plus an electric potential value."""

    label: str
    potential: float


@dataclass(frozen=True)
class Edge:
    """Directed edge tail -> head + offset, offset in lattice coordinates."""

    tail: int
    head: int
    offset: tuple[int, ...]


def _as_vertex(item: object) -> Vertex:
    if isinstance(item, Vertex):
        v = item
    else:
        label, potential = item  # type: ignore[misc]
        v = Vertex(str(label), float(potential))
    if not isfinite(v.potential):
        raise ValidationError(f"potential of {v.label!r} is not finite")
    return v


def _as_edge(item: object, dimension: int, nu: int) -> Edge:
    if isinstance(item, Edge):
        tail, head, offset = item.tail, item.head, item.offset
    else:
        tail, head, offset = item  # type: ignore[misc]
    for idx in (tail, head):
        if isinstance(idx, bool) or not isinstance(idx, int) or not 0 <= idx < nu:
            raise ValidationError(f"edge endpoint {idx!r} is not a vertex index below {nu}")
    off = tuple(offset)
    if len(off) != dimension:
        raise ValidationError(f"offset {off} has length {len(off)}, dimension is {dimension}")
    for x in off:
        if isinstance(x, bool) or not isinstance(x, int):
            raise ValidationError(f"offset entry {x!r} is not an integer")
        if abs(x) > OFFSET_LIMIT:
            raise ValidationError(f"offset entry {x} exceeds the {OFFSET_LIMIT} bound")
    return Edge(tail, head, off)


@dataclass(frozen=True)
class FundamentalGraph:
    """Finite quotient of a periodic graph by its translation lattice."""

    dimension: int
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __init__(self, dimension: int, vertices: Iterable[object], edges: Iterable[object]):
        if isinstance(dimension, bool) or not isinstance(dimension, int) or dimension < 1:
            raise ValidationError(f"dimension must be a positive integer, got {dimension!r}")
        vs = tuple(_as_vertex(v) for v in vertices)
        if not vs:
            raise ValidationError("graph needs at least one vertex")
        es = tuple(_as_edge(e, dimension, len(vs)) for e in edges)
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", es)

    @property
    def nu(self) -> int:
        return len(self.vertices)

    def degrees(self) -> tuple[int, ...]:
        """Vertex degrees in the periodic graph; a loop contributes 2."""
        deg = [0] * self.nu
        for e in self.edges:
            deg[e.tail] += 1
            deg[e.head] += 1
        return tuple(deg)

    def degree(self, index: int) -> int:
        return self.degrees()[index]

    def potentials(self) -> tuple[float, ...]:
        return tuple(v.potential for v in self.vertices)


@dataclass(frozen=True)
class SubcoveringView:
    """Rolled-up lattice seen through a primitive chiral matrix.

    The base fundamental graph is reused unchanged; only the quasimomenta
    shrink to the affine subtorus T k = 0 (mod 2pi), parametrized by the
    residual coordinates kappa through the unimodular completion.
    """

    base: FundamentalGraph
    chiral: IntMatrix
    completion: UnimodularCompletion
    residual_dimension: int

    @cached_property
    def _inverse_completion(self) -> IntMatrix:
        return unimodular_inverse(self.completion.matrix)

    def quasimomentum(self, kappa: Sequence[float]) -> np.ndarray:
        """Full quasimomentum k(kappa) with T k = 0, kappa the free part."""
        kap = np.asarray(kappa, dtype=float)
        if kap.shape != (self.residual_dimension,):
            raise ValidationError(
                f"kappa must have length {self.residual_dimension}, got shape {kap.shape}"
            )
        inv = np.array(self._inverse_completion.entries, dtype=float)
        return inv[:, self.chiral.rows :] @ kap

    def reduced_graph(self) -> FundamentalGraph:
        """Equivalent lower-dimensional fundamental graph.

        Offsets transform by the inverse completion so that the reduced
        Floquet matrix at kappa equals the base one at k(kappa) entrywise.
        """
        inv = self._inverse_completion
        d_o = self.chiral.rows
        edges = []
        for e in self.base.edges:
            x = _row_times_matrix(e.offset, inv)
            edges.append(Edge(e.tail, e.head, x[d_o:]))
        return FundamentalGraph(self.residual_dimension, self.base.vertices, edges)


def _row_times_matrix(row: Sequence[int], mat: IntMatrix) -> tuple[int, ...]:
    return tuple(
        sum(row[i] * mat.entries[i][j] for i in range(mat.rows)) for j in range(mat.cols)
    )


def build_hypercubic(d: int) -> FundamentalGraph:
    """d-dimensional integer lattice: one vertex, one loop per axis."""
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ValidationError(f"dimension must be a positive integer, got {d!r}")
    loops = [Edge(0, 0, tuple(int(i == s) for i in range(d))) for s in range(d)]
    return FundamentalGraph(d, [Vertex("v", 0.0)], loops)


def build_hexagonal(q: float) -> FundamentalGraph:
    """Hexagonal lattice with alternating potential +q / -q on the two sites."""
    vertices = [Vertex("v1", float(q)), Vertex("v2", -float(q))]
    edges = [Edge(0, 1, (0, 0)), Edge(0, 1, (1, 0)), Edge(0, 1, (0, 1))]
    return FundamentalGraph(2, vertices, edges)


def build_diamond(q: float) -> FundamentalGraph:
    """Diamond lattice with alternating potential +q / -q on the two sites."""
    vertices = [Vertex("v1", float(q)), Vertex("v2", -float(q))]
    edges = [
        Edge(0, 1, (0, 0, 0)),
        Edge(0, 1, (1, 0, 0)),
        Edge(0, 1, (0, 1, 0)),
        Edge(0, 1, (0, 0, 1)),
    ]
    return FundamentalGraph(3, vertices, edges)


@dataclass(frozen=True)
class ConnectivityReport:
    """Verdict of connectivity_check with a witness for failures.

    Truthy exactly when the periodic graph is connected: the quotient graph
    has one component and the spanning-tree cycle offsets generate all of Z^d.
    """

    quotient_connected: bool
    components: tuple[tuple[int, ...], ...]
    offset_lattice_full: bool
    cycle_offsets: tuple[tuple[int, ...], ...]
    invariant_factors: tuple[int, ...]

    def __bool__(self) -> bool:
        return self.quotient_connected and self.offset_lattice_full


def connectivity_check(graph: FundamentalGraph) -> ConnectivityReport:
    """Decide whether the periodic cover of the fundamental graph is connected."""
    nu, d = graph.nu, graph.dimension
    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(nu)]
    for idx, e in enumerate(graph.edges):
        adjacency[e.tail].append((e.head, idx))
        adjacency[e.head].append((e.tail, idx))

    seen = [False] * nu
    components: list[tuple[int, ...]] = []
    position: list[tuple[int, ...] | None] = [None] * nu
    tree_edges: set[int] = set()
    for root in range(nu):
        if seen[root]:
            continue
        comp = [root]
        seen[root] = True
        position[root] = (0,) * d
        stack = [root]
        while stack:
            u = stack.pop()
            for w, idx in adjacency[u]:
                if seen[w]:
                    continue
                seen[w] = True
                e = graph.edges[idx]
                pu = position[u]
                assert pu is not None
                if u == e.tail:
                    position[w] = tuple(a + b for a, b in zip(pu, e.offset))
                else:
                    position[w] = tuple(a - b for a, b in zip(pu, e.offset))
                tree_edges.add(idx)
                comp.append(w)
                stack.append(w)
        components.append(tuple(sorted(comp)))

    quotient_connected = len(components) == 1
    cycles: list[tuple[int, ...]] = []
    if quotient_connected:
        for idx, e in enumerate(graph.edges):
            if idx in tree_edges:
                continue
            pt, ph = position[e.tail], position[e.head]
            assert pt is not None and ph is not None
            cycles.append(tuple(a + b - c for a, b, c in zip(pt, e.offset, ph)))

    nonzero = [c for c in cycles if any(c)]
    if not nonzero:
        factors: tuple[int, ...] = ()
        full = False
    else:
        dec = smith_normal_form(IntMatrix.from_rows(nonzero))
        factors = dec.invariant_factors
        # rank d with unit factors: the cycle offsets generate Z^d itself
        full = len(factors) == d and all(f == 1 for f in factors)
    return ConnectivityReport(quotient_connected, tuple(components), full, tuple(cycles), factors)


def quotient_primitive(graph: FundamentalGraph, chiral: object) -> SubcoveringView:
    """Roll the lattice up along a primitive chiral matrix, keeping the graph."""
    t = as_chiral_matrix(chiral, graph.dimension)
    if not is_primitive_set(t):
        raise NotPrimitive(f"{t} is not a primitive set of lattice vectors")
    completion = complete_to_basis(t)
    return SubcoveringView(graph, t, completion, graph.dimension - t.rows)


def quotient_general(graph: FundamentalGraph, chiral: object) -> FundamentalGraph:
    """Explicit fundamental graph of the rolled-up lattice, any full-rank chiral.

    A non-primitive chiral matrix multiplies the vertex count by the index m
    of its lattice inside its saturation: vertices become (coset, base vertex)
    pairs, listed coset-major with cosets in lexicographic order of their
    Smith-form coordinates.
    """
    t = as_chiral_matrix(chiral, graph.dimension)
    _, index = saturation(t)  # raises RankDeficient when rank drops
    d, d_o = graph.dimension, t.rows

    if index == 1:
        # share the completion with quotient_primitive so both constructions
        # agree at the same kappa, not merely up to reparametrization
        return quotient_primitive(graph, t).reduced_graph()

    dec = smith_normal_form(t)
    moduli = dec.invariant_factors
    vinv = unimodular_inverse(dec.V)

    cosets = list(product(*(range(m) for m in moduli)))
    coset_rank = {c: i for i, c in enumerate(cosets)}
    nu = graph.nu

    vertices = []
    for c in cosets:
        tag = ".".join(str(x) for x in c)
        for v in graph.vertices:
            vertices.append(Vertex(f"{v.label}#{tag}", v.potential))

    edges = []
    for c in cosets:
        base_index = coset_rank[c] * nu
        for e in graph.edges:
            x = _row_times_matrix(e.offset, vinv)
            shifted = tuple((ci + xi) % m for ci, xi, m in zip(c, x, moduli))
            head_index = coset_rank[shifted] * nu + e.head
            edges.append(Edge(base_index + e.tail, head_index, x[d_o:]))

    result = FundamentalGraph(d - d_o, vertices, edges)
    if not connectivity_check(result):
        warnings.warn("rolled-up graph is not connected", DisconnectedGraph, stacklevel=2)
    return result
