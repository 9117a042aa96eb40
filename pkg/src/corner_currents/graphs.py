"""Weighted marked graphs on the surface and their geometric configurations.

A marked graph stores combinatorics (vertices, weighted edges) plus a gain
word per edge: the homotopy class of the marking relative to one lift per
vertex. The derived geometry of an edge (u, v, w, g) at a configuration is
the geodesic segment [pos[u], g(pos[v])].

Normal form: gains along a breadth-first spanning tree from vertex 0 are
empty words. Everything downstream (solvers, MCG action, orbit dedup)
assumes and preserves this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .hyp import (
    COINCIDENCE_TOL, DiskPoint, DomainError, GeodesicSegment, TangentVector,
    as_point, conformal_factor, dist, log_map, raw_reach,
)
from .surface import GroupWord, SurfaceGroup

DEGENERATE_LEN = 1e-12


class GraphError(ValueError):
    """A marked graph violates a structural requirement."""


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    weight: float
    gain: GroupWord

    def reversed(self) -> "Edge":
        return Edge(self.v, self.u, self.weight, self.gain.inverse())


@dataclass(frozen=True)
class MarkedGraph:
    n_vertices: int
    edges: tuple
    is_triangulation: bool = False

    def incident(self, v: int):
        """(edge, oriented-from-v copy) pairs; self-loops appear twice."""
        out = []
        for e in self.edges:
            if e.u == v:
                out.append((e, e))
            if e.v == v:
                out.append((e, e.reversed()))
        return out

    def total_weight(self) -> float:
        return sum(e.weight for e in self.edges)

    def weight_ratio(self) -> float:
        ws = [e.weight for e in self.edges]
        return max(ws) / min(ws)

    def to_json_dict(self) -> dict:
        return {
            "schema": "corner-currents/graph/1",
            "n_vertices": self.n_vertices,
            "is_triangulation": self.is_triangulation,
            "edges": [{"u": e.u, "v": e.v, "weight": e.weight,
                       "gain": str(e.gain)} for e in self.edges],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "MarkedGraph":
        if doc.get("schema") != "corner-currents/graph/1":
            raise GraphError("unrecognized graph schema")
        edges = tuple(Edge(int(d["u"]), int(d["v"]), float(d["weight"]),
                           GroupWord.parse(d["gain"])) for d in doc["edges"])
        return MarkedGraph(int(doc["n_vertices"]), edges,
                           bool(doc.get("is_triangulation", False)))


def validate_graph(g: MarkedGraph) -> None:
    """Structural checks; raises GraphError with the first failure."""
    if g.n_vertices < 1:
        raise GraphError("graph needs at least one vertex")
    for e in g.edges:
        if not (0 <= e.u < g.n_vertices and 0 <= e.v < g.n_vertices):
            raise GraphError(f"edge {e} references a missing vertex")
        if not e.weight > 0:
            raise GraphError(f"edge {e} has non-positive weight")
    # connectivity
    seen = {0}
    stack = [0]
    adj: dict = {}
    for e in g.edges:
        adj.setdefault(e.u, []).append(e.v)
        adj.setdefault(e.v, []).append(e.u)
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != g.n_vertices:
        raise GraphError("graph is not connected")
    if not is_normal_form(g):
        raise GraphError("gains are not in spanning-tree normal form")
    if g.is_triangulation:
        _validate_triangulation(g)


def _validate_triangulation(g: MarkedGraph) -> None:
    V, E = g.n_vertices, len(g.edges)
    for e in g.edges:
        if e.u == e.v:
            raise GraphError("triangulations cannot contain self-loops")
    # V - E + F = -2 with 3F = 2E forces E = 3V + 6 in genus 2
    if 2 * E % 3 != 0 or E != 3 * V + 6:
        raise GraphError(
            f"not a genus-2 triangulation: V = {V}, E = {E}, need E = 3V + 6")
    # parallel edges must be homotopically distinct relative to the lifts
    by_pair: dict = {}
    for e in g.edges:
        key = (min(e.u, e.v), max(e.u, e.v))
        gain = e.gain if e.u <= e.v else e.gain.inverse()
        group = by_pair.setdefault(key, [])
        if any(gain == other for other in group):
            raise GraphError(f"parallel edges {key} with equal gains")
        group.append(gain)


def spanning_tree(g: MarkedGraph):
    """BFS tree from vertex 0: list of (edge index, oriented Edge from parent)."""
    seen = {0}
    order = []
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for idx, e in enumerate(g.edges):
                for oe in ((e, False), (e.reversed(), True)) if e.u != e.v else ():
                    cand = oe[0]
                    if cand.u == u and cand.v not in seen:
                        seen.add(cand.v)
                        order.append((idx, cand))
                        nxt.append(cand.v)
        frontier = nxt
    return order


def is_normal_form(g: MarkedGraph) -> bool:
    return all(oe.gain.is_identity() for _, oe in spanning_tree(g))


def normalize(g: MarkedGraph):
    """Regauge so BFS spanning-tree gains are empty.

    Returns (graph, regauge) where regauge[v] is the word r_v with new gains
    g' = r_u^{-1} g r_v; positions transport as pos'_v = r_v^{-1}(pos_v).
    """
    regauge: list = [None] * g.n_vertices
    regauge[0] = GroupWord.identity()
    for _, oe in spanning_tree(g):
        # oe runs parent -> child with the orientation-correct gain
        regauge[oe.v] = oe.gain.inverse() * regauge[oe.u]
    if any(r is None for r in regauge):
        raise GraphError("graph is not connected")
    new_edges = tuple(
        Edge(e.u, e.v, e.weight, regauge[e.u].inverse() * e.gain * regauge[e.v])
        for e in g.edges)
    return MarkedGraph(g.n_vertices, new_edges, g.is_triangulation), tuple(regauge)


@dataclass(frozen=True)
class GraphConfiguration:
    positions: tuple   # DiskPoint per vertex

    def to_json_dict(self) -> dict:
        return {
            "schema": "corner-currents/configuration/1",
            "positions": [[f"{p.z.real:.17g}", f"{p.z.imag:.17g}"]
                          for p in self.positions],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "GraphConfiguration":
        if doc.get("schema") != "corner-currents/configuration/1":
            raise GraphError("unrecognized configuration schema")
        return GraphConfiguration(tuple(
            DiskPoint.interior(complex(float(x), float(y)))
            for x, y in doc["positions"]))

    @staticmethod
    def from_points(points) -> "GraphConfiguration":
        return GraphConfiguration(tuple(as_point(p) for p in points))

    def replace(self, v: int, p) -> "GraphConfiguration":
        pts = list(self.positions)
        pts[v] = as_point(p)
        return GraphConfiguration(tuple(pts))


def transport_configuration(G: SurfaceGroup, c: GraphConfiguration,
                            regauge) -> GraphConfiguration:
    pts = [G.evaluate(r.inverse()).apply(p)
           for r, p in zip(regauge, c.positions)]
    return GraphConfiguration(tuple(pts))


def edge_endpoints(G: SurfaceGroup, c: GraphConfiguration, e: Edge):
    """Both endpoints as points. Only safe for moderate gains: a deep gain
    pins the far endpoint against the unit circle (use edge_reach there)."""
    p = c.positions[e.u]
    q = G.apply_word(e.gain, c.positions[e.v])
    return p, q


def edge_reach(G: SurfaceGroup, c: GraphConfiguration, e: Edge) -> tuple:
    """(length, unit chart tangent at the u endpoint) of the derived edge,
    accurate for arbitrarily deep gains via the raw matrix path."""
    p = c.positions[e.u].require_interior("edge_reach")
    return raw_reach(p, G.evaluate_raw(e.gain), c.positions[e.v].z)


def edge_length(G: SurfaceGroup, c: GraphConfiguration, e: Edge) -> float:
    return edge_reach(G, c, e)[0]


def edge_segment(G: SurfaceGroup, c: GraphConfiguration,
                 e: Edge) -> Optional[GeodesicSegment]:
    """The derived geodesic segment, or None when degenerate."""
    p, q = edge_endpoints(G, c, e)
    if abs(p.z - q.z) <= DEGENERATE_LEN:
        return None
    return GeodesicSegment.between(p, q)


def degenerate_edges(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration):
    return [i for i, e in enumerate(g.edges)
            if edge_length(G, c, e) <= DEGENERATE_LEN]


def weighted_length(G: SurfaceGroup, g: MarkedGraph,
                    c: GraphConfiguration) -> float:
    return sum(e.weight * edge_length(G, c, e) for e in g.edges)


def energy(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration) -> float:
    # constant-speed parameterization on the unit interval
    return sum(e.weight * edge_length(G, c, e) ** 2 for e in g.edges)


def balance_vector(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration,
                   v: int) -> TangentVector:
    """Sum of w_e * l(e) * (unit tangent toward the far endpoint) over edges
    at v; self-loops contribute both ends. Equals minus half the Riemannian
    energy gradient."""
    base = c.positions[v].require_interior("balance_vector")
    acc = 0.0j
    for e, oe in g.incident(v):
        ell, u = edge_reach(G, c, oe)
        if ell <= DEGENERATE_LEN:
            raise DomainError(f"degenerate edge at vertex {v}: {e}")
        acc += e.weight * ell * u
    return TangentVector(base, acc)


def harmonic_deviation(G: SurfaceGroup, g: MarkedGraph,
                       c: GraphConfiguration) -> float:
    return sum(balance_vector(G, g, c, v).norm for v in range(g.n_vertices))


def vertex_weight_sum(g: MarkedGraph, v: int) -> float:
    return sum(e.weight for e, _ in g.incident(v))
