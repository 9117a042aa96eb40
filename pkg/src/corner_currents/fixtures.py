"""Reference graphs and configurations used by tests, benchmarks and demos.

The canonical triangulation is the workhorse: cone the regular octagon from
its center to the 8 corners and 8 side midpoints. In the quotient that is 6
vertices, 24 edges, 16 triangles, and by the octagon's symmetry the obvious
positions (center, one corner lift, 4 side-midpoint lifts) are exactly
balanced for both the energy and the length functionals. That gives the
solvers a known answer with zero free parameters.
"""

from __future__ import annotations

import math

from .hyp import DiskPoint, Geodesic, raw_axis
from .graphs import Edge, GraphConfiguration, MarkedGraph, normalize
from .surface import CORNER_WORD_STRINGS, GroupWord, SurfaceGroup

_CORNER_EDGE_GAINS = CORNER_WORD_STRINGS  # spokes center -> each corner lift

# second lift per side-midpoint orbit: the paired side's midpoint
_MID_SPOKE_GAINS = {
    "M02": ("", "a1-"),
    "M13": ("", "b1"),
    "M46": ("", "a2-"),
    "M57": ("", "b2"),
}

# half-side edges corner -> midpoint, based at the corner lift v0:
# halves [v_k, m] get regauged by the corner word taking v0 to v_k.
_HALF_SIDE_GAINS = {
    "M02": ("", "a1 b1 a1-"),
    "M13": ("a1 b1 a1-", "a1 b1"),
    "M46": ("a1 b1 a1- b1-", "b2"),
    "M57": ("b2", "b2 a2"),
}

_MID_VERTEX = {"M02": 2, "M13": 3, "M46": 4, "M57": 5}
_MID_SIDE = {"M02": 0, "M13": 1, "M46": 4, "M57": 5}


def canonical_triangulation(G: SurfaceGroup):
    """(graph, configuration): 6 vertices, 24 unit-weight edges, 16 faces.

    Vertex order: 0 octagon center, 1 corner orbit, 2..5 side-midpoint
    orbits for side pairs (0,2), (1,3), (4,6), (5,7). The configuration is
    exactly harmonic and exactly length-critical.
    """
    edges = []
    # identity-gain spokes first so BFS picks them as the spanning tree
    edges.append(Edge(0, 1, 1.0, GroupWord.identity()))
    for name in ("M02", "M13", "M46", "M57"):
        edges.append(Edge(0, _MID_VERTEX[name], 1.0, GroupWord.identity()))
    for w in _CORNER_EDGE_GAINS[1:]:
        edges.append(Edge(0, 1, 1.0, GroupWord.parse(w)))
    for name in ("M02", "M13", "M46", "M57"):
        edges.append(Edge(0, _MID_VERTEX[name], 1.0,
                          GroupWord.parse(_MID_SPOKE_GAINS[name][1])))
    for name in ("M02", "M13", "M46", "M57"):
        for w in _HALF_SIDE_GAINS[name]:
            edges.append(Edge(1, _MID_VERTEX[name], 1.0, GroupWord.parse(w)))
    graph = MarkedGraph(6, tuple(edges), is_triangulation=True)

    pos = [DiskPoint.interior(0.0j), G.octagon[0]]
    for name in ("M02", "M13", "M46", "M57"):
        pos.append(G.side_midpoints[_MID_SIDE[name]])
    return graph, GraphConfiguration(tuple(pos))


def wedge_graph(loops) -> MarkedGraph:
    """Single vertex with one weighted loop per (gain word, weight) pair."""
    edges = tuple(Edge(0, 0, float(w), GroupWord.parse(word))
                  for word, w in loops)
    return MarkedGraph(1, edges)


def axis_basepoint(G: SurfaceGroup, word: str) -> DiskPoint:
    """The point of the word's translation axis closest to the origin."""
    g = G.evaluate_raw(GroupWord.parse(word))
    return raw_axis(g).center_point()


def twist_wedge(G: SurfaceGroup, n: int):
    """(graph, configuration) for the n-fold twisted loop b1 a1^n.

    The vertex sits on the loop's own axis, where the single-loop wedge is
    exactly balanced, at the axis point nearest the origin to pin down the
    flat direction.
    """
    word = "b1" + " a1" * n if n > 0 else "b1"
    graph = wedge_graph([(word, 1.0)])
    return graph, GraphConfiguration((axis_basepoint(G, word),))


def power_loop(G: SurfaceGroup, i: int):
    """(graph, configuration): loop a1^i with weight 1/i on the a1 axis.

    All members share the same support geodesic, so pairings against a fixed
    partner are constant across i. Useful for homogeneity checks.
    """
    word = " ".join(["a1"] * i)
    graph = wedge_graph([(word, 1.0 / i)])
    return graph, GraphConfiguration((axis_basepoint(G, "a1"),))


def crossing_wedge(G: SurfaceGroup):
    """(graph, configuration): loops a1 and b1 from a shared vertex.

    The two loop classes intersect once, so the associated current has
    nonzero self-intersection: a pointedness witness.
    """
    graph = wedge_graph([("a1", 1.0), ("b1", 1.0)])
    return graph, GraphConfiguration((DiskPoint.interior(0.05 + 0.02j),))


def anchored_wedge(G: SurfaceGroup, specs):
    """Wedge at the origin for quick pairing fixtures; specs = loop list."""
    return wedge_graph(specs), GraphConfiguration((DiskPoint.interior(0.0j),))


def liouville_suite(G: SurfaceGroup):
    """Ten (name, graph, configuration) rows with varied lengths, weights
    and atom counts for pairing estimates."""
    rows = []
    tri, tri_c = canonical_triangulation(G)
    rows.append(("triangulation", tri, tri_c))
    # rotate the canonical positions: still a legal (non-critical) realization
    rot = GraphConfiguration(tuple(
        DiskPoint.interior(p.z * complex(math.cos(0.3), math.sin(0.3)))
        for p in tri_c.positions))
    rows.append(("triangulation_rotated", tri, rot))
    rows.append(("loop_a1", *power_loop(G, 1)))
    rows.append(("loop_a1_cubed", *power_loop(G, 3)))
    rows.append(("crossing_wedge", *crossing_wedge(G)))
    rows.append(("twist_3", *twist_wedge(G, 3)))
    rows.append(("twist_8", *twist_wedge(G, 8)))
    for name, specs, z in (
            ("mixed_weights", [("a1", 0.25), ("b2", 4.0)], 0.1j),
            ("commutator", [("a1 b1 a1- b1-", 2.0)], 0.02 + 0.0j),
            ("three_loops", [("a1", 1.0), ("b1", 0.5), ("a2 b2", 1.5)],
             -0.08 + 0.03j)):
        g = wedge_graph(specs)
        rows.append((name, g, GraphConfiguration((DiskPoint.interior(z),))))
    return rows
