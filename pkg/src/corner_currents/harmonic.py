"""Harmonic and length-minimizing realizations, plus embedding certification.

Both solvers are damped vertex sweeps with a global monotone line search:
run one sweep at the current step factor, accept if the objective dropped,
otherwise halve and retry. The energy functional is smooth and the sweep is
a (half-)Jacobi step per vertex; total length is only piecewise smooth, so
the length solver carries a subdifferential test for merged vertices and a
stall detector instead of pretending the gradient exists everywhere.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .hyp import (DiskPoint, DomainError, TangentVector, conformal_factor,
                  exp_map)
from .graphs import (
    DEGENERATE_LEN, Edge, GraphConfiguration, MarkedGraph, balance_vector,
    edge_length, edge_reach, energy, harmonic_deviation, vertex_weight_sum,
    weighted_length,
)
from .surface import SurfaceGroup

HARMONIC_TOL = 1e-8
FERMAT_TOL = 1e-7
MERGE_TOL = 1e-9
STALL_EPS = 1e-14
STALL_SWEEPS = 50
MAX_ITER = 100_000
_CONTACT_SLACK = 0.5


class CollapseError(RuntimeError):
    """The marking lets (part of) the graph shrink to zero length."""

    def __init__(self, message: str, edges=()):
        super().__init__(message)
        self.edges = tuple(edges)


class ConvergenceError(RuntimeError):
    pass


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual: float
    objective: float
    wall_time: float
    message: str = ""

    def require_converged(self):
        if not self.converged:
            raise ConvergenceError(
                f"solver stopped after {self.iterations} sweeps with "
                f"residual {self.residual:.3e}: {self.message}")
        return self


def default_configuration(g: MarkedGraph, scale: float = 0.2) -> GraphConfiguration:
    """Deterministic non-degenerate cold start: spiral of distinct points."""
    pts = []
    n = g.n_vertices
    for k in range(n):
        if k == 0:
            pts.append(DiskPoint.interior(0.0j))
        else:
            r = scale * (0.4 + 0.6 * k / n)
            th = 2.0 * math.pi * k / n + 0.5
            pts.append(DiskPoint.interior(complex(r * math.cos(th),
                                                  r * math.sin(th))))
    return GraphConfiguration(tuple(pts))


def _check_not_globally_trivial(g: MarkedGraph) -> None:
    if all(e.gain.is_identity() for e in g.edges):
        raise CollapseError(
            "every gain is trivial: the energy infimum collapses the whole "
            "graph to a point", range(len(g.edges)))


def _tiny_edges(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration,
                eps: float):
    return [i for i, e in enumerate(g.edges)
            if edge_length(G, c, e) <= eps]


class _PackedGraph:
    """Array mirror of (graph, configuration) for the sweep kernels.

    pack() returns None when the data leaves the kernels' domain: a
    non-interior vertex or a gain whose raw float pair overflows. Those
    cases run on the object path, which raises descriptive errors.
    """

    def __init__(self, pz, ea, eb, ew, eu, ev, ibase, iedge, idir, wsum):
        self.pz = pz
        self.edges = (ea, eb, ew, eu, ev)
        self.stars = (ibase, iedge, idir)
        self.wsum = wsum

    @staticmethod
    def pack(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration):
        n = g.n_vertices
        m = len(g.edges)
        pz = np.empty(n, dtype=np.complex128)
        try:
            for v, p in enumerate(c.positions):
                pz[v] = p.require_interior("kernel pack").z
        except DomainError:
            return None
        ea = np.empty(m, dtype=np.complex128)
        eb = np.empty(m, dtype=np.complex128)
        ew = np.empty(m, dtype=np.float64)
        eu = np.empty(m, dtype=np.int64)
        ev = np.empty(m, dtype=np.int64)
        star = [[] for _ in range(n)]
        for k, e in enumerate(g.edges):
            a, b = G.evaluate_raw(e.gain)
            ea[k], eb[k], ew[k] = a, b, e.weight
            eu[k], ev[k] = e.u, e.v
            star[e.u].append((k, 1))
            star[e.v].append((k, -1))
        if not (np.all(np.isfinite(ea.view(np.float64)))
                and np.all(np.isfinite(eb.view(np.float64)))):
            return None
        ibase = np.zeros(n + 1, dtype=np.int64)
        iedge = np.empty(2 * m, dtype=np.int64)
        idir = np.empty(2 * m, dtype=np.int8)
        pos = 0
        for v in range(n):
            for k, d in star[v]:
                iedge[pos], idir[pos] = k, d
                pos += 1
            ibase[v + 1] = pos
        wsum = np.array([sum(ew[k] for k, _ in star[v]) for v in range(n)],
                        dtype=np.float64)
        if np.any(wsum <= 0.0):
            return None
        return _PackedGraph(pz, ea, eb, ew, eu, ev, ibase, iedge, idir, wsum)

    def config(self) -> GraphConfiguration:
        return GraphConfiguration(tuple(DiskPoint.interior(complex(z))
                                        for z in self.pz))

    def sweep_harmonic(self, step: float) -> int:
        ea, eb, ew, eu, ev = self.edges
        return kernels.harmonic_sweep(self.pz, ea, eb, ew, eu, ev,
                                      *self.stars, self.wsum, step,
                                      DEGENERATE_LEN)

    def sweep_length(self, step: float, merge_tol: float) -> int:
        ea, eb, ew, eu, ev = self.edges
        return kernels.length_sweep(self.pz, ea, eb, ew, eu, ev,
                                    *self.stars, step, merge_tol)

    def objective(self) -> tuple:
        ea, eb, ew, eu, ev = self.edges
        return kernels.objective_eval(self.pz, ea, eb, ew, eu, ev)

    def deviation(self) -> float:
        ea, eb, ew, eu, ev = self.edges
        return kernels.deviation_eval(self.pz, ea, eb, ew, eu, ev,
                                      *self.stars, DEGENERATE_LEN)

    def fermat(self, merge_tol: float) -> float:
        ea, eb, ew, eu, ev = self.edges
        return kernels.fermat_eval(self.pz, ea, eb, ew, eu, ev,
                                   *self.stars, merge_tol)

    def snapshot(self) -> np.ndarray:
        return self.pz.copy()

    def restore(self, snap: np.ndarray) -> None:
        self.pz = snap


def solve_harmonic(G: SurfaceGroup, g: MarkedGraph,
                   config: Optional[GraphConfiguration] = None,
                   tol: float = HARMONIC_TOL,
                   max_iter: int = MAX_ITER) -> tuple:
    """Minimize the weighted Dirichlet energy by damped vertex sweeps.

    Returns (configuration, report). Raises CollapseError when the marking
    admits collapse (checked upfront via trivial gains and during iteration
    via vanishing edge lengths).
    """
    _check_not_globally_trivial(g)
    if config is None:
        config = default_configuration(g)
    t0 = time.time()
    dev = harmonic_deviation(G, g, config)
    if dev < tol:
        return config, SolveReport(True, 0, dev, energy(G, g, config),
                                   time.time() - t0, "already harmonic")
    packed = _PackedGraph.pack(G, g, config)
    if packed is not None:
        return _solve_harmonic_packed(G, g, config, packed, tol, max_iter,
                                      t0, dev)
    step = 1.0
    obj = energy(G, g, config)
    it = 0
    while it < max_iter and dev >= tol:
        it += 1
        trial = config
        for v in range(g.n_vertices):
            bal = balance_vector(G, g, trial, v)
            denom = 2.0 * vertex_weight_sum(g, v)
            mv = bal.scaled(step / denom)
            if mv.norm == 0.0:
                continue
            trial = trial.replace(v, exp_map(mv))
        new_obj = energy(G, g, trial)
        new_dev = harmonic_deviation(G, g, trial)
        # near the minimum per-sweep energy gains sink below float noise
        # while the sweep is still a contraction, so accept on either signal
        if not (new_obj < obj or new_dev < dev):
            step *= 0.5
            if step < 1e-12:
                break
            continue
        config, obj, dev = trial, new_obj, new_dev
        step = min(step * 1.2, 2.0)
        tiny = _tiny_edges(G, g, config, DEGENERATE_LEN * 1e4)
        if tiny:
            raise CollapseError(
                f"edges {tiny} shrank below 1e-8 during the energy descent",
                tiny)
    return config, SolveReport(dev < tol, it, dev, obj, time.time() - t0,
                               "" if dev < tol else
                               ("max_iter reached" if it >= max_iter
                                else "step underflow"))


def _solve_harmonic_packed(G, g, config, packed, tol, max_iter, t0, dev):
    # same accept / halve / grow loop as the object path, on packed arrays
    step = 1.0
    obj, _, _ = packed.objective()
    it = 0
    stop = ""
    while it < max_iter and dev >= tol:
        it += 1
        snap = packed.snapshot()
        code = packed.sweep_harmonic(step)
        if code == 1:
            packed.restore(snap)
            tiny = _tiny_edges(G, g, packed.config(), DEGENERATE_LEN * 1e4)
            raise CollapseError(
                f"edges {tiny} shrank below 1e-8 during the energy descent",
                tiny or None)
        if code != 0:
            packed.restore(snap)
            stop = "sweep left the kernel domain"
            break
        new_obj, _, min_ell = packed.objective()
        new_dev = packed.deviation()
        if not (new_obj < obj or new_dev < dev):
            packed.restore(snap)
            step *= 0.5
            if step < 1e-12:
                stop = "step underflow"
                break
            continue
        obj, dev = new_obj, new_dev
        step = min(step * 1.2, 2.0)
        if min_ell <= DEGENERATE_LEN * 1e4:
            tiny = _tiny_edges(G, g, packed.config(), DEGENERATE_LEN * 1e4)
            raise CollapseError(
                f"edges {tiny} shrank below 1e-8 during the energy descent",
                tiny)
    out = packed.config()
    # the report carries the object-path numbers, not the kernel's
    dev = harmonic_deviation(G, g, out)
    obj = energy(G, g, out)
    return out, SolveReport(dev < tol, it, dev, obj, time.time() - t0,
                            "" if dev < tol else
                            (stop or "max_iter reached"))


def _length_star(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration,
                 v: int, merge_tol: float):
    """Split the star at v into live edges (unit tangent sum, coth weights)
    and merged edges (weight budget for the subdifferential)."""
    pos = c.positions[v].require_interior("length solve")
    direction = 0.0j
    curvature = 0.0
    budget = 0.0
    for e, oe in g.incident(v):
        ell, u = edge_reach(G, c, oe)
        if ell <= merge_tol:
            budget += e.weight
            continue
        direction += e.weight * u
        curvature += e.weight / math.tanh(max(ell, 1e-12))
    n = abs(direction) * conformal_factor(pos)
    return direction, n, curvature, budget


def fermat_residual(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration,
                    merge_tol: float = MERGE_TOL) -> float:
    """Sum over vertices of the distance from 0 to the subdifferential of
    total weighted length. Zero iff c is a (possibly nonsmooth) minimizer."""
    total = 0.0
    for v in range(g.n_vertices):
        _, n, _, budget = _length_star(G, g, c, v, merge_tol)
        total += max(0.0, n - budget)
    return total


def solve_length_min(G: SurfaceGroup, g: MarkedGraph,
                     config: Optional[GraphConfiguration] = None,
                     tol: float = FERMAT_TOL,
                     max_iter: int = MAX_ITER) -> tuple:
    """Minimize total weighted length (weighted Steiner/Fermat problem).

    Vertex step: Weiszfeld-style quasi-Newton, direction = sum of w * unit
    tangents, scale = 1 / sum of w * coth(l). coth blows up on short edges,
    which automatically damps steps near vertex merges. A vertex whose live
    tangent sum is dominated by the merged-edge weight budget is stationary
    in the subdifferential sense and is left in place.
    """
    _check_not_globally_trivial(g)
    if config is None:
        config = default_configuration(g)
    t0 = time.time()
    res = fermat_residual(G, g, config)
    if res < tol:
        return config, SolveReport(True, 0, res, weighted_length(G, g, config),
                                   time.time() - t0, "already minimal")
    step = 1.0
    obj = weighted_length(G, g, config)
    it = 0
    flat_streak = 0
    while it < max_iter and res >= tol:
        it += 1
        trial = config
        for v in range(g.n_vertices):
            direction, n, curvature, budget = _length_star(
                G, g, trial, v, MERGE_TOL)
            if n <= budget or n == 0.0:
                continue  # subdifferential-stationary (vertex merge)
            base = trial.positions[v].z
            mv = TangentVector(base, direction).scaled(step / curvature)
            trial = trial.replace(v, exp_map(mv))
        new_obj = weighted_length(G, g, trial)
        new_res = fermat_residual(G, g, trial)
        if not (new_obj < obj or new_res < res):
            step *= 0.5
            if step < 1e-12:
                break
            continue
        gained = obj - new_obj
        config, obj, res = trial, new_obj, new_res
        step = min(step * 1.2, 2.0)
        flat_streak = flat_streak + 1 if gained < STALL_EPS else 0
        if flat_streak >= STALL_SWEEPS and res >= tol:
            # objective pinned but smooth residual nonzero: nonsmooth corner.
            loose = fermat_residual(G, g, config, merge_tol=1e-6)
            if loose < tol:
                return config, SolveReport(
                    True, it, loose, obj, time.time() - t0,
                    "nonsmooth minimum (merged vertices)")
            return config, SolveReport(
                False, it, res, obj, time.time() - t0,
                "stalled at a nonsmooth configuration")
    res = fermat_residual(G, g, config)
    return config, SolveReport(res < tol, it, res, obj, time.time() - t0,
                               "" if res < tol else
                               ("max_iter reached" if it >= max_iter
                                else "step underflow"))


def balance_step_candidates(G: SurfaceGroup, g: MarkedGraph,
                            config: GraphConfiguration):
    """One damped balance sweep at a few fixed step sizes; used as
    candidate moves by descent heuristics layered on the solvers."""
    for step in (0.5, 0.15):
        trial = config
        for v in range(g.n_vertices):
            bal = balance_vector(G, g, trial, v)
            denom = 2.0 * vertex_weight_sum(g, v)
            mv = bal.scaled(step / denom)
            if mv.norm == 0.0:
                continue
            trial = trial.replace(v, exp_map(mv))
        yield trial


# ---------------------------------------------------------------------------
# embedding certification


@dataclass(frozen=True)
class EmbeddingViolation:
    edge_i: int
    edge_j: int
    word: str
    kind: str
    point: Optional[complex]


@dataclass(frozen=True)
class EmbeddingReport:
    ok: bool
    violations: tuple
    pairs_checked: int
    translates_classified: int


_KIND = {1: "transverse", 3: "overlap"}


def certify_embedded(G: SurfaceGroup, g: MarkedGraph, c: GraphConfiguration,
                     max_violations: int = 32) -> EmbeddingReport:
    """Certify that the realized graph is embedded in the quotient surface.

    Every unordered edge pair is checked piecewise against the deck
    translates that could geometrically touch; the piece machinery keeps
    every test in a reduced frame with a fixed candidate ball, so edges of
    any length certify at full precision. Transverse crossings and
    collinear overlaps are violations; shared endpoints are legitimate
    (vertex lifts), and contacts at internal piece junctions belong to the
    piece that ends there.
    """
    from .currents import (_JUNCTION_TOL, _BallPack, _PieceImages,
                           contact_ball_radius, edge_pieces)

    all_pieces = []
    for i, e in enumerate(g.edges):
        ell, pieces = edge_pieces(G, c, e)
        if not pieces:
            return EmbeddingReport(False, (EmbeddingViolation(
                i, i, "", "degenerate_edge", c.positions[e.u].z),), 0, 0)
        all_pieces.append(pieces)

    ball = _BallPack(G, contact_ball_radius(G))
    cache = _PieceImages(G, ball)
    for idx, pl in enumerate(all_pieces):
        cache.set_pieces("edges", idx, pl)
    id_idx = next(k for k, w in enumerate(ball.words) if w.is_identity())

    violations = []
    pairs = 0
    classified = 0
    n_edges = len(g.edges)
    for i in range(n_edges):
        for j in range(i, n_edges):
            pairs += 1
            for pi, piece in enumerate(all_pieces[i]):
                for pj, piece_j in enumerate(all_pieces[j]):
                    keep, T, E1 = cache.images("edges", None, j, pj)
                    if len(keep) == 0:
                        continue
                    codes, pts = kernels.classify_one_vs_many(piece.row, T)
                    classified += len(keep)
                    for h in np.flatnonzero((codes == 1) | (codes == 3)):
                        if i == j and pi == pj and keep[h] == id_idx:
                            continue
                        pt = pts[h]
                        if piece.start_internal and \
                                abs(pt - piece.z_start) <= _JUNCTION_TOL:
                            continue
                        if piece_j.start_internal and \
                                abs(pt - E1[h]) <= _JUNCTION_TOL:
                            continue
                        w = (piece.word * ball.words[keep[h]]
                             * piece_j.word.inverse())
                        violations.append(EmbeddingViolation(
                            i, j, str(w), _KIND[int(codes[h])],
                            None if np.isnan(pt.real) else complex(pt)))
                        if len(violations) >= max_violations:
                            return EmbeddingReport(False, tuple(violations),
                                                   pairs, classified)
    return EmbeddingReport(not violations, tuple(violations), pairs,
                           classified)
