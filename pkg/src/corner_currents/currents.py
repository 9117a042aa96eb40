"""Graph currents with corners: flow-box masses, the intersection form,
the Liouville pairing, and a certified homotopical upper bound.

A current is a finite list of weighted geodesic segments (atoms), one per
pi1-orbit. Long atoms (Dehn-twist images) have endpoints whose disk
coordinates collapse onto the unit circle in float64, so an atom carries
each endpoint as a frame word plus a moderate local point (global endpoint
= word(point)), alongside a midpoint-anchored summary (word W, local
midpoint z, unit direction u) used for keys, plots and sampling.

Cutting an atom into local pieces means tracking a geodesic across
fundamental-domain copies, and that is dynamically unstable: a float64
walk drifts off the true geodesic by roughly e^L * 1e-16 after arclength
L, which is order one near L = 35 and garbage beyond. The two endpoint
anchors pin the segment stably (perturbing both endpoints moves the whole
segment by no more than the larger perturbation), and the walk between
them runs in adaptive extended precision so no piece inherits the
exponential error. Piece data is emitted in ordinary float64; each piece
is exact in its own frame.

Lift enumeration never uses a ball scaled by atom length. Each atom is cut
into pieces of length <= PIECE_LEN carried by their own local frames; a
contact between piece i of one atom and a deck translate of piece j of
another pins the relative element into a ball of radius 2*(R_V +
PIECE_LEN) + slack, where R_V is the octagon circumradius. That ball is
enumerated once per surface and reused everywhere (intersection,
embeddedness certification, flow boxes).

Intersection counts follow the segment convention: transverse contacts and
shared-endpoint contacts both contribute (overlaps contribute zero), each
counted once per pi1-orbit of the ordered atom pair. Piece junctions are
interior bookkeeping: a contact landing exactly on an internal junction is
kept only by the piece ending there, never double-kept by the one starting
there.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np

from . import kernels
from .graphs import GraphConfiguration, MarkedGraph
from .hyp import (DiskPoint, DomainError, Geodesic, Isometry, as_point, dist,
                  raw_axis, raw_is_hyperbolic, raw_reach)
from .surface import GroupWord, SurfaceGroup, enumerate_ball

PIECE_LEN = 1.0
DEGENERATE_ATOM_LEN = 1e-9
BOUNDARY_CONTACT_TOL = 1e-9
_JUNCTION_TOL = 1e-9
_CONTACT_SLACK = 0.5       # padding on the relative-element ball
_PREFILTER_SLACK = 0.1     # padding on the Euclidean candidate prefilter
_MERGE_DIGITS = 9          # rounding for pi1-duplicate atom merging


class CoverageError(ValueError):
    """A caller-supplied ball radius cannot certify lift coverage."""

    def __init__(self, message: str, required_radius: float):
        super().__init__(f"{message} (required radius {required_radius:.6f})")
        self.required_radius = required_radius


# ---------------------------------------------------------------------------
# chart walking
#
# State (z, u, W): the walked point is W(z) globally, z stays within the
# fundamental domain plus one step, u is the forward unit direction in the
# local chart. Short moderate moves (sampling, candidate jitters) use the
# float helper below; anything that spans an atom goes through the
# extended-precision line walk further down.


def _advance(z: complex, u: complex, t: float) -> tuple:
    """Move hyperbolic distance t from z along unit chart direction u;
    returns (z', u') with u' the transported forward direction."""
    s = math.tanh(t / 2.0)
    den = 1.0 + z.conjugate() * u * s
    z2 = (u * s + z) / den
    u2 = u / (den * den)
    return z2, u2 / abs(u2)


def _mp_dps(ell: float) -> int:
    # walk error ~ e^ell * 10^-dps; keep it below ~1e-12 with headroom
    return 30 + int(0.45 * ell)


def _mp_pairs(S: SurfaceGroup) -> dict:
    return {let: (mpmath.mpc(g.a), mpmath.mpc(g.b))
            for let, g in S.pairing_elements}


def _mp_eval(pairs: dict, w: GroupWord) -> tuple:
    a, b = mpmath.mpc(1), mpmath.mpc(0)
    for let in w.letters:
        ga, gb = pairs[let]
        a, b = a * ga + b * gb.conjugate(), a * gb + b * ga.conjugate()
    return a, b


def _mp_apply(pair: tuple, z):
    a, b = pair
    return (a * z + b) / (b.conjugate() * z + a.conjugate())


def _mp_advance(z, u, s):
    # s = tanh(t/2) precomputed by the caller
    den = 1 + z.conjugate() * u * s
    z2 = (u * s + z) / den
    u2 = u / (den * den)
    return z2, u2 / abs(u2)


def _mp_reduce(S: SurfaceGroup, pairs: dict, z, u) -> tuple:
    """Pull an mp state back into the fundamental domain. The chart choice
    is combinatorial, so the float reducer picks the letters and mp applies
    them; near-tie choices just land in a neighboring valid chart."""
    red, om = S.reduce_to_domain(DiskPoint.interior(complex(z)))
    del red
    for let in om.letters:
        a, b = pairs[let]
        a, b = a.conjugate(), -b           # inverse pair
        den = b.conjugate() * z + a.conjugate()
        z = (a * z + b) / den
        u = u / (den * den)
        u = u / abs(u)
    return z, u, om


class _LineWalk:
    """Extended-precision walk along the segment from word_p(pz) to
    word_q(qz). Both anchors are moderate points in their own frames, so
    the segment is pinned end to end; the working precision scales with
    the length so the walk cannot drift off it."""

    def __init__(self, S: SurfaceGroup, word_p: GroupWord, pz: complex,
                 word_q: GroupWord, qz: complex, ell_hint: float):
        self.S = S
        dps = _mp_dps(max(float(ell_hint), 1.0))
        rel = word_p.inverse() * word_q
        for _ in range(6):      # hint can undershoot; retry with more digits
            self.dps = dps
            with mpmath.workdps(dps):
                self.pairs = _mp_pairs(S)
                z, u, om = _mp_reduce(S, self.pairs,
                                      mpmath.mpc(pz), mpmath.mpc(1))
                self.word = word_p * om
                # the far endpoint seen from the start frame fixes the
                # direction and the exact length
                wpair = _mp_eval(self.pairs, om.inverse() * rel)
                end = _mp_apply(wpair, mpmath.mpc(qz))
                q = (end - z) / (1 - z.conjugate() * end)
                aq = abs(q)
                if aq == 0:
                    raise DomainError("degenerate segment has no line walk")
                if aq < 1:
                    self.z, self.u = z, q / aq
                    self.length = float(2 * mpmath.atanh(aq))
                    if _mp_dps(self.length) <= dps:
                        return
                    dps = _mp_dps(self.length)
                    continue
            dps = 2 * dps + 30
        raise DomainError("line walk endpoints are not resolvable")

    def step(self, t: float) -> tuple:
        """Advance by t; returns (word, z1, u1, z2) floats with z1, z2 the
        pre/post points in the pre-step frame, then re-reduces."""
        with mpmath.workdps(self.dps):
            word = self.word
            z1, u1 = complex(self.z), complex(self.u)
            s = mpmath.tanh(mpmath.mpf(t) / 2)
            z2, u2 = _mp_advance(self.z, self.u, s)
            out = (word, z1, u1, complex(z2))
            z3, u3, om = _mp_reduce(self.S, self.pairs, z2, u2)
            self.z, self.u = z3, u3
            self.word = word * om
            return out

    def state(self) -> tuple:
        return self.word, complex(self.z), complex(self.u)




# ---------------------------------------------------------------------------
# atoms and currents


@dataclass(frozen=True)
class Atom:
    """One weighted geodesic segment.

    The authoritative data is the pair of endpoint anchors: a frame word
    plus a moderate local point for each end, global endpoint =
    word(point). anchor/z/u/length are a midpoint summary (global
    midpoint = anchor(z); the segment spans [-length/2, +length/2] from
    z along u in the anchor chart) used for merge keys, sampling and
    plots. A long segment cannot be recovered from the summary alone in
    float64; it can always be re-walked from the anchors.
    """
    anchor: GroupWord
    z: complex
    u: complex
    length: float
    weight: float
    p_word: GroupWord
    pz: complex
    q_word: GroupWord
    qz: complex

    def local_endpoints(self) -> tuple:
        s = math.tanh(self.length / 4.0)
        den_p = 1.0 - self.z.conjugate() * self.u * s
        den_q = 1.0 + self.z.conjugate() * self.u * s
        p = (-self.u * s + self.z) / den_p
        q = (self.u * s + self.z) / den_q
        return p, q

    def global_endpoints(self, S: SurfaceGroup) -> tuple:
        out = []
        for word, z in ((self.p_word, self.pz), (self.q_word, self.qz)):
            a, b = S.evaluate_raw(word)
            w = (a * z + b) / (b.conjugate() * z + a.conjugate())
            # a deep frame pins the image against the circle in floats
            if abs(w) >= 1.0:
                w *= (1.0 - 1e-15) / abs(w)
            out.append(DiskPoint.interior(w))
        return out[0], out[1]

    def _merge_key(self) -> tuple:
        return (round(self.z.real, _MERGE_DIGITS),
                round(self.z.imag, _MERGE_DIGITS),
                round(self.u.real, _MERGE_DIGITS),
                round(self.u.imag, _MERGE_DIGITS),
                round(self.length, _MERGE_DIGITS))


def _canonical_atom(S: SurfaceGroup, word_p: GroupWord, pz: complex,
                    word_q: GroupWord, qz: complex, ell_hint: float,
                    weight: float) -> Atom:
    """Summarize at the midpoint and canonicalize orientation."""
    walk = _LineWalk(S, word_p, pz, word_q, qz, ell_hint)
    length = walk.length
    left = length / 2.0
    while left > PIECE_LEN:
        walk.step(PIECE_LEN)
        left -= PIECE_LEN
    walk.step(left)
    word, z, u = walk.state()
    # orientation-free representative: prefer the direction with the
    # lexicographically larger rounded (re, im); the anchors swap too
    key_f = (round(u.real, _MERGE_DIGITS), round(u.imag, _MERGE_DIGITS))
    key_b = (round(-u.real, _MERGE_DIGITS), round(-u.imag, _MERGE_DIGITS))
    if key_b > key_f:
        u = -u
        word_p, pz, word_q, qz = word_q, qz, word_p, pz
    return Atom(word, z, u, length, weight, word_p, pz, word_q, qz)


@dataclass(frozen=True)
class GraphCurrent:
    """A finite weighted family of geodesic segments, one atom per
    pi1-orbit (construction merges duplicates by summing weights)."""
    atoms: tuple

    @property
    def mass(self) -> float:
        return float(sum(a.weight for a in self.atoms))

    @property
    def weighted_length(self) -> float:
        return float(sum(a.weight * a.length for a in self.atoms))

    @property
    def max_atom_length(self) -> float:
        return max((a.length for a in self.atoms), default=0.0)

    def scale(self, t: float) -> "GraphCurrent":
        if t < 0:
            raise DomainError("current weights must stay positive")
        if t == 0:
            return GraphCurrent(())
        return GraphCurrent(tuple(
            Atom(a.anchor, a.z, a.u, a.length, a.weight * t,
                 a.p_word, a.pz, a.q_word, a.qz)
            for a in self.atoms))

    def __rmul__(self, t: float) -> "GraphCurrent":
        return self.scale(t)

    def sort_key(self) -> tuple:
        return tuple(a._merge_key() + (round(a.weight, _MERGE_DIGITS),)
                     for a in self.atoms)

    def deck_transform(self, S: SurfaceGroup, w) -> "GraphCurrent":
        """The image under a global deck transformation. The local atom
        data is already orbit-canonical, so only the anchor words move."""
        w = w if isinstance(w, GroupWord) else GroupWord.parse(w)
        return GraphCurrent(tuple(
            Atom(w * a.anchor, a.z, a.u, a.length, a.weight,
                 w * a.p_word, a.pz, w * a.q_word, a.qz)
            for a in self.atoms))

    def to_json_dict(self) -> dict:
        out = []
        for a in self.atoms:
            out.append({"anchor": str(a.anchor),
                        "mid": [a.z.real, a.z.imag],
                        "dir": [a.u.real, a.u.imag],
                        "length": a.length, "weight": a.weight,
                        "p_word": str(a.p_word), "p": [a.pz.real, a.pz.imag],
                        "q_word": str(a.q_word), "q": [a.qz.real, a.qz.imag]})
        return {"schema": "corner-currents/current/1", "atoms": out}

    @staticmethod
    def from_json_dict(doc: dict) -> "GraphCurrent":
        if doc.get("schema") != "corner-currents/current/1":
            raise DomainError("unrecognized current schema")
        atoms = []
        for row in doc["atoms"]:
            atoms.append(Atom(GroupWord.parse(row["anchor"]),
                              complex(*row["mid"]), complex(*row["dir"]),
                              float(row["length"]), float(row["weight"]),
                              GroupWord.parse(row["p_word"]),
                              complex(*row["p"]),
                              GroupWord.parse(row["q_word"]),
                              complex(*row["q"])))
        return GraphCurrent(tuple(atoms))


def _merge_atoms(atoms) -> tuple:
    merged: dict = {}
    for a in atoms:
        k = a._merge_key()
        if k in merged:
            b = merged[k]
            merged[k] = Atom(b.anchor, b.z, b.u, b.length,
                             b.weight + a.weight,
                             b.p_word, b.pz, b.q_word, b.qz)
        else:
            merged[k] = a
    return tuple(merged[k] for k in sorted(merged))


def current_from_realization(S: SurfaceGroup, graph: MarkedGraph,
                             config: GraphConfiguration) -> GraphCurrent:
    """The current carried by a realized marked graph: one atom per edge
    orbit, degenerate edges dropped, pi1-duplicates merged."""
    atoms = []
    for e in graph.edges:
        p = config.positions[e.u].z
        g = S.evaluate_raw(e.gain)
        ell, _ = raw_reach(p, g, config.positions[e.v].z)
        if ell < DEGENERATE_ATOM_LEN:
            continue
        atoms.append(_canonical_atom(S, GroupWord.identity(), p,
                                     e.gain, config.positions[e.v].z,
                                     ell, e.weight))
    return GraphCurrent(_merge_atoms(atoms))


def closed_geodesic_current(S: SurfaceGroup, w, weight: float = 1.0
                            ) -> GraphCurrent:
    """One fundamental period of the axis of a hyperbolic word, as a
    single-atom current. Non-hyperbolic words are a domain error."""
    w = w if isinstance(w, GroupWord) else GroupWord.parse(w)
    g = S.evaluate_raw(w)
    if not raw_is_hyperbolic(g):
        raise DomainError(f"word {w} is not hyperbolic")
    if weight <= 0:
        raise DomainError("weight must be positive")
    # anchor both ends at the same moderate axis point: end = w(start)
    base = raw_axis(g).center_point().z
    ell, _ = raw_reach(base, g, base)
    return GraphCurrent((_canonical_atom(S, GroupWord.identity(), base,
                                         w, base, ell, weight),))


# ---------------------------------------------------------------------------
# pieces and the shared candidate ball


@dataclass
class _Piece:
    word: GroupWord        # frame: global = word(local)
    z_start: complex
    u_start: complex       # forward unit direction at z_start
    z_end: complex
    row: np.ndarray        # packed segment in the local frame
    start_internal: bool
    end_internal: bool


def _emit_pieces(walk: _LineWalk) -> list:
    ell = walk.length
    n = max(1, int(math.ceil(ell / PIECE_LEN - 1e-12)))
    step = ell / n
    pieces = []
    for k in range(n):
        word, z1, u1, z2 = walk.step(step)
        row = kernels.pack_segments_np(np.array([z1]), np.array([z2]))[0]
        pieces.append(_Piece(word, z1, u1, z2, row, k > 0, k < n - 1))
    return pieces


def atom_pieces(S: SurfaceGroup, a: Atom) -> list:
    """Cut an atom into <= PIECE_LEN pieces, each in its own reduced
    frame; orientation runs from the p-endpoint to the q-endpoint."""
    walk = _LineWalk(S, a.p_word, a.pz, a.q_word, a.qz, a.length)
    return _emit_pieces(walk)


def edge_pieces(S: SurfaceGroup, config: GraphConfiguration, e) -> tuple:
    """(length, pieces) for one realized edge, walked from its u endpoint;
    an effectively degenerate edge yields no pieces."""
    p = config.positions[e.u].z
    ell, _ = raw_reach(p, S.evaluate_raw(e.gain), config.positions[e.v].z)
    if ell < DEGENERATE_ATOM_LEN:
        return ell, []
    walk = _LineWalk(S, GroupWord.identity(), p,
                     e.gain, config.positions[e.v].z, ell)
    return walk.length, _emit_pieces(walk)


def contact_ball_radius(S: SurfaceGroup) -> float:
    return 2.0 * (S.circumradius + PIECE_LEN) + _CONTACT_SLACK


def _prefilter_abs(S: SurfaceGroup) -> float:
    d = S.circumradius + 2.0 * PIECE_LEN + _PREFILTER_SLACK
    return math.tanh(d / 2.0)


class _BallPack:
    """The shared candidate ball, packed once per call."""

    def __init__(self, S: SurfaceGroup, R: float):
        ball = enumerate_ball(S, R)
        self.words = [w for w, _ in ball]
        self.mats = kernels.pack_isometries([g for _, g in ball])

    def __len__(self):
        return len(self.words)


class _PieceImages:
    """Per-piece translate segments under the whole candidate ball,
    Euclidean-prefiltered, cached across atom pairs."""

    def __init__(self, S: SurfaceGroup, ball: _BallPack):
        self.S = S
        self.ball = ball
        self.cut = _prefilter_abs(S)
        self._cache: dict = {}
        self._pieces: dict = {}

    def pieces(self, cur_key, cur_atoms, ai: int) -> list:
        k = (cur_key, ai)
        if k not in self._pieces:
            self._pieces[k] = atom_pieces(self.S, cur_atoms[ai])
        return self._pieces[k]

    def set_pieces(self, cur_key, ai: int, pieces: list) -> None:
        """Register prebuilt pieces (edge segments instead of atoms)."""
        self._pieces[(cur_key, ai)] = pieces

    def images(self, cur_key, cur_atoms, ai: int, pj: int) -> tuple:
        """(keep_idx, T, E1) for piece pj of atom ai: candidate indices
        into the ball, packed translated rows, translated start points."""
        k = (cur_key, ai, pj)
        if k not in self._cache:
            piece = self.pieces(cur_key, cur_atoms, ai)[pj]
            E1 = kernels.apply_np(self.ball.mats, piece.z_start)
            E2 = kernels.apply_np(self.ball.mats, piece.z_end)
            keep = np.flatnonzero(np.minimum(np.abs(E1), np.abs(E2))
                                  <= self.cut)
            T = kernels.pack_segments_np(E1[keep], E2[keep])
            self._cache[k] = (keep, T, E1[keep])
        return self._cache[k]


# ---------------------------------------------------------------------------
# the intersection form


@dataclass(frozen=True)
class CrossingRow:
    """One counted contact: atoms by index in the caller's (mu, nu)
    order, the deck word carrying nu's atom, the contact point in the
    mu-piece frame, and the weight product contributed."""
    mu_atom: int
    nu_atom: int
    word: str
    kind: str              # transverse | shared_endpoint
    point: complex
    contribution: float


@dataclass(frozen=True)
class IntersectionResult:
    value: float
    rows: tuple
    shared_endpoint_count: int
    ball_radius: float
    convention_note: str

    def __float__(self):
        return self.value

    def to_csv(self) -> str:
        out = ["mu_atom,nu_atom,lift_word,kind,point_re,point_im,contribution"]
        for r in sorted(self.rows, key=lambda r: (
                r.mu_atom, r.nu_atom, r.word, r.point.real, r.point.imag)):
            out.append("%d,%d,%s,%s,%.17g,%.17g,%.17g" % (
                r.mu_atom, r.nu_atom, r.word or "1", r.kind,
                r.point.real, r.point.imag, r.contribution))
        return "\n".join(out) + "\n"


_CONVENTION_NOTE = (
    "contacts at shared endpoints are counted and flagged; overlapping "
    "(collinear) pairs contribute zero")


def classical_radius(S: SurfaceGroup, mu: GraphCurrent,
                     nu: GraphCurrent) -> float:
    """The length-scaled sufficiency radius the R parameter is validated
    against (center points within (l1+l2)/2 + octagon diameter)."""
    return mu.max_atom_length + nu.max_atom_length + 2.0 * S.circumradius


def intersection(S: SurfaceGroup, mu: GraphCurrent, nu: GraphCurrent,
                 R: Optional[float] = None, report: bool = False):
    """i(mu, nu) by explicit lift enumeration.

    Counted once per pi1-orbit of the atom pair: the mu-atom is fixed in
    its reduced frame and nu's atom ranges over ball translates. The two
    currents are pre-ordered canonically so the value is exactly
    symmetric. R, when given, is validated against the classical
    sufficiency radius; enumeration itself always uses the piece-local
    ball, which is independent of atom lengths.
    """
    if R is not None:
        need = classical_radius(S, mu, nu)
        if R < need - 1e-9:
            raise CoverageError("ball radius below the sufficiency bound",
                                need)
    swapped = nu.sort_key() < mu.sort_key()
    A, B = (nu, mu) if swapped else (mu, nu)

    Rb = contact_ball_radius(S)
    ball = _BallPack(S, Rb)
    cache = _PieceImages(S, ball)
    value = 0.0
    rows = []
    shared = 0
    for ia, a in enumerate(A.atoms):
        pieces_a = cache.pieces("A", A.atoms, ia)
        for ib, b in enumerate(B.atoms):
            contrib = a.weight * b.weight
            n_pieces_b = len(cache.pieces("B", B.atoms, ib))
            for pi, piece in enumerate(pieces_a):
                for pj in range(n_pieces_b):
                    keep, T, E1 = cache.images("B", B.atoms, ib, pj)
                    if len(keep) == 0:
                        continue
                    codes, pts = kernels.classify_segments(
                        piece.row.reshape(1, 10), T)
                    hit = np.flatnonzero((codes == 1) | (codes == 2))
                    if len(hit) == 0:
                        continue
                    piece_b = cache.pieces("B", B.atoms, ib)[pj]
                    for h in hit:
                        pt = pts[h]
                        if piece.start_internal and \
                                abs(pt - piece.z_start) <= _JUNCTION_TOL:
                            continue
                        if piece_b.start_internal and \
                                abs(pt - E1[h]) <= _JUNCTION_TOL:
                            continue
                        value += contrib
                        kind = "transverse" if codes[h] == 1 \
                            else "shared_endpoint"
                        if codes[h] == 2:
                            shared += 1
                        if report:
                            w = (piece.word
                                 * ball.words[keep[h]]
                                 * piece_b.word.inverse())
                            im, iv = (ib, ia) if swapped else (ia, ib)
                            rows.append(CrossingRow(
                                im, iv, str(w), kind, pt, contrib))
    if not report:
        return value
    return IntersectionResult(value, tuple(rows), shared, Rb,
                              _CONVENTION_NOTE)


def intersection_with_closed_geodesic(S: SurfaceGroup, mu: GraphCurrent,
                                      w, R: Optional[float] = None,
                                      report: bool = False):
    """i(mu, one axis period of w); equals intersection against the
    axis-period current by construction. Shared-endpoint contacts between
    an atom and the bi-infinite axis are counted and flagged (segment
    convention applied to the period atom)."""
    nu = closed_geodesic_current(S, w)
    return intersection(S, mu, nu, R=R, report=report)


# ---------------------------------------------------------------------------
# flow boxes


@dataclass(frozen=True)
class FlowBox:
    """Two disjoint closed Euclidean disks; the box is the set of
    segments with one endpoint in each."""
    x1: DiskPoint
    eps1: float
    x2: DiskPoint
    eps2: float

    def __post_init__(self):
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise DomainError("flow box radii must be positive")
        gap = abs(self.x1.z - self.x2.z) - (self.eps1 + self.eps2)
        if gap <= 1e-12:
            raise DomainError("flow box disks must have disjoint closures")

    @staticmethod
    def create(x1, eps1: float, x2, eps2: float) -> "FlowBox":
        return FlowBox(as_point(x1), float(eps1), as_point(x2), float(eps2))

    def shrink(self, f: float) -> "FlowBox":
        if not 0 < f <= 1:
            raise DomainError("shrink factor must be in (0, 1]")
        return FlowBox(self.x1, self.eps1 * f, self.x2, self.eps2 * f)


@dataclass(frozen=True)
class BoxContact:
    atom: int
    word: str
    endpoint: int          # 0 = p-end, 1 = q-end
    disk: int              # 1 or 2
    gap: float             # signed distance to the disk boundary


@dataclass(frozen=True)
class BoxMassReport:
    mass: float
    reach: float
    required_radius: float
    lifts_counted: int
    boundary_contacts: tuple
    per_atom: tuple        # (atom index, straddling lift count)

    def __float__(self):
        return self.mass


def _region_samples(c: complex, r: float, n_circle: int = 48,
                    n_ideal: int = 16) -> list:
    """Boundary samples of D(c, r) intersected with the closed unit disk:
    interior points of the circle plus the ideal arc it cuts out."""
    pts = []
    for k in range(n_circle):
        z = c + r * cmath.exp(2j * math.pi * k / n_circle)
        if abs(z) <= 1.0 - 1e-9:
            pts.append(DiskPoint.interior(z))
    ac = abs(c)
    if ac + r > 1.0 and ac > 1e-12:
        co = (1.0 + ac * ac - r * r) / (2.0 * ac)
        if co < 1.0:
            half = math.acos(max(-1.0, co))
            phi = cmath.phase(c)
            for t in np.linspace(-half, half, n_ideal):
                pts.append(DiskPoint.ideal_at(phi + float(t)))
    if not pts:
        # disk buried inside: fall back to its center
        pts.append(DiskPoint.interior(c))
    return pts


def _segment_origin_dist(P: DiskPoint, Q: DiskPoint) -> float:
    geo = Geodesic.through(P, Q)
    tp, tq = geo.param(P), geo.param(Q)
    lo, hi = min(tp, tq), max(tp, tq)
    if lo <= 0.0 <= hi:
        return geo.dist_to_point(0j)
    best = math.inf
    for E in (P, Q):
        if not E.ideal:
            best = min(best, dist(0j, E))
    return best


def box_reach(S: SurfaceGroup, box: FlowBox) -> float:
    """Upper bound H on d(0, segment) over segments with one endpoint in
    each disk region, from boundary sampling plus a one-unit margin."""
    s1 = _region_samples(box.x1.z, box.eps1)
    s2 = _region_samples(box.x2.z, box.eps2)
    H = 0.0
    for P in s1:
        for Q in s2:
            H = max(H, _segment_origin_dist(P, Q))
    return H + 1.0


def flow_box_mass(S: SurfaceGroup, mu: GraphCurrent, box: FlowBox,
                  R: Optional[float] = None) -> BoxMassReport:
    """Total weight of atom lifts with one endpoint in each disk.

    Strict interior containment counts; endpoints within
    BOUNDARY_CONTACT_TOL of a disk boundary are reported as admissibility
    contacts and never counted. An explicit R below the computed
    requirement raises a coverage error carrying that requirement.
    """
    H = box_reach(S, box)
    required = H + S.circumradius + PIECE_LEN + _CONTACT_SLACK
    if R is not None and R < required - 1e-9:
        raise CoverageError("ball radius cannot cover the box", required)
    ball = _BallPack(S, required)

    c1, e1 = box.x1.z, box.eps1
    c2, e2 = box.x2.z, box.eps2
    mass = 0.0
    lifts = 0
    contacts = []
    per_atom = []
    for ai, a in enumerate(mu.atoms):
        pieces = atom_pieces(S, a)
        W0 = pieces[0].word
        Wn = pieces[-1].word
        zp = pieces[0].z_start
        zq = pieces[-1].z_end
        found = []     # (piece index, ball index, h row)
        seen_words = set()
        for m, piece in enumerate(pieces):
            # raw pairs: these relative words span up to the whole atom
            dp = _raw_row(S, piece.word.inverse() * W0)
            dq = _raw_row(S, piece.word.inverse() * Wn)
            Gp = kernels.compose_np(ball.mats, dp[None, :])
            Gq = kernels.compose_np(ball.mats, dq[None, :])
            E1 = kernels.apply_np(Gp, zp)
            E2 = kernels.apply_np(Gq, zq)
            d11 = np.abs(E1 - c1) - e1
            d12 = np.abs(E1 - c2) - e2
            d21 = np.abs(E2 - c1) - e1
            d22 = np.abs(E2 - c2) - e2
            strad = ((d11 < 0) & (d22 < 0)) | ((d12 < 0) & (d21 < 0))
            for k in np.flatnonzero(strad):
                found.append((m, int(k)))
            near = (np.abs(d11) <= BOUNDARY_CONTACT_TOL) | \
                   (np.abs(d12) <= BOUNDARY_CONTACT_TOL) | \
                   (np.abs(d21) <= BOUNDARY_CONTACT_TOL) | \
                   (np.abs(d22) <= BOUNDARY_CONTACT_TOL)
            for k in np.flatnonzero(near):
                ws = str(ball.words[k] * piece.word.inverse())
                if ws in seen_words:
                    continue
                seen_words.add(ws)
                which = min(((abs(d11[k]), 0, 1), (abs(d12[k]), 0, 2),
                             (abs(d21[k]), 1, 1), (abs(d22[k]), 1, 2)))
                if which[0] <= BOUNDARY_CONTACT_TOL:
                    contacts.append(BoxContact(ai, ws, which[1], which[2],
                                               float(which[0])))
        count = _count_unique_lifts(S, ball, pieces, a.length / len(pieces),
                                    found, required)
        per_atom.append((ai, count))
        lifts += count
        mass += a.weight * count
    return BoxMassReport(mass, H, required, lifts, tuple(contacts),
                         tuple(per_atom))


def _iso_row(g: Isometry) -> np.ndarray:
    return np.array([g.a.real, g.a.imag, g.b.real, g.b.imag])


def _raw_row(S: SurfaceGroup, w: GroupWord) -> np.ndarray:
    a, b = S.evaluate_raw(w)
    return np.array([a.real, a.imag, b.real, b.imag])


def _count_unique_lifts(S: SurfaceGroup, ball: _BallPack, pieces, step: float,
                        found, Rb: float) -> int:
    """Straddling candidates (piece m, ball k) name the global lift
    g = h_k * W_m^-1; candidates from far-apart pieces are automatically
    distinct, nearby ones are compared through the moderate relative
    offset W_m^-1 W_m'."""
    if not found:
        return 0
    # one lift seen from two pieces forces their frames within 2 Rb of each
    # other; arclength separation bounds that from below, so far piece pairs
    # are distinct without ever forming their (deep) relative word
    sep_cut = 2.0 * Rb + 1.0 + 2.0 * (S.circumradius + PIECE_LEN) + 1.0
    kept = []
    for m, k in found:
        h = ball.mats[k]
        dup = False
        for m2, k2, h2 in kept:
            if m2 == m:
                if k2 == k:
                    dup = True
                    break
                continue
            if abs(m - m2) * step > sep_cut:
                continue
            delta = pieces[m2].word.inverse() * pieces[m].word
            ga, gb = S.evaluate_raw(delta)
            if 2.0 * math.asinh(abs(gb)) > 2.0 * Rb + 1.0:
                continue
            lhs = kernels.compose_np(_inv_row(h2)[None, :], h[None, :])[0]
            dref = np.array([ga.real, ga.imag, gb.real, gb.imag])
            scale = max(1.0, float(np.max(np.abs(dref))))
            if min(float(np.max(np.abs(lhs - dref))),
                   float(np.max(np.abs(lhs + dref)))) <= 1e-6 * scale:
                dup = True
                break
        if not dup:
            kept.append((m, k, h))
    return len(kept)


def _inv_row(row: np.ndarray) -> np.ndarray:
    return np.array([row[0], -row[1], -row[2], -row[3]])


# ---------------------------------------------------------------------------
# the Liouville pairing


def liouville_pairing(mu: GraphCurrent) -> float:
    """i(mu, Liouville) in closed form: sum of weight times length."""
    return mu.weighted_length


@dataclass(frozen=True)
class MonteCarloReport:
    estimate: float
    closed_form: float
    samples: int
    transverse_fraction: float
    suspect_samples: int   # non-transverse draws not explained by theta ~ 0

    def __float__(self):
        return self.estimate


def liouville_monte_carlo(S: SurfaceGroup, mu: GraphCurrent,
                          samples: int = 1_000_000,
                          seed: int = 0) -> MonteCarloReport:
    """Independent oracle for the Liouville pairing: per atom, integrate
    the density (1/2) sin(theta) over [0, length] x [0, pi] by uniform
    sampling. A bounded subsample of the drawn crossings is constructed
    explicitly (in the frame of the piece containing the sample point)
    and classified against that piece as a transversality check."""
    rng = np.random.default_rng(seed)
    if not mu.atoms:
        return MonteCarloReport(0.0, 0.0, 0, 1.0, 0)
    per = max(16, samples // len(mu.atoms))
    check_per_atom = 2000
    total = 0.0
    n_used = 0
    n_checked = 0
    n_transverse = 0
    n_suspect = 0
    delta = 0.05    # half-length of the sampled crossing segments
    s_half = math.tanh(delta / 2.0)
    for a in mu.atoms:
        t = rng.uniform(0.0, a.length, per)
        th = rng.uniform(0.0, math.pi, per)
        total += a.weight * a.length * math.pi * \
            float(np.mean(0.5 * np.sin(th)))
        n_used += per
        pieces = atom_pieces(S, a)
        step = a.length / len(pieces)
        m = min(per, check_per_atom)
        for k in range(m):
            pk = min(int(t[k] / step), len(pieces) - 1)
            piece = pieces[pk]
            base, fwd = _advance(piece.z_start, piece.u_start,
                                 t[k] - pk * step)
            d = fwd * cmath.exp(1j * th[k])
            den_p = 1.0 - base.conjugate() * d * s_half
            den_q = 1.0 + base.conjugate() * d * s_half
            ep = (-d * s_half + base) / den_p
            eq = (d * s_half + base) / den_q
            codes, _ = kernels.classify_one_vs_many(
                piece.row, kernels.pack_segments_np(
                    np.array([ep]), np.array([eq])))
            n_checked += 1
            if codes[0] == 1:
                n_transverse += 1
            elif math.sin(th[k]) > 1e-3 and \
                    min(t[k], a.length - t[k]) > 1e-6 * a.length:
                n_suspect += 1
    frac = n_transverse / max(1, n_checked)
    return MonteCarloReport(total, liouville_pairing(mu), n_used,
                            frac, n_suspect)


# ---------------------------------------------------------------------------
# homotopical intersection upper bound


@dataclass(frozen=True)
class HomotopicalBound:
    value: float
    witness: GraphConfiguration
    witness_target: Optional[GraphConfiguration]
    start_value: float
    evaluations: int
    improved: bool
    budget_exhausted: bool

    def __float__(self):
        return self.value


def homotopical_intersection_ub(S: SurfaceGroup, graph: MarkedGraph,
                                target, budget: int = 400,
                                seed: int = 0,
                                init: Optional[GraphConfiguration] = None,
                                init_target=None) -> HomotopicalBound:
    """Upper bound for the homotopical intersection number by
    crossing-count-penalized descent from the harmonic configuration.

    target is a hyperbolic GroupWord (curve case) or a second MarkedGraph
    (the target side then descends too). The returned value is i evaluated
    at the witness, hence always an upper bound for the true h and never
    above i at the starting configuration.
    """
    from .harmonic import balance_step_candidates, solve_harmonic

    rng = np.random.default_rng(seed)
    if init is None:
        init, rep = solve_harmonic(S, graph)
        rep.require_converged()

    if isinstance(target, MarkedGraph):
        cfg_t = init_target
        if cfg_t is None:
            cfg_t, rep_t = solve_harmonic(S, target)
            rep_t.require_converged()
        fixed_cur = None
    else:
        w = target if isinstance(target, GroupWord) else GroupWord.parse(target)
        fixed_cur = closed_geodesic_current(S, w)
        cfg_t = None

    evals = [0]

    def value_of(cfg, cfg2) -> tuple:
        evals[0] += 1
        mu = current_from_realization(S, graph, cfg)
        if fixed_cur is not None:
            v = intersection(S, mu, fixed_cur)
            L = mu.weighted_length
        else:
            nu = current_from_realization(S, target, cfg2)
            v = intersection(S, mu, nu)
            L = mu.weighted_length + nu.weighted_length
        return v, L

    cur = (init, cfg_t)
    best = value_of(*cur)
    start_value = best[0]
    exhausted = False

    def candidates(cfg, g, side_rng):
        """Generated per vertex: slides along incident edges, axis
        reflections across the target, and seeded jitters."""
        try:
            yield from balance_step_candidates(S, g, cfg)
        except DomainError:
            pass
        n = len(cfg.positions)
        for v in range(n):
            z = cfg.positions[v].z
            dirs = []
            for e in g.edges:
                if e.u == v:
                    q = S.apply_word(e.gain, cfg.positions[e.v]).z
                elif e.v == v:
                    q = S.apply_word(e.gain.inverse(), cfg.positions[e.u]).z
                else:
                    continue
                d = q - z
                if abs(d) > 1e-12:
                    dirs.append(d / abs(d))
            for d in dirs:
                for stp in (0.3, 0.8, 1.6):
                    z2, _ = _advance(z, d, stp)
                    yield cfg.replace(v, DiskPoint.interior(z2))
                    z3, _ = _advance(z, -d, stp)
                    yield cfg.replace(v, DiskPoint.interior(z3))
            if fixed_cur is not None:
                for zr in _axis_reflections(S, fixed_cur, z):
                    yield cfg.replace(v, DiskPoint.interior(zr))
            for _ in range(2):
                dz = (side_rng.normal(0, 0.08)
                      + 1j * side_rng.normal(0, 0.08))
                if abs(z + dz) < 0.995:
                    yield cfg.replace(v, DiskPoint.interior(z + dz))

    improved_any = True
    while improved_any:
        improved_any = False
        sides = [(0, graph)] if fixed_cur is not None else \
            [(0, graph), (1, target)]
        for side, g_side in sides:
            cfg_side = cur[side]
            for cand in candidates(cfg_side, g_side, rng):
                if evals[0] >= budget:
                    exhausted = True
                    break
                trial = (cand, cur[1]) if side == 0 else (cur[0], cand)
                val = value_of(*trial)
                if val[0] < best[0] - 1e-12 or \
                        (val[0] < best[0] + 1e-12 and
                         val[1] < best[1] - 1e-9):
                    cur = trial
                    best = val
                    improved_any = True
            if exhausted:
                break
        if exhausted:
            break

    final_val, _ = value_of(*cur)
    return HomotopicalBound(final_val, cur[0], cur[1], start_value,
                            evals[0], final_val < start_value - 1e-12,
                            exhausted)


def _axis_reflections(S: SurfaceGroup, cur: GraphCurrent, z: complex):
    """Reflections of z across domain-frame lifts of the current's atoms
    and their immediate side-pairing translates."""
    out = []
    for a in cur.atoms:
        geo = Geodesic.through(
            DiskPoint.interior(a.z),
            DiskPoint.interior(_advance(a.z, a.u, 0.5)[0]))
        lifts = [geo]
        for _, g in S.pairing_elements:
            lifts.append(geo.transform(g))
        for gg in lifts:
            zr = _reflect(gg, z)
            if zr is not None and abs(zr) < 0.999:
                out.append(zr)
    return out


def _reflect(geo: Geodesic, z: complex) -> Optional[complex]:
    if geo.is_diameter:
        d = geo.direction
        return d * (z / d).conjugate()
    c, r = geo.center, geo.radius
    dz = z - c
    if abs(dz) < 1e-12:
        return None
    return c + (r * r) * dz / (abs(dz) ** 2)
