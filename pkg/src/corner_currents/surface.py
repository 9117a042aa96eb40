"""Genus-2 surface group: octagon, side pairings, words, reduction, balls.

The fundamental domain is the regular hyperbolic octagon centered at 0 with
vertices at Euclidean radius 2^(-1/4) and angles pi/8 + k pi/4. Interior
angles are 2pi/8, so the quotient is a closed genus-2 surface with deck
group generated by four side pairings a1, b1, a2, b2 satisfying the relator
[a1,b1][a2,b2] = 1. The pairing convention (source side -> target side,
orientation reversed):

    a1: s2 -> s0   (v2 -> v1, v3 -> v0)
    b1: s1 -> s3   (v1 -> v4, v2 -> v3)
    a2: s6 -> s4   (v6 -> v5, v7 -> v4)
    b2: s5 -> s7   (v5 -> v0, v6 -> v7)

where side s_k joins v_k to v_{k+1}. With these, g(F) is the neighbor of F
across the target side and g^{-1}(F) across the source side, and every side
of F lies on the perpendicular bisector of [0, g.0] for its neighbor g
(Dirichlet domain at 0).
"""

from __future__ import annotations

import cmath
import math
import os
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hyp import (
    DiskPoint, DomainError, Geodesic, Isometry, as_point, dist,
    isometry_from_two_points,
)

GEN_NAMES = ("a1", "b1", "a2", "b2")

# Words sending the base corner v0 to v_k; verified against the pairings at
# build time. Left-to-right letters multiply as matrices (leftmost outermost).
CORNER_WORD_STRINGS = (
    "", "a1 b1- a1-", "b1- a1-", "a1-",
    "b1 a1 b1- a1-", "b2-", "a2- b2-", "b2 a2- b2-",
)

BALL_CAP_DEFAULT = 5_000_000
CACHE_ENV = "CORNER_CURRENTS_CACHE"

_BALL_GRID = 0.5
_DEDUP_DISP_BUCKET = 1e-6
_DEDUP_MATRIX_TOL = 1e-8


class ResourceError(RuntimeError):
    """An enumeration exceeded its configured cap."""


class SurfaceError(ValueError):
    """A surface failed an integrity check."""


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word in a1, b1, a2, b2.

    letters are (generator index, sign) pairs with sign in {+1, -1}. The
    string form writes inverses with a minus suffix: "a1 b1- a2".
    """

    letters: tuple = ()

    @staticmethod
    def identity() -> "GroupWord":
        return GroupWord(())

    @staticmethod
    def from_letters(letters) -> "GroupWord":
        return GroupWord(_free_reduce(tuple(letters)))

    @staticmethod
    def parse(s: str) -> "GroupWord":
        letters = []
        for tok in s.split():
            inv = tok.endswith("-")
            name = tok[:-1] if inv else tok
            if name not in GEN_NAMES:
                raise DomainError(f"unknown generator {tok!r}")
            letters.append((GEN_NAMES.index(name), -1 if inv else 1))
        return GroupWord.from_letters(letters)

    def __str__(self) -> str:
        return " ".join(GEN_NAMES[g] + ("-" if s < 0 else "") for g, s in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(_free_reduce(self.letters + other.letters))

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((g, -s) for g, s in reversed(self.letters)))

    def is_identity(self) -> bool:
        return not self.letters

    def sort_key(self):
        return (len(self.letters), self.letters)


def _free_reduce(letters: tuple) -> tuple:
    out: list = []
    for let in letters:
        if out and out[-1][0] == let[0] and out[-1][1] == -let[1]:
            out.pop()
        else:
            out.append(let)
    return tuple(out)


def commutator_word(x: GroupWord, y: GroupWord) -> GroupWord:
    return x * y * x.inverse() * y.inverse()


def relator_word() -> GroupWord:
    a1, b1, a2, b2 = (GroupWord(((i, 1),)) for i in range(4))
    return commutator_word(a1, b1) * commutator_word(a2, b2)


@dataclass(frozen=True)
class SurfaceGroup:
    """Immutable genus-2 Fuchsian group with its fundamental octagon."""

    genus: int
    generators: tuple            # 4 Isometry values, order a1 b1 a2 b2
    octagon: tuple               # 8 DiskPoint vertices
    side_midpoints: tuple        # 8 DiskPoint, midpoint of side k
    circumradius: float
    inradius: float
    relator_residual: float
    corner_words: tuple          # 8 GroupWord, corner_words[k](v0) = v_k
    _gen_table: dict = field(compare=False, repr=False, default_factory=dict)
    _ball_cache: dict = field(compare=False, repr=False, default_factory=dict)

    def generator(self, index: int, sign: int) -> Isometry:
        return self._gen_table[(index, sign)]

    def evaluate(self, w: GroupWord) -> Isometry:
        g = Isometry.identity()
        for let in w.letters:
            g = g @ self._gen_table[let]
        return g

    def evaluate_raw(self, w: GroupWord) -> tuple:
        """The word's matrix as an unnormalized (a, b) pair.

        evaluate() renormalizes every step and dies past displacement ~35;
        this path works for deep words (see the raw pair notes in hyp).
        """
        a, b = 1.0 + 0.0j, 0.0j
        for let in w.letters:
            g = self._gen_table[let]
            a, b = a * g.a + b * g.b.conjugate(), a * g.b + b * g.a.conjugate()
        return a, b

    def apply_word(self, w: GroupWord, p) -> DiskPoint:
        return self.evaluate(w).apply(p)

    @property
    def pairing_elements(self):
        """The 8 side neighbors (a1, a1-, b1, b1-, ...) with their letters."""
        out = []
        for i in range(4):
            out.append(((i, 1), self._gen_table[(i, 1)]))
            out.append(((i, -1), self._gen_table[(i, -1)]))
        return out

    # -- queries ---------------------------------------------------------

    def contains_in_domain(self, p, slack: float = 1e-9) -> bool:
        """Whether p lies in the closed fundamental octagon (Dirichlet test)."""
        z = as_point(p).require_interior("domain test")
        d0 = dist(0j, z)
        for _, g in self.pairing_elements:
            if d0 > dist(z, g.apply_z(0j)) + slack:
                return False
        return True

    def reduce_to_domain(self, p) -> tuple:
        """Move p into the closed octagon; returns (reduced, word) with
        word(reduced) = p. Greedy descent over the 8 side neighbors."""
        z = as_point(p).require_interior("reduce_to_domain")
        letters: list = []
        d = dist(0j, z)
        while True:
            best = None
            for let, g in self.pairing_elements:
                w = g.inverse().apply_z(z)
                dw = dist(0j, w)
                if dw < d - 1e-13 and (best is None or dw < best[0]):
                    best = (dw, w, let)
            if best is None:
                break
            d, z, let = best
            letters.append(let)
        return DiskPoint.interior(z), GroupWord.from_letters(letters)

    def surface_report(self) -> dict:
        """Integrity numbers: relator residual, angle sum, bisectors, lengths."""
        angles = _interior_angles(self.octagon)
        bis = []
        for k, (let, g) in enumerate(_side_owner_table(self)):
            va, vb = self.octagon[k], self.octagon[(k + 1) % 8]
            w = g.apply_z(0j)
            bis.append(max(abs(dist(0j, va.z) - dist(va.z, w)),
                           abs(dist(0j, vb.z) - dist(vb.z, w))))
        return {
            "relator_residual": self.relator_residual,
            "angle_sum_error": abs(sum(angles) - 2.0 * math.pi),
            "angles": angles,
            "side_bisector_residuals": bis,
            "generator_translation_lengths": [g.translation_length()
                                              for g in self.generators],
            "circumradius": self.circumradius,
            "inradius": self.inradius,
        }

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "schema": "corner-currents/surface/1",
            "genus": self.genus,
            "generators": {
                name: [[f"{g.a.real:.17g}", f"{g.a.imag:.17g}"],
                       [f"{g.b.real:.17g}", f"{g.b.imag:.17g}"]]
                for name, g in zip(GEN_NAMES, self.generators)
            },
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "SurfaceGroup":
        if doc.get("schema") != "corner-currents/surface/1":
            raise SurfaceError("unrecognized surface schema")
        gens = []
        for name in GEN_NAMES:
            (ar, ai), (br, bi) = doc["generators"][name]
            gens.append(Isometry.normalized(complex(float(ar), float(ai)),
                                            complex(float(br), float(bi))))
        return _assemble(tuple(gens))


def _octagon_vertices() -> tuple:
    r = 2.0 ** -0.25
    return tuple(DiskPoint.interior(r * cmath.exp(1j * (math.pi / 8 + k * math.pi / 4)))
                 for k in range(8))


def _interior_angles(verts) -> list:
    from .hyp import log_map
    out = []
    for k in range(8):
        v = verts[k]
        t1 = log_map(v, verts[(k - 1) % 8])
        t2 = log_map(v, verts[(k + 1) % 8])
        out.append(abs(cmath.phase(t2.v / t1.v)))
    return out


def _side_owner_table(G: SurfaceGroup):
    # Neighbor element across side k, in side order 0..7.
    t = G._gen_table
    return [((0, 1), t[(0, 1)]), ((1, -1), t[(1, -1)]),
            ((0, -1), t[(0, -1)]), ((1, 1), t[(1, 1)]),
            ((2, 1), t[(2, 1)]), ((3, -1), t[(3, -1)]),
            ((2, -1), t[(2, -1)]), ((3, 1), t[(3, 1)])]


def _assemble(gens: tuple) -> SurfaceGroup:
    verts = _octagon_vertices()
    table = {}
    for i, g in enumerate(gens):
        table[(i, 1)] = g
        table[(i, -1)] = g.inverse()

    rel = Isometry.identity()
    for let in relator_word().letters:
        rel = rel @ table[let]
    relc = rel.sign_canonical()
    residual = max(abs(relc.a - 1.0), abs(relc.b))
    if residual > 1e-9:
        raise SurfaceError(f"relator residual {residual:.3e} exceeds 1e-9")
    for g in gens:
        if not g.is_hyperbolic():
            raise SurfaceError("all generators must be hyperbolic")

    from .hyp import GeodesicSegment
    mids = tuple(GeodesicSegment.between(verts[k], verts[(k + 1) % 8]).midpoint()
                 for k in range(8))

    G = SurfaceGroup(
        genus=2,
        generators=gens,
        octagon=verts,
        side_midpoints=mids,
        circumradius=dist(0j, verts[0].z),
        inradius=dist(0j, mids[0].z),
        relator_residual=residual,
        corner_words=tuple(GroupWord.parse(s) for s in CORNER_WORD_STRINGS),
        _gen_table=table,
    )
    # Corner words must reproduce the vertex orbit exactly.
    for k, w in enumerate(G.corner_words):
        if abs(G.apply_word(w, verts[0]).z - verts[k].z) > 1e-9:
            raise SurfaceError(f"corner word {k} does not map v0 to v{k}")
    return G


def build_genus2() -> SurfaceGroup:
    """The standard symmetric genus-2 surface group."""
    verts = _octagon_vertices()

    def pairing(i_src, j_src, i_dst, j_dst):
        return isometry_from_two_points(verts[i_src], verts[j_src],
                                        verts[i_dst], verts[j_dst])

    a1 = pairing(2, 3, 1, 0)
    b1 = pairing(1, 2, 4, 3)
    a2 = pairing(6, 7, 5, 4)
    b2 = pairing(5, 6, 0, 7)
    return _assemble((a1, b1, a2, b2))


def word_to_isometry(G: SurfaceGroup, w: GroupWord) -> Isometry:
    return G.evaluate(w)


def axis_and_translation_length(g: Isometry) -> tuple:
    """(axis geodesic, translation length) of a hyperbolic isometry."""
    if not g.is_hyperbolic():
        raise DomainError("axis requires a hyperbolic isometry")
    return g.axis(), g.translation_length()


# ---------------------------------------------------------------------------
# Ball enumeration.
#
# BFS over right multiplication by the 8 side pairings. Any g with
# d(0, g.0) <= R is reachable through prefixes of displacement at most
# R + circumradius (the geodesic [0, g.0] crosses a chain of octagon copies
# whose centers stay within circumradius of it), so the frontier keeps
# everything up to R + circumradius + 0.5 and the output is filtered to R.


def _canonical_key(g: Isometry):
    c = g.sign_canonical()
    return (c.a.real, c.a.imag, c.b.real, c.b.imag)


class _Dedup:
    # displacement bucket at 1e-6, then matrix compare at 1e-8
    def __init__(self):
        self.buckets: dict = {}

    def add(self, disp: float, g: Isometry) -> bool:
        b = int(disp / _DEDUP_DISP_BUCKET)
        ka = _canonical_key(g)
        for bb in (b - 1, b, b + 1):
            for k in self.buckets.get(bb, ()):
                if max(abs(k[0] - ka[0]), abs(k[1] - ka[1]),
                       abs(k[2] - ka[2]), abs(k[3] - ka[3])) <= _DEDUP_MATRIX_TOL:
                    return False
        self.buckets.setdefault(b, []).append(ka)
        return True


def _build_ball(G: SurfaceGroup, R: float, cap: int):
    out = [(GroupWord.identity(), Isometry.identity(), 0.0)]
    dedup = _Dedup()
    dedup.add(0.0, Isometry.identity())
    keep = R + G.circumradius + 0.5
    frontier = [(GroupWord.identity(), Isometry.identity())]
    total = 1
    while frontier:
        nxt = []
        for word, g in frontier:
            for let, h in G.pairing_elements:
                g2 = g @ h
                disp = dist(0j, g2.apply_z(0j))
                if disp > keep:
                    continue
                if not dedup.add(disp, g2):
                    continue
                w2 = GroupWord.from_letters(word.letters + (let,))
                nxt.append((w2, g2))
                total += 1
                if total > cap:
                    raise ResourceError(
                        f"ball enumeration exceeded cap {cap} at R = {R}")
                if disp <= R + 1e-9:
                    out.append((w2, g2, disp))
        # deterministic expansion order regardless of dict/hash state
        nxt.sort(key=lambda t: t[0].sort_key())
        frontier = nxt
    out.sort(key=lambda t: (t[2], t[0].sort_key()))
    return out


def _encode_words(words) -> tuple:
    flat, offs = [], [0]
    for w in words:
        flat.extend(g * 2 + (0 if s > 0 else 1) for g, s in w.letters)
        offs.append(len(flat))
    return np.asarray(flat, dtype=np.int8), np.asarray(offs, dtype=np.int64)


def _decode_words(flat, offs):
    out = []
    for i in range(len(offs) - 1):
        letters = tuple((int(c) // 2, 1 if int(c) % 2 == 0 else -1)
                        for c in flat[offs[i]:offs[i + 1]])
        out.append(GroupWord(letters))
    return out


def _cache_path(R_grid: float) -> Optional[str]:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    os.makedirs(root, exist_ok=True)
    return os.path.join(root, f"ball_R{R_grid:.1f}.npz")


# Population is synchronized so concurrent solves share one build; reads of a
# populated entry stay lock-free (dict get on the per-surface cache).
_BALL_BUILD_LOCK = threading.Lock()


def enumerate_ball(G: SurfaceGroup, R: float, cap: int = BALL_CAP_DEFAULT):
    """All (word, isometry) with d(0, g.0) <= R, deduplicated and sorted by
    displacement. Results are cached per 0.5-rounded radius, in memory and
    optionally on disk under $CORNER_CURRENTS_CACHE."""
    if R < 0:
        raise DomainError("ball radius must be >= 0")
    R_grid = math.ceil(R / _BALL_GRID) * _BALL_GRID
    cached = G._ball_cache.get(R_grid)
    if cached is None:
        with _BALL_BUILD_LOCK:
            cached = G._ball_cache.get(R_grid)
            if cached is None:
                cached = _load_ball(G, R_grid)
            if cached is None:
                cached = _build_ball(G, R_grid, cap)
                _store_ball(G, R_grid, cached)
            G._ball_cache[R_grid] = cached
    return [(w, g) for (w, g, disp) in cached if disp <= R + 1e-9]


def _store_ball(G: SurfaceGroup, R_grid: float, ball) -> None:
    path = _cache_path(R_grid)
    if path is None or os.path.exists(path):
        return
    mats = np.array([[g.a.real, g.a.imag, g.b.real, g.b.imag]
                     for _, g, _ in ball], dtype=np.float64)
    disps = np.array([d for _, _, d in ball], dtype=np.float64)
    flat, offs = _encode_words([w for w, _, _ in ball])
    gens = np.array([[g.a.real, g.a.imag, g.b.real, g.b.imag]
                     for g in G.generators], dtype=np.float64)
    tmp = path + ".tmp.npz"  # savez appends .npz unless already suffixed
    np.savez(tmp, mats=mats, disps=disps, words=flat, offsets=offs, gens=gens)
    os.replace(tmp, path)


def _load_ball(G: SurfaceGroup, R_grid: float):
    path = _cache_path(R_grid)
    if path is None or not os.path.exists(path):
        return None
    try:
        data = np.load(path)
        gens = np.array([[g.a.real, g.a.imag, g.b.real, g.b.imag]
                         for g in G.generators], dtype=np.float64)
        if data["gens"].shape != gens.shape or np.max(np.abs(data["gens"] - gens)) > 1e-12:
            return None
        words = _decode_words(data["words"], data["offsets"])
        out = []
        for i, w in enumerate(words):
            m = data["mats"][i]
            out.append((w, Isometry(complex(m[0], m[1]), complex(m[2], m[3])),
                        float(data["disps"][i])))
        return out
    except Exception:
        return None
