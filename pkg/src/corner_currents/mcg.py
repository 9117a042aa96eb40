"""Mapping classes as relator-preserving automorphisms of the genus-2
surface group.

A class is stored by its generator images together with a stored inverse
(inverting a general automorphism is a search problem this module does
not attempt; built-ins have closed-form inverses and data files must ship
theirs). Composition is substitution. Equality in the mapping class group
is not decided here: classes are deduplicated by a translation-length
fingerprint, the sorted lengths of the images of a fixed probe list,
which is exactly invariant under inner automorphisms. Equal fingerprints
with different secondary-probe behavior are kept and flagged, never
silently merged.

Numerical note: an image of the relator is trivial in the group, so its
letter path wanders out and returns, and a float64 matrix product loses
roughly e^(max prefix displacement) * 1e-16 along the way. Validation
therefore evaluates such words in extended precision. The built-in twists
fix the relator exactly in the free group, so for twist compositions the
check short-circuits symbolically and costs nothing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import mpmath

from .currents import _mp_eval, _mp_pairs
from .graphs import Edge, MarkedGraph, normalize
from .surface import (GEN_NAMES, GroupWord, ResourceError, SurfaceGroup,
                      relator_word)

RELATOR_TOL = 1e-8
FINGERPRINT_DIGITS = 6
_GEN_WORDS = tuple(GroupWord.parse(n) for n in GEN_NAMES)

# No two probes are conjugate or inverse-conjugate to each other, so the
# 16 lengths carry 16 independent constraints; the commutator probe is
# constant on twist compositions by design (a canary for loaded files).
PROBE_WORDS = tuple(GroupWord.parse(s) for s in (
    "a1", "b1", "a2", "b2",
    "a1 b1", "a1 b1-", "b1 a2", "b1 a2-",
    "a2 b2", "a2 b2-", "a1 a2", "a1 b2",
    "b1 b2", "a1 b1 a2", "a1 b1 a2 b2", "a1 b1 a1- b1-",
))


class McgError(ValueError):
    """A mapping class fails validation or loading."""


@dataclass(frozen=True)
class MappingClass:
    """An automorphism by generator images, with its inverse stored.

    provenance is the defining word in named generators ("Ta1 Tb1-",
    empty for the identity); it names the class in reports and is not
    used for equality.
    """
    images: tuple          # GroupWord per generator, GEN_NAMES order
    inv_images: tuple
    provenance: str

    @staticmethod
    def identity() -> "MappingClass":
        return MappingClass(_GEN_WORDS, _GEN_WORDS, "")

    def apply(self, w: GroupWord) -> GroupWord:
        return _substitute(self.images, w)

    def apply_inverse(self, w: GroupWord) -> GroupWord:
        return _substitute(self.inv_images, w)

    def compose(self, other: "MappingClass") -> "MappingClass":
        """self after other, like function composition."""
        images = tuple(self.apply(w) for w in other.images)
        inv = tuple(other.apply_inverse(w) for w in self.inv_images)
        prov = (self.provenance + " " + other.provenance).strip()
        return MappingClass(images, inv, prov)

    def inverse(self) -> "MappingClass":
        return MappingClass(self.inv_images, self.images,
                            _invert_provenance(self.provenance))

    def fixes_generators(self) -> bool:
        return self.images == _GEN_WORDS


def _substitute(images: tuple, w: GroupWord) -> GroupWord:
    out = GroupWord.identity()
    for g, s in w.letters:
        out = out * (images[g] if s > 0 else images[g].inverse())
    return out


def _invert_provenance(prov: str) -> str:
    toks = prov.split()
    out = []
    for t in reversed(toks):
        out.append(t[:-1] if t.endswith("-") else t + "-")
    return " ".join(out)


def _token_inverts(a: str, b: str) -> bool:
    return bool(a) and bool(b) and (a == b + "-" or b == a + "-")


# ---------------------------------------------------------------------------
# validation

# prefix displacement <= 3.06 per letter (origin orbit step), so this dps
# keeps the product error far below the acceptance threshold
def _word_dps(n_letters: int) -> int:
    return 30 + int(1.4 * n_letters)


def _mp_residual_from_identity(S: SurfaceGroup, w: GroupWord) -> float:
    if w.is_identity():
        return 0.0
    with mpmath.workdps(_word_dps(len(w))):
        a, b = _mp_eval(_mp_pairs(S), w)
        return float(min(abs(a - 1) + abs(b), abs(a + 1) + abs(b)))


def image_relator_residual(S: SurfaceGroup, f: MappingClass) -> float:
    """How far the image of the relator is from the identity isometry.

    Zero exactly when the image word free-reduces away (built-in twists
    and their compositions); extended-precision matrix distance to +-1
    otherwise.
    """
    return _mp_residual_from_identity(S, f.apply(relator_word()))


def validate_mapping_class(S: SurfaceGroup, f: MappingClass,
                           name: Optional[str] = None) -> None:
    label = name or (f.provenance or "identity")
    res = image_relator_residual(S, f)
    if not res < RELATOR_TOL:
        raise McgError(f"automorphism {label}: image-relator residual "
                       f"{res:.3e} exceeds {RELATOR_TOL:g}")
    for i, x in enumerate(_GEN_WORDS):
        rt = f.apply(f.apply_inverse(x)) * x.inverse()
        if _mp_residual_from_identity(S, rt) >= RELATOR_TOL:
            raise McgError(f"automorphism {label}: stored inverse does not "
                           f"round-trip {GEN_NAMES[i]}")


# ---------------------------------------------------------------------------
# built-ins and the data file


def _builtin_twists() -> list:
    out = []
    for tname, moved, factor in (("Ta1", 1, 0), ("Tb1", 0, 1),
                                 ("Ta2", 3, 2), ("Tb2", 2, 3)):
        ims = list(_GEN_WORDS)
        ims[moved] = _GEN_WORDS[moved] * _GEN_WORDS[factor]
        inv = list(_GEN_WORDS)
        inv[moved] = _GEN_WORDS[moved] * _GEN_WORDS[factor].inverse()
        out.append(MappingClass(tuple(ims), tuple(inv), tname))
    return out


_AUTOMORPHISM_KEYS = {"name", "images", "inverse_images", "comment"}


def load_automorphisms(S: SurfaceGroup, path: Optional[str] = None) -> list:
    """Automorphisms from a JSON data file, relator-validated.

    Each entry: {name, images: {a1,b1,a2,b2}, inverse_images: {...}}.
    The inverse is required: enumeration needs it and recovering it from
    the images alone is not attempted.
    """
    if path is None:
        text = resources.files("corner_currents") \
            .joinpath("data/extra_automorphisms.json").read_text()
    else:
        with open(path, "r") as fh:
            text = fh.read()
    doc = json.loads(text)
    if not isinstance(doc, list):
        raise McgError("automorphism file must be a JSON list")
    out = []
    for row in doc:
        unknown = set(row) - _AUTOMORPHISM_KEYS
        if unknown:
            raise McgError(f"automorphism entry has unknown fields {sorted(unknown)}")
        name = row["name"]
        try:
            ims = tuple(GroupWord.parse(row["images"][n]) for n in GEN_NAMES)
        except KeyError as exc:
            raise McgError(f"automorphism {name}: missing image {exc}") from exc
        if "inverse_images" not in row:
            raise McgError(f"automorphism {name}: inverse_images required")
        inv = tuple(GroupWord.parse(row["inverse_images"][n])
                    for n in GEN_NAMES)
        f = MappingClass(ims, inv, name)
        validate_mapping_class(S, f, name)
        out.append(f)
    return out


def twist_generators(S: SurfaceGroup, extra_path: Optional[str] = None,
                     include_extra: bool = True) -> list:
    """The four built-in Dehn twists (T_a1: b1 -> b1 a1; T_b1: a1 -> a1 b1;
    T_a2, T_b2 symmetric), each validated, plus data-file extras."""
    gens = _builtin_twists()
    for f in gens:
        validate_mapping_class(S, f)
    if include_extra:
        gens.extend(load_automorphisms(S, extra_path))
    return gens


# ---------------------------------------------------------------------------
# the action on marked graphs


def act(f: MappingClass, g: MarkedGraph) -> MarkedGraph:
    """Gains through f, then regauged to spanning-tree normal form;
    weights and combinatorics untouched."""
    edges = tuple(Edge(e.u, e.v, e.weight, f.apply(e.gain))
                  for e in g.edges)
    return normalize(MarkedGraph(g.n_vertices, edges, g.is_triangulation))[0]


# ---------------------------------------------------------------------------
# fingerprints


def _probe_lengths(S: SurfaceGroup, f: MappingClass,
                   probes: tuple = PROBE_WORDS) -> tuple:
    """Unrounded translation lengths of the probe images.

    Evaluated on the freely reduced substituted word. Reduction removes
    the junction cancellations between consecutive generator images, so
    the float product follows a quasi-geodesic path and keeps absolute
    accuracy around 1e-12; multiplying the unreduced image matrices
    instead dips through near-identity turns and can lose 1e-6, enough
    to corrupt the rounded fingerprint.
    """
    out = []
    for w in probes:
        word = f.apply(w)
        if word.is_identity():
            out.append(0.0)
            continue
        a, _ = S.evaluate_raw(word)
        half = abs(a.real)
        if half <= 1.0 + 1e-9 or not math.isfinite(half):
            # collapsed or overflowed product: redo in extended precision
            with mpmath.workdps(_word_dps(len(word))):
                ma, _ = _mp_eval(_mp_pairs(S), word)
                mh = abs(mpmath.mpf(ma.real))
                out.append(0.0 if mh <= 1
                           else float(2 * mpmath.acosh(mh)))
        else:
            out.append(2.0 * math.acosh(half))
    return tuple(out)


def orbit_fingerprint(S: SurfaceGroup, f: MappingClass,
                      probes: tuple = PROBE_WORDS) -> tuple:
    """Sorted translation lengths of the probe images, rounded to 1e-6.

    Invariant under composing f with inner automorphisms: conjugation
    preserves every probe image's conjugacy class, hence its length.
    """
    return tuple(sorted(round(x, FINGERPRINT_DIGITS)
                        for x in _probe_lengths(S, f, probes)))


def homology_action(f: MappingClass) -> tuple:
    """The induced integer matrix on first homology, flattened; column i
    is the exponent-sum vector of the i-th generator image. Inner
    automorphisms act trivially here, so this is an outer invariant."""
    out = []
    for w in f.images:
        e = [0, 0, 0, 0]
        for g, s in w.letters:
            e[g] += s
        out.extend(e)
    return tuple(out)


def secondary_probe(S: SurfaceGroup, f: MappingClass) -> tuple:
    """Tiebreak data for equal fingerprints: the homology action plus the
    unsorted rounded probe lengths.

    Length data alone cannot separate a class induced by an isometry of
    this very symmetric surface (the handle swap, for one) from the
    identity, since an isometry preserves the whole marked length
    spectrum; the homology action is exact integer data and can.
    """
    lens = tuple(round(x, FINGERPRINT_DIGITS)
                 for x in _probe_lengths(S, f, PROBE_WORDS))
    return homology_action(f), lens


_DEDUP_TOL = 1e-7


class _DedupIndex:
    """Fingerprint dedup that tolerates float noise at rounding edges.

    Keys classes under two rounding grids offset by half a fingerprint
    step: a length lands within tolerance of a boundary of at most one
    grid, so two evaluations of the same class always collide on at
    least one key. The homology action plus an unrounded length
    comparison then decides merge versus keep-and-flag.
    """

    def __init__(self):
        self._seen = {}

    @staticmethod
    def _keys(lengths: tuple) -> tuple:
        step = 10.0 ** -FINGERPRINT_DIGITS
        ka = tuple(sorted(round(x, FINGERPRINT_DIGITS) for x in lengths))
        kb = tuple(sorted(round(x + 0.5 * step, FINGERPRINT_DIGITS)
                          for x in lengths))
        return ("a",) + ka, ("b",) + kb

    def probe(self, lengths: tuple, hom: tuple, index: int) -> tuple:
        """Match or register (lengths, hom) under the given index.

        Returns (matched earlier index or None, flagged earlier index or
        None); the entry is registered only when no match was found.
        """
        entries = []
        ids = set()
        keys = self._keys(lengths)
        for k in keys:
            for e in self._seen.get(k, ()):
                if id(e) not in ids:
                    ids.add(id(e))
                    entries.append(e)
        for ehom, elens, eidx in entries:
            if ehom == hom and all(abs(x - y) < _DEDUP_TOL
                                   for x, y in zip(elens, lengths)):
                return eidx, None
        entry = (hom, lengths, index)
        for k in keys:
            self._seen.setdefault(k, []).append(entry)
        return None, (entries[0][2] if entries else None)


# ---------------------------------------------------------------------------
# ball enumeration


@dataclass(frozen=True)
class BallEnumeration:
    """Fingerprint-deduplicated ball in the generated subgroup.

    classes[0] is the identity; parents[i] indexes the class one letter
    shorter that produced class i (warm-start chain), levels[i] its word
    length, collisions the kept fingerprint ties (earlier index, later
    index). Counting results downstream are counts over this ball, not
    over the full mapping class group.
    """
    classes: tuple
    fingerprints: tuple
    parents: tuple
    levels: tuple
    collisions: tuple
    alphabet: tuple

    def __len__(self) -> int:
        return len(self.classes)


def enumerate_mcg_ball(S: SurfaceGroup, gens: list, n: int,
                       cap: int = 100000) -> BallEnumeration:
    """All products of <= n generator letters, fingerprint-deduplicated.

    Extension is on the left, so a class at word length k+1 acts on a
    graph one twist away from its parent's image at length k. Discovery
    order (parent order, then letter order) fixes the output order, so
    the enumeration is deterministic.
    """
    if n < 0:
        raise McgError("ball radius must be >= 0")
    letters = []
    for g in gens:
        letters.append(g)
        letters.append(g.inverse())
    ident = MappingClass.identity()
    classes = [ident]
    lens0 = _probe_lengths(S, ident)
    fps = [tuple(sorted(round(x, FINGERPRINT_DIGITS) for x in lens0))]
    parents = [-1]
    levels = [0]
    collisions = []
    dedup = _DedupIndex()
    dedup.probe(lens0, homology_action(ident), 0)
    frontier = [0]
    for level in range(1, n + 1):
        fresh = []
        for pi in frontier:
            parent = classes[pi]
            first = parent.provenance.split(" ", 1)[0]
            for let in letters:
                if _token_inverts(let.provenance, first):
                    continue
                cand = let.compose(parent)
                if len(classes) >= cap:
                    raise ResourceError(
                        f"mcg ball exceeded cap {cap} at word length {level}")
                lens = _probe_lengths(S, cand)
                matched, tie = dedup.probe(lens, homology_action(cand),
                                           len(classes))
                if matched is not None:
                    continue
                if tie is not None:
                    collisions.append((tie, len(classes)))
                validate_mapping_class(S, cand)
                fresh.append(len(classes))
                classes.append(cand)
                fps.append(tuple(sorted(round(x, FINGERPRINT_DIGITS)
                                        for x in lens)))
                parents.append(pi)
                levels.append(level)
        frontier = fresh
    return BallEnumeration(tuple(classes), tuple(fps), tuple(parents),
                           tuple(levels), tuple(collisions),
                           tuple(l.provenance for l in letters))
