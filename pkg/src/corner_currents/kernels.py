"""Batched geometry kernels: isometry composition/application and the
segment-crossing classifier over a packed array layout.

Two interchangeable backends produce identical results:

  * numba  - scalar loops jitted with @njit
  * numpy  - vectorized masks, no compilation

selected by CORNER_CURRENTS_KERNEL in {auto, numba, numpy} at import time
(auto prefers numba when importable). The packed segment layout is a float64
(n, 10) array:

  col 0,1  first endpoint x, y        col 4,5  circle center (or unit
  col 2,3  second endpoint x, y                direction for a diameter)
  col 6    circle radius (0 for diameter)
  col 7    1.0 if diameter else 0.0
  col 8,9  param range lo, hi (angle about center against the to-origin
           direction for arcs; signed coordinate along d for diameters)

Classifier codes: 0 none, 1 transverse (including endpoint-on-interior
contacts), 2 shared endpoint, 3 collinear overlap. Codes 1 and 2 contribute
to intersection counts; 3 contributes zero.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .hyp import COINCIDENCE_TOL, ON_GEODESIC_TOL, SAME_GEODESIC_TOL

_ENV = "CORNER_CURRENTS_KERNEL"

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f
        return deco(args[0]) if args and callable(args[0]) else deco

# exact IEEE semantics: parity between backends matters more than speed here
njit_opts = {
    "cache": True,
    "nogil": True,
    "fastmath": False,
}


def _requested_backend() -> str:
    v = os.environ.get(_ENV, "auto").strip().lower()
    if v not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV} must be auto, numba or numpy, got {v!r}")
    if v == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    if v == "numba" and not HAS_NUMBA:
        raise ImportError(f"{_ENV}=numba but numba is not importable")
    return v


BACKEND = _requested_backend()


def backend_name() -> str:
    return BACKEND


# ---------------------------------------------------------------------------
# isometry arrays: float64 (n, 4) rows [re a, im a, re b, im b]


def pack_isometries(gs) -> np.ndarray:
    out = np.empty((len(gs), 4), dtype=np.float64)
    for i, g in enumerate(gs):
        out[i, 0], out[i, 1] = g.a.real, g.a.imag
        out[i, 2], out[i, 3] = g.b.real, g.b.imag
    return out


def compose_np(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Row-wise composition (A then B as functions: result = A o B).

    Broadcasts when either input has a single row. The product is NOT
    renormalized: unit-determinant inputs stay unit to rounding, and deep
    raw rows (whose float determinant is meaningless) must pass through
    untouched because every consumer is a ratio of entries.
    """
    a1 = A[:, 0] + 1j * A[:, 1]
    b1 = A[:, 2] + 1j * A[:, 3]
    a2 = B[:, 0] + 1j * B[:, 1]
    b2 = B[:, 2] + 1j * B[:, 3]
    a = a1 * a2 + b1 * np.conj(b2)
    b = a1 * b2 + b1 * np.conj(a2)
    n = max(len(A), len(B))
    out = np.empty((n, 4), dtype=np.float64)
    out[:, 0], out[:, 1] = a.real, a.imag
    out[:, 2], out[:, 3] = b.real, b.imag
    return out


def apply_np(G: np.ndarray, z: complex) -> np.ndarray:
    """Apply each packed isometry to one interior point; complex (n,)."""
    a = G[:, 0] + 1j * G[:, 1]
    b = G[:, 2] + 1j * G[:, 3]
    return (a * z + b) / (np.conj(b) * z + np.conj(a))


# ---------------------------------------------------------------------------
# packed segments


def pack_segments_np(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Packed rows for segments [P[i], Q[i]] given interior complex endpoints."""
    P = np.asarray(P, dtype=np.complex128)
    Q = np.asarray(Q, dtype=np.complex128)
    n = len(P)
    out = np.zeros((n, 10), dtype=np.float64)
    out[:, 0], out[:, 1] = P.real, P.imag
    out[:, 2], out[:, 3] = Q.real, Q.imag

    # orthogonal circle: 2(cx px + cy py) = |p|^2 + 1 for both endpoints
    rp = np.abs(P) ** 2 + 1.0
    rq = np.abs(Q) ** 2 + 1.0
    det = 4.0 * (P.real * Q.imag - P.imag * Q.real)
    diam = np.abs(det) < 1e-12
    arc = ~diam

    with np.errstate(divide="ignore", invalid="ignore"):
        cx = (rp * 2.0 * Q.imag - rq * 2.0 * P.imag) / det
        cy = (rq * 2.0 * P.real - rp * 2.0 * Q.real) / det
    cx = np.where(arc, cx, 0.0)
    cy = np.where(arc, cy, 0.0)
    r = np.where(arc, np.sqrt(np.maximum(cx * cx + cy * cy - 1.0, 0.0)), 0.0)

    # diameter direction
    d = Q - P
    dn = np.abs(d)
    dx = np.where(diam, np.where(dn > 0, d.real / np.where(dn > 0, dn, 1.0), 1.0), cx)
    dy = np.where(diam, np.where(dn > 0, d.imag / np.where(dn > 0, dn, 1.0), 0.0), cy)
    out[:, 4], out[:, 5] = dx, dy
    out[:, 6] = r
    out[:, 7] = diam.astype(np.float64)

    t_p = _param_np(out, P)
    t_q = _param_np(out, Q)
    out[:, 8] = np.minimum(t_p, t_q)
    out[:, 9] = np.maximum(t_p, t_q)
    return out


def _param_np(S: np.ndarray, z: np.ndarray) -> np.ndarray:
    diam = S[:, 7] > 0.5
    dx, dy = S[:, 4], S[:, 5]
    t_d = z.real * dx + z.imag * dy
    c = dx + 1j * dy  # arc rows: center
    cn = np.abs(c)
    cn_safe = np.where(cn > 0, cn, 1.0)
    e = -c / cn_safe
    u = z - c
    t_a = np.arctan2(e.real * u.imag - e.imag * u.real,
                     e.real * u.real + e.imag * u.imag)
    return np.where(diam, t_d, t_a)


def _side_np(S: np.ndarray, z: np.ndarray) -> np.ndarray:
    diam = S[:, 7] > 0.5
    dx, dy = S[:, 4], S[:, 5]
    s_d = dx * z.imag - dy * z.real
    s_a = np.abs(z - (dx + 1j * dy)) - S[:, 6]
    return np.where(diam, s_d, s_a)


# ---------------------------------------------------------------------------
# classifier, numpy backend


def classify_np(A: np.ndarray, B: np.ndarray):
    """Row-wise crossing classification. Returns (codes int8 (n,), points
    complex (n,), crossing point where defined else 0)."""
    n = max(len(A), len(B))
    A = np.broadcast_to(A, (n, 10))
    B = np.broadcast_to(B, (n, 10))
    codes = np.zeros(n, dtype=np.int8)
    pts = np.zeros(n, dtype=np.complex128)

    a1 = A[:, 0] + 1j * A[:, 1]
    a2 = A[:, 2] + 1j * A[:, 3]
    b1 = B[:, 0] + 1j * B[:, 1]
    b2 = B[:, 2] + 1j * B[:, 3]

    # shared endpoints
    tol = COINCIDENCE_TOL
    sh11 = np.abs(a1 - b1) <= tol
    sh12 = np.abs(a1 - b2) <= tol
    sh21 = np.abs(a2 - b1) <= tol
    sh22 = np.abs(a2 - b2) <= tol
    shared = sh11 | sh12 | sh21 | sh22
    shared_pt = np.where(sh11 | sh12, a1, a2)

    # same supporting geodesic
    dA, dB = A[:, 7] > 0.5, B[:, 7] > 0.5
    both_d = dA & dB
    both_a = ~dA & ~dB
    cross_dir = np.abs(A[:, 4] * B[:, 5] - A[:, 5] * B[:, 4])
    same_d = both_d & (cross_dir <= SAME_GEODESIC_TOL)
    cA = A[:, 4] + 1j * A[:, 5]
    cB = B[:, 4] + 1j * B[:, 5]
    same_a = both_a & (np.abs(cA - cB) <= SAME_GEODESIC_TOL) \
        & (np.abs(A[:, 6] - B[:, 6]) <= SAME_GEODESIC_TOL)
    same = same_d | same_a

    # collinear branch: param overlap measured on A's geodesic
    pb1 = _param_np(A, b1)
    pb2 = _param_np(A, b2)
    lo2 = np.minimum(pb1, pb2)
    hi2 = np.maximum(pb1, pb2)
    olo = np.maximum(A[:, 8], lo2)
    ohi = np.minimum(A[:, 9], hi2)
    span = ohi - olo
    eps_a = np.where(dA, tol, tol / np.where(A[:, 6] > 0, A[:, 6], 1.0))
    col_overlap = same & (span > eps_a)
    col_shared = same & ~col_overlap & (shared | (span >= -eps_a))
    codes[col_overlap] = 3
    codes[col_shared] = 2
    pts[col_shared] = np.where(shared[col_shared], shared_pt[col_shared],
                               _point_at_np(A, (olo + ohi) / 2.0)[col_shared])
    done = same

    # plain shared endpoint
    m = ~done & shared
    codes[m] = 2
    pts[m] = shared_pt[m]
    done = done | m

    # side values
    sB_a1 = _side_np(B, a1)
    sB_a2 = _side_np(B, a2)
    sA_b1 = _side_np(A, b1)
    sA_b2 = _side_np(A, b2)

    band = ON_GEODESIC_TOL
    eps_b = np.where(dB, tol, tol / np.where(B[:, 6] > 0, B[:, 6], 1.0))
    pa1 = _param_np(B, a1)
    pa2 = _param_np(B, a2)
    t1 = (np.abs(sB_a1) <= band) & (pa1 >= B[:, 8] - eps_b) & (pa1 <= B[:, 9] + eps_b)
    t2 = (np.abs(sB_a2) <= band) & (pa2 >= B[:, 8] - eps_b) & (pa2 <= B[:, 9] + eps_b)
    t3 = (np.abs(sA_b1) <= band) & (pb1 >= A[:, 8] - eps_a) & (pb1 <= A[:, 9] + eps_a)
    t4 = (np.abs(sA_b2) <= band) & (pb2 >= A[:, 8] - eps_a) & (pb2 <= A[:, 9] + eps_a)
    for t_mask, pt in ((t1, a1), (t2, a2), (t3, b1), (t4, b2)):
        m = ~done & t_mask
        codes[m] = 1
        pts[m] = pt[m]
        done = done | m

    # strict two-sided crossing
    m = ~done & (sB_a1 * sB_a2 < 0.0) & (sA_b1 * sA_b2 < 0.0)
    if np.any(m):
        z = _crossing_np(A, B)
        ok = m & ~np.isnan(z.real)
        codes[ok] = 1
        pts[ok] = z[ok]
    return codes, pts


def _point_at_np(S: np.ndarray, t: np.ndarray) -> np.ndarray:
    diam = S[:, 7] > 0.5
    d = S[:, 4] + 1j * S[:, 5]
    z_d = d * t
    cn = np.abs(d)
    e = -d / np.where(cn > 0, cn, 1.0)
    z_a = d + S[:, 6] * e * np.exp(1j * t)
    return np.where(diam, z_d, z_a)


def _crossing_np(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Intersection of supporting geodesics, NaN when none inside the disk."""
    n = len(A)
    out = np.full(n, np.nan + 0j, dtype=np.complex128)
    dA, dB = A[:, 7] > 0.5, B[:, 7] > 0.5

    m = dA & dB
    out[m] = 0.0 + 0.0j

    for first_d, X, Y in ((True, A, B), (False, B, A)):
        # X diameter, Y arc
        m = (X[:, 7] > 0.5) & (Y[:, 7] < 0.5) & ~(dA & dB)
        if not np.any(m):
            continue
        d = X[:, 4] + 1j * X[:, 5]
        c = Y[:, 4] + 1j * Y[:, 5]
        pr = c.real * d.real + c.imag * d.imag
        disc = pr * pr - (np.abs(c) ** 2 - Y[:, 6] ** 2)
        ok = m & (disc >= 0.0)
        sq = np.sqrt(np.where(disc >= 0, disc, 0.0))
        for sgn in (-1.0, 1.0):
            z = d * (pr + sgn * sq)
            pick = ok & (np.abs(z) < 1.0) & np.isnan(out.real)
            out[pick] = z[pick]

    m = ~dA & ~dB
    if np.any(m):
        c1 = A[:, 4] + 1j * A[:, 5]
        c2 = B[:, 4] + 1j * B[:, 5]
        dc = c2 - c1
        d2 = np.abs(dc) ** 2
        ok = m & (d2 >= 1e-30)
        d2s = np.where(d2 > 0, d2, 1.0)
        k = (A[:, 6] ** 2 - B[:, 6] ** 2 + d2) / (2.0 * d2s)
        base = c1 + k * dc
        h2 = A[:, 6] ** 2 - k * k * d2
        ok = ok & (h2 >= 0.0)
        h = np.sqrt(np.where(h2 >= 0, h2, 0.0))
        off = 1j * dc / np.sqrt(d2s) * h
        for sgn in (1.0, -1.0):
            z = base + sgn * off
            pick = ok & (np.abs(z) < 1.0) & np.isnan(out.real)
            out[pick] = z[pick]
    return out


# ---------------------------------------------------------------------------
# scalar reference implementation (jitted under the numba backend)


def _classify_scalar_py(arow, brow, out_codes, out_px, out_py, i):
    tol = COINCIDENCE_TOL
    band = ON_GEODESIC_TOL
    stol = SAME_GEODESIC_TOL

    a1x, a1y, a2x, a2y = arow[0], arow[1], arow[2], arow[3]
    b1x, b1y, b2x, b2y = brow[0], brow[1], brow[2], brow[3]
    dA = arow[7] > 0.5
    dB = brow[7] > 0.5

    # shared endpoints
    shx, shy = 0.0, 0.0
    shared = False
    for ex, ey in ((a1x, a1y), (a2x, a2y)):
        for fx, fy in ((b1x, b1y), (b2x, b2y)):
            if math.hypot(ex - fx, ey - fy) <= tol:
                shared = True
                shx, shy = ex, ey
    # same supporting geodesic
    same = False
    if dA and dB:
        same = abs(arow[4] * brow[5] - arow[5] * brow[4]) <= stol
    elif (not dA) and (not dB):
        same = (math.hypot(arow[4] - brow[4], arow[5] - brow[5]) <= stol
                and abs(arow[6] - brow[6]) <= stol)

    eps_a = tol if dA else tol / (arow[6] if arow[6] > 0 else 1.0)
    pb1 = _param_scalar(arow, b1x, b1y)
    pb2 = _param_scalar(arow, b2x, b2y)

    if same:
        lo2 = pb1 if pb1 < pb2 else pb2
        hi2 = pb2 if pb2 > pb1 else pb1
        olo = arow[8] if arow[8] > lo2 else lo2
        ohi = arow[9] if arow[9] < hi2 else hi2
        span = ohi - olo
        if span > eps_a:
            out_codes[i] = 3
            return
        if shared:
            out_codes[i] = 2
            out_px[i], out_py[i] = shx, shy
            return
        if span >= -eps_a:
            px, py = _point_at_scalar(arow, 0.5 * (olo + ohi))
            out_codes[i] = 2
            out_px[i], out_py[i] = px, py
            return
        out_codes[i] = 0
        return

    if shared:
        out_codes[i] = 2
        out_px[i], out_py[i] = shx, shy
        return

    sB_a1 = _side_scalar(brow, a1x, a1y)
    sB_a2 = _side_scalar(brow, a2x, a2y)
    sA_b1 = _side_scalar(arow, b1x, b1y)
    sA_b2 = _side_scalar(arow, b2x, b2y)
    eps_b = tol if dB else tol / (brow[6] if brow[6] > 0 else 1.0)

    if abs(sB_a1) <= band:
        t = _param_scalar(brow, a1x, a1y)
        if brow[8] - eps_b <= t <= brow[9] + eps_b:
            out_codes[i] = 1
            out_px[i], out_py[i] = a1x, a1y
            return
    if abs(sB_a2) <= band:
        t = _param_scalar(brow, a2x, a2y)
        if brow[8] - eps_b <= t <= brow[9] + eps_b:
            out_codes[i] = 1
            out_px[i], out_py[i] = a2x, a2y
            return
    if abs(sA_b1) <= band:
        if arow[8] - eps_a <= pb1 <= arow[9] + eps_a:
            out_codes[i] = 1
            out_px[i], out_py[i] = b1x, b1y
            return
    if abs(sA_b2) <= band:
        if arow[8] - eps_a <= pb2 <= arow[9] + eps_a:
            out_codes[i] = 1
            out_px[i], out_py[i] = b2x, b2y
            return

    if sB_a1 * sB_a2 < 0.0 and sA_b1 * sA_b2 < 0.0:
        ok, px, py = _crossing_scalar(arow, brow)
        if ok:
            out_codes[i] = 1
            out_px[i], out_py[i] = px, py
            return
    out_codes[i] = 0


def _param_scalar_py(S, zx, zy):
    if S[7] > 0.5:
        return zx * S[4] + zy * S[5]
    cx, cy = S[4], S[5]
    cn = math.hypot(cx, cy)
    ex, ey = -cx / cn, -cy / cn
    ux, uy = zx - cx, zy - cy
    return math.atan2(ex * uy - ey * ux, ex * ux + ey * uy)


def _side_scalar_py(S, zx, zy):
    if S[7] > 0.5:
        return S[4] * zy - S[5] * zx
    return math.hypot(zx - S[4], zy - S[5]) - S[6]


def _point_at_scalar_py(S, t):
    if S[7] > 0.5:
        return S[4] * t, S[5] * t
    cx, cy = S[4], S[5]
    cn = math.hypot(cx, cy)
    ex, ey = -cx / cn, -cy / cn
    ca, sa = math.cos(t), math.sin(t)
    rx, ry = ex * ca - ey * sa, ex * sa + ey * ca
    return cx + S[6] * rx, cy + S[6] * ry


def _crossing_scalar_py(A, B):
    dA = A[7] > 0.5
    dB = B[7] > 0.5
    if dA and dB:
        return True, 0.0, 0.0
    if dA or dB:
        X, Y = (A, B) if dA else (B, A)
        dx, dy = X[4], X[5]
        cx, cy, r = Y[4], Y[5], Y[6]
        pr = cx * dx + cy * dy
        disc = pr * pr - (cx * cx + cy * cy - r * r)
        if disc < 0.0:
            return False, 0.0, 0.0
        sq = math.sqrt(disc)
        for t in (pr - sq, pr + sq):
            zx, zy = dx * t, dy * t
            if math.hypot(zx, zy) < 1.0:
                return True, zx, zy
        return False, 0.0, 0.0
    c1x, c1y, r1 = A[4], A[5], A[6]
    c2x, c2y, r2 = B[4], B[5], B[6]
    dcx, dcy = c2x - c1x, c2y - c1y
    d2 = dcx * dcx + dcy * dcy
    if d2 < 1e-30:
        return False, 0.0, 0.0
    k = (r1 * r1 - r2 * r2 + d2) / (2.0 * d2)
    bx, by = c1x + k * dcx, c1y + k * dcy
    h2 = r1 * r1 - k * k * d2
    if h2 < 0.0:
        return False, 0.0, 0.0
    h = math.sqrt(h2)
    dn = math.sqrt(d2)
    ox, oy = -dcy / dn * h, dcx / dn * h
    for sgn in (1.0, -1.0):
        zx, zy = bx + sgn * ox, by + sgn * oy
        if math.hypot(zx, zy) < 1.0:
            return True, zx, zy
    return False, 0.0, 0.0


def _classify_loop_py(A, B, codes, px, py):
    n = codes.shape[0]
    nA, nB = A.shape[0], B.shape[0]
    for i in range(n):
        _classify_scalar(A[i % nA], B[i % nB], codes, px, py, i)


if HAS_NUMBA:
    _param_scalar = njit(**njit_opts)(_param_scalar_py)
    _side_scalar = njit(**njit_opts)(_side_scalar_py)
    _point_at_scalar = njit(**njit_opts)(_point_at_scalar_py)
    _crossing_scalar = njit(**njit_opts)(_crossing_scalar_py)
    _classify_scalar = njit(**njit_opts)(_classify_scalar_py)
    _classify_loop = njit(**njit_opts)(_classify_loop_py)
else:
    _param_scalar = _param_scalar_py
    _side_scalar = _side_scalar_py
    _point_at_scalar = _point_at_scalar_py
    _crossing_scalar = _crossing_scalar_py
    _classify_scalar = _classify_scalar_py
    _classify_loop = _classify_loop_py


def classify_numba(A: np.ndarray, B: np.ndarray):
    n = max(len(A), len(B))
    codes = np.zeros(n, dtype=np.int8)
    px = np.zeros(n, dtype=np.float64)
    py = np.zeros(n, dtype=np.float64)
    _classify_loop(np.ascontiguousarray(A), np.ascontiguousarray(B),
                   codes, px, py)
    return codes, px + 1j * py


def _classify_grid_loop_py(A, B, codes, px, py):
    nA, nB = A.shape[0], B.shape[0]
    for i in range(nA):
        for j in range(nB):
            _classify_scalar(A[i], B[j], codes, px, py, i * nB + j)


def classify_grid_numba(A: np.ndarray, B: np.ndarray):
    n = len(A) * len(B)
    codes = np.zeros(n, dtype=np.int8)
    px = np.zeros(n, dtype=np.float64)
    py = np.zeros(n, dtype=np.float64)
    _classify_grid_loop(np.ascontiguousarray(A), np.ascontiguousarray(B),
                        codes, px, py)
    return codes.reshape(len(A), len(B)), (px + 1j * py).reshape(len(A),
                                                                 len(B))


def classify_grid_np(A: np.ndarray, B: np.ndarray):
    AA = np.repeat(A, len(B), axis=0)
    BB = np.tile(B, (len(A), 1))
    codes, pts = classify_np(AA, BB)
    return codes.reshape(len(A), len(B)), pts.reshape(len(A), len(B))


# ---------------------------------------------------------------------------
# solver sweeps over a packed graph
#
# Layout: pz complex128 (n,) positions; per edge complex128 gain pair
# (ea, eb), float64 weight ew, int64 endpoints eu, ev; vertex stars in CSR
# form ibase (n+1,), iedge / idir (2m,), idir +1 when the vertex is the
# edge's u end. All reach math mirrors hyp.raw_reach / graphs.edge_reach;
# the exp step mirrors hyp.exp_map specialized to a chart tangent.
# Error convention: sweeps return 0 on success, 1 on a degenerate star
# edge, 2 on a non-interior point; evals return nan instead. Callers fall
# back to the object path, which raises the descriptive errors.


def _reach_scalar_py(zu, a, b, zv):
    s = math.sqrt(1.0 - (zu.real * zu.real + zu.imag * zu.imag))
    Ma = 1.0 / s
    Mb = -zu / s
    A = Ma * a + Mb * b.conjugate()
    B = Ma * b + Mb * a.conjugate()
    den = B.conjugate() * zv + A.conjugate()
    w = (A * zv + B) / den
    one_minus = (1.0 - (zv.real * zv.real + zv.imag * zv.imag)) \
        / (den.real * den.real + den.imag * den.imag)
    if one_minus <= 0.0:
        return -1.0, complex(1.0, 0.0)
    aw = math.sqrt(max(0.0, 1.0 - one_minus))
    if aw < 1e-300:
        return 0.0, complex(1.0, 0.0)
    ell = math.log((1.0 + aw) * (1.0 + aw) / one_minus)
    return ell, w / abs(w)


def _star_reach_py(pz, ea, eb, eu, ev, e, direction, zv):
    if direction > 0:
        return _reach_scalar(zv, ea[e], eb[e], pz[ev[e]])
    return _reach_scalar(zv, ea[e].conjugate(), -eb[e], pz[eu[e]])


def _chart_exp_py(z, vec):
    # geodesic step from z with chart velocity vec (hyp.exp_map inlined)
    av = abs(vec)
    if av == 0.0:
        return z
    d = av * 2.0 / (1.0 - (z.real * z.real + z.imag * z.imag))
    w = math.tanh(d / 2.0) * (vec / av)
    return (w + z) / (1.0 + z.conjugate() * w)


def _harmonic_sweep_py(pz, ea, eb, ew, eu, ev, ibase, iedge, idir, wsum,
                       step, degen_len):
    n = pz.shape[0]
    for v in range(n):
        zv = pz[v]
        if zv.real * zv.real + zv.imag * zv.imag >= 1.0:
            return 2
        acc = complex(0.0, 0.0)
        for k in range(ibase[v], ibase[v + 1]):
            e = iedge[k]
            ell, u = _star_reach(pz, ea, eb, eu, ev, e, idir[k], zv)
            if ell < 0.0:
                return 2
            if ell <= degen_len:
                return 1
            acc += ew[e] * ell * u
        pz[v] = _chart_exp(zv, acc * (step / (2.0 * wsum[v])))
    return 0


def _length_sweep_py(pz, ea, eb, ew, eu, ev, ibase, iedge, idir, step,
                     merge_tol):
    n = pz.shape[0]
    for v in range(n):
        zv = pz[v]
        if zv.real * zv.real + zv.imag * zv.imag >= 1.0:
            return 2
        direction = complex(0.0, 0.0)
        curvature = 0.0
        budget = 0.0
        for k in range(ibase[v], ibase[v + 1]):
            e = iedge[k]
            ell, u = _star_reach(pz, ea, eb, eu, ev, e, idir[k], zv)
            if ell < 0.0:
                return 2
            if ell <= merge_tol:
                budget += ew[e]
                continue
            direction += ew[e] * u
            curvature += ew[e] / math.tanh(max(ell, 1e-12))
        nrm = abs(direction) * 2.0 / (1.0 - (zv.real * zv.real
                                             + zv.imag * zv.imag))
        if nrm <= budget or nrm == 0.0:
            continue
        pz[v] = _chart_exp(zv, direction * (step / curvature))
    return 0


def _objective_eval_py(pz, ea, eb, ew, eu, ev):
    # (energy, weighted length, min edge length); nan triple on error
    energy = 0.0
    length = 0.0
    min_ell = math.inf
    m = ea.shape[0]
    for e in range(m):
        zu = pz[eu[e]]
        if zu.real * zu.real + zu.imag * zu.imag >= 1.0:
            return math.nan, math.nan, math.nan
        ell, _ = _reach_scalar(zu, ea[e], eb[e], pz[ev[e]])
        if ell < 0.0:
            return math.nan, math.nan, math.nan
        energy += ew[e] * ell * ell
        length += ew[e] * ell
        if ell < min_ell:
            min_ell = ell
    return energy, length, min_ell


def _deviation_eval_py(pz, ea, eb, ew, eu, ev, ibase, iedge, idir,
                       degen_len):
    total = 0.0
    n = pz.shape[0]
    for v in range(n):
        zv = pz[v]
        if zv.real * zv.real + zv.imag * zv.imag >= 1.0:
            return math.nan
        acc = complex(0.0, 0.0)
        for k in range(ibase[v], ibase[v + 1]):
            e = iedge[k]
            ell, u = _star_reach(pz, ea, eb, eu, ev, e, idir[k], zv)
            if ell < 0.0 or ell <= degen_len:
                return math.nan
            acc += ew[e] * ell * u
        total += abs(acc) * 2.0 / (1.0 - (zv.real * zv.real
                                          + zv.imag * zv.imag))
    return total


def _fermat_eval_py(pz, ea, eb, ew, eu, ev, ibase, iedge, idir, merge_tol):
    total = 0.0
    n = pz.shape[0]
    for v in range(n):
        zv = pz[v]
        if zv.real * zv.real + zv.imag * zv.imag >= 1.0:
            return math.nan
        direction = complex(0.0, 0.0)
        budget = 0.0
        for k in range(ibase[v], ibase[v + 1]):
            e = iedge[k]
            ell, u = _star_reach(pz, ea, eb, eu, ev, e, idir[k], zv)
            if ell < 0.0:
                return math.nan
            if ell <= merge_tol:
                budget += ew[e]
                continue
            direction += ew[e] * u
        nrm = abs(direction) * 2.0 / (1.0 - (zv.real * zv.real
                                             + zv.imag * zv.imag))
        total += max(0.0, nrm - budget)
    return total


if HAS_NUMBA:
    _classify_grid_loop = njit(**njit_opts)(_classify_grid_loop_py)
    _reach_scalar = njit(**njit_opts)(_reach_scalar_py)
    _star_reach = njit(**njit_opts)(_star_reach_py)
    _chart_exp = njit(**njit_opts)(_chart_exp_py)
    harmonic_sweep = njit(**njit_opts)(_harmonic_sweep_py)
    length_sweep = njit(**njit_opts)(_length_sweep_py)
    objective_eval = njit(**njit_opts)(_objective_eval_py)
    deviation_eval = njit(**njit_opts)(_deviation_eval_py)
    fermat_eval = njit(**njit_opts)(_fermat_eval_py)
else:
    _classify_grid_loop = _classify_grid_loop_py
    _reach_scalar = _reach_scalar_py
    _star_reach = _star_reach_py
    _chart_exp = _chart_exp_py
    harmonic_sweep = _harmonic_sweep_py
    length_sweep = _length_sweep_py
    objective_eval = _objective_eval_py
    deviation_eval = _deviation_eval_py
    fermat_eval = _fermat_eval_py


# ---------------------------------------------------------------------------
# public dispatch

pack_segments = pack_segments_np
compose = compose_np
apply_points = apply_np

if BACKEND == "numba":
    classify_segments = classify_numba
    classify_grid = classify_grid_numba
else:
    classify_segments = classify_np
    classify_grid = classify_grid_np


def classify_one_vs_many(seg_row: np.ndarray, T: np.ndarray):
    return classify_segments(seg_row.reshape(1, 10), T)
