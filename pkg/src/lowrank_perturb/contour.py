"""Numerical contour integrals over rectangles around a block of eigenvalues.

A :class:`RectContour` is a rectangle with one vertical wall ``x0`` in the
eigengap that separates the chosen eigenvalues, a far wall ``x1`` and half
height ``T``.  Its four segments are kept in the order and direction

    G1: x0 - iT -> x0 + iT      G2: x0 + iT -> x1 + iT
    G3: x1 + iT -> x1 - iT      G4: x1 - iT -> x0 - iT

which is clockwise when ``x1 > x0``; :meth:`RectContour.orientation` records
that, and :func:`contour_project` corrects for it.  Arclength integrals do
not depend on orientation.

Each segment is integrated with the composite trapezoid rule, doubling the
number of panels and Richardson-extrapolating (Romberg) until two successive
estimates agree to ``rel_tol``.  Vertical walls pass close to poles, so they
are parametrized as ``t = d sinh(u)`` with ``d`` the distance from the wall
to the nearest pole; this keeps the integrand smooth on the u-grid.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ArgumentError, ContourError, QuadratureError
from .matcore import EntireFn, Spectrum, split_index_k, sym_matrix

POLE_GUARD = 1e-12
# resolvent differences below this fraction of ||R_A|| are rounding noise
ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True)
class QuadSpec:
    points_per_segment: int = 64
    rel_tol: float = 1e-6
    max_doublings: int = 6
    richardson: bool = True

    def __post_init__(self):
        m = self.points_per_segment
        if m < 16 or m % 16 or (m // 16) & (m // 16 - 1):
            raise ArgumentError("points_per_segment must be 16 times a power of two")
        if not self.rel_tol > 0:
            raise ArgumentError("rel_tol must be positive")


@dataclass(frozen=True)
class RectContour:
    x0: float
    x1: float
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ArgumentError(f"contour half-height must be positive, got {self.T}")
        if self.x0 == self.x1:
            raise ArgumentError("contour walls coincide")

    @property
    def vertices(self):
        x0, x1, T = self.x0, self.x1, self.T
        return [complex(x0, -T), complex(x0, T), complex(x1, T), complex(x1, -T)]

    @property
    def segments(self):
        v = self.vertices
        return [(v[0], v[1]), (v[1], v[2]), (v[2], v[3]), (v[3], v[0])]

    @property
    def orientation(self) -> int:
        """+1 for counterclockwise, -1 for clockwise."""
        return -1 if self.x1 > self.x0 else 1

    def encloses(self, lam: float) -> bool:
        lo, hi = sorted((self.x0, self.x1))
        return lo < lam < hi

    def wall_distance(self, lam: float) -> float:
        return min(abs(lam - self.x0), abs(lam - self.x1))


def _check_clear(contour, eigenvalues, scale):
    tol = POLE_GUARD * max(scale, 1e-300)
    for lam in np.atleast_1d(eigenvalues):
        if contour.wall_distance(float(lam)) <= tol:
            raise ContourError(f"eigenvalue {lam:.6g} on contour wall")


def build_contour_psd(S: Spectrum, p: int) -> RectContour:
    """Rectangle x0 = lam_p - delta_p/2, x1 = T = 2 lam_1 around lam_1..lam_p."""
    if not 1 <= p <= S.n - 1:
        raise ArgumentError(f"p={p} outside 1..{S.n - 1}")
    lam1 = S.lam(1)
    if not lam1 > 0:
        raise ContourError("largest eigenvalue must be positive")
    dp = S.gap(p)
    if dp <= POLE_GUARD * S.source_norm:
        raise ContourError(f"eigenvalue on contour: delta_p = {dp:.3e}")
    c = RectContour(S.lam(p) - dp / 2.0, 2.0 * lam1, 2.0 * lam1)
    _check_clear(c, S.eigenvalues, S.source_norm)
    _check_enclosure(c, S, np.arange(p))
    return c


def _check_enclosure(c, S, inside_idx):
    mask = np.zeros(S.n, dtype=bool)
    mask[inside_idx] = True
    for i, lam in enumerate(S.eigenvalues):
        if c.encloses(float(lam)) != mask[i]:
            where = "outside" if mask[i] else "inside"
            raise ContourError(f"eigenvalue lam_{i + 1} = {lam:.6g} falls {where} the contour")


def build_contours_sym(S: Spectrum, p: int):
    """(Gamma1, Gamma2) around the positive top-k and the bottom p-k eigenvalues.

    Gamma1 has walls a0 = lam_k - delta_k/2 and a1 = 2 sigma_1; Gamma2 has
    b0 = lam_{n-(p-k)+1} + delta_{n-(p-k)}/2 and b1 = -2 sigma_1.  Both have
    half height 2 sigma_1.  An empty cluster gives ``None``.
    """
    n = S.n
    if not 1 <= p <= n - 1:
        raise ArgumentError(f"p={p} outside 1..{n - 1}")
    k = split_index_k(S, p)
    s1 = S.sv(1)
    T = 2.0 * s1
    guard = POLE_GUARD * S.source_norm
    top = bottom = None
    if k >= 1:
        dk = S.gap(k)
        if dk <= guard:
            raise ContourError(f"eigenvalue on contour: delta_k = {dk:.3e}")
        top = RectContour(S.lam(k) - dk / 2.0, T, T)
        _check_clear(top, S.eigenvalues, S.source_norm)
        _check_enclosure(top, S, np.arange(k))
    if p > k:
        nb = n - (p - k)
        db = S.gap(nb)
        if db <= guard:
            raise ContourError(f"eigenvalue on contour: delta_(n-(p-k)) = {db:.3e}")
        bottom = RectContour(S.lam(nb + 1) + db / 2.0, -T, T)
        _check_clear(bottom, S.eigenvalues, S.source_norm)
        _check_enclosure(bottom, S, np.arange(nb, n))
    return top, bottom


def resolvent(S: Spectrum, z: complex) -> np.ndarray:
    """(zI - A)^{-1} = sum_i u_i u_i^T / (z - lam_i)."""
    d = z - S.eigenvalues
    if np.min(np.abs(d)) <= POLE_GUARD * max(S.source_norm, 1e-300):
        raise ContourError(f"z = {z} is within the pole guard of an eigenvalue")
    u = S.eigenvectors
    return (u / d) @ u.T


# --- quadrature engine -------------------------------------------------------

class _Piece:
    """One straight segment with a parametrization u -> z(u) on [ua, ub]."""

    def __init__(self, start, end, poles):
        self.start, self.end = complex(start), complex(end)
        vec = self.end - self.start
        self.vertical = abs(vec.real) < abs(vec.imag)
        if self.vertical:
            half = abs(vec.imag) / 2.0
            self.mid = (self.start + self.end) / 2.0
            self.dir = 1j * math.copysign(1.0, vec.imag)
            d = np.min(np.abs(np.asarray(poles, dtype=complex) - self.mid)) if len(poles) else half
            self.d = max(float(d), 1e-12 * half)
            self.ub = math.asinh(half / self.d)
            self.ua = -self.ub
        else:
            self.ua, self.ub = 0.0, 1.0
            self.vec = vec

    def nodes(self, u):
        """Return z(u) and dz/du."""
        if self.vertical:
            z = self.mid + self.dir * self.d * np.sinh(u)
            dz = self.dir * self.d * np.cosh(u)
        else:
            z = self.start + self.vec * u
            dz = np.full(u.shape, self.vec, dtype=complex)
        return z, dz


def _romberg(pieces, integrand, q: QuadSpec, oriented: bool, what: str,
             check=None, abs_floor=0.0):
    """Integrate ``integrand(z)`` (shape (m, K)) along each piece.

    ``oriented`` selects dz over |dz|.  Returns an array (len(pieces), K).
    ``check`` maps that array to the vector whose convergence is tested;
    ``abs_floor`` is a float or a callable of that array.
    """
    if check is None:
        check = lambda a: a.sum(axis=0)
    m0 = q.points_per_segment
    sums = []
    table = []
    prev = None
    for level in range(q.max_doublings + 1):
        m = m0 * 2 ** level
        ests = []
        for j, pc in enumerate(pieces):
            h = (pc.ub - pc.ua) / m
            if level == 0:
                u = pc.ua + h * np.arange(m + 1)
                w = np.ones(m + 1)
                w[0] = w[-1] = 0.5
            else:
                u = pc.ua + h * (2 * np.arange(m // 2) + 1)
                w = np.ones(m // 2)
            z, dz = pc.nodes(u)
            vals = np.asarray(integrand(z))
            jac = dz if oriented else np.abs(dz)
            part = np.tensordot(w * jac, vals, axes=(0, 0))
            if level == 0:
                sums.append(part)
            else:
                sums[j] = sums[j] + part
            ests.append(sums[j] * h)
        row = [np.array(ests)]
        if q.richardson:
            for k in range(1, level + 1):
                f = 4.0 ** k
                row.append((f * row[k - 1] - table[-1][k - 1]) / (f - 1.0))
        table.append(row)
        cur = row[-1]
        if prev is not None:
            a, b = check(cur), check(prev)
            diff = np.max(np.abs(a - b))
            scale = np.max(np.abs(a))
            floor = abs_floor(cur) if callable(abs_floor) else abs_floor
            if diff <= q.rel_tol * scale + floor or diff == 0.0:
                return cur
        prev = cur
    raise QuadratureError(
        f"{what}: no convergence after {q.max_doublings} doublings "
        f"(last {check(cur)}, previous {check(prev)})",
        check(cur), check(prev),
    )


def _pieces(contour, poles):
    return [_Piece(a, b, poles) for a, b in contour.segments]


def _as_fns(f):
    single = isinstance(f, EntireFn)
    return ([f] if single else list(f)), single


def contour_project(S: Spectrum, f: EntireFn, contour: RectContour,
                    q: QuadSpec = QuadSpec()) -> np.ndarray:
    """(1 / 2 pi i) * (positively oriented) integral of f(z) (zI - A)^{-1} dz.

    The resolvent is diagonal in the eigenbasis of A, so the quadrature runs
    on the n scalar kernels f(z)/(z - lam_i) and the result is assembled as
    U diag(g) U^T.
    """
    lam = S.eigenvalues
    _check_clear(contour, lam, S.source_norm)
    pieces = _pieces(contour, lam)

    def integrand(z):
        fz = np.asarray(f(z), dtype=complex)
        return fz[:, None] / (z[:, None] - lam[None, :])

    seg = _romberg(pieces, integrand, q, oriented=True, what="contour_project")
    g = contour.orientation * seg.sum(axis=0) / (2j * math.pi)
    u = S.eigenvectors
    result = sym_matrix((u * g.real) @ u.T)
    imag = np.linalg.norm((u * g.imag) @ u.T, 2)
    if imag > q.rel_tol * max(np.linalg.norm(result, 2), 1.0):
        raise QuadratureError(f"contour projection has imaginary part {imag:.3e}", g, None)
    return result


def _spec_norms(x):
    # largest singular value of each matrix in a stack
    return np.linalg.svd(x, compute_uv=False)[..., 0]


def _f_weights(fns, z):
    return np.stack([np.abs(np.asarray(f(z), dtype=complex)) for f in fns], axis=1)


def F_integral(S_A: Spectrum, S_At: Spectrum, f: Union[EntireFn, Sequence[EntireFn]],
               contour: RectContour, q: QuadSpec = QuadSpec()):
    """(1/2pi) int_Gamma ||f(z) [(zI - At)^{-1} - (zI - A)^{-1}]|| |dz|.

    ``f`` may be a single function (returns a float) or a list (returns an
    array), in which case the matrix norms are shared across functions.
    """
    fns, single = _as_fns(f)
    if S_A.n != S_At.n:
        raise ArgumentError("dimension mismatch")
    scale = max(S_A.source_norm, S_At.source_norm)
    _check_clear(contour, S_A.eigenvalues, scale)
    _check_clear(contour, S_At.eigenvalues, scale)
    lam, lamt = S_A.eigenvalues, S_At.eigenvalues
    # work in the eigenbasis of A: W = U^T Ut
    W = S_A.eigenvectors.T @ S_At.eigenvectors
    pieces = _pieces(contour, np.concatenate([lam, lamt]))

    K = len(fns)

    def integrand(z):
        rt = (W[None, :, :] / (z[:, None, None] - lamt[None, None, :])) @ W.T
        idx = np.arange(lam.shape[0])
        rt[:, idx, idx] -= 1.0 / (z[:, None] - lam[None, :])
        fw = _f_weights(fns, z)
        # companion columns |f| ||R_A||: the scale of the rounding error in rt
        ra = 1.0 / np.min(np.abs(z[:, None] - lam[None, :]), axis=1)
        return np.concatenate([_spec_norms(rt)[:, None] * fw, ra[:, None] * fw], axis=1)

    seg = _romberg(pieces, integrand, q, oriented=False, what="F_integral",
                   check=lambda a: a.sum(axis=0)[:K],
                   abs_floor=lambda a: ROUNDING_FLOOR * float(np.max(a.sum(axis=0)[K:])))
    out = seg.sum(axis=0)[:K] / (2.0 * math.pi)
    return float(out[0]) if single else out


def _first_order_norms(S_A, E):
    lam = S_A.eigenvalues
    Eh = S_A.eigenvectors.T @ np.asarray(E, dtype=float) @ S_A.eigenvectors

    def norms(z):
        r = 1.0 / (z[:, None] - lam[None, :])
        x = r[:, :, None] * Eh[None, :, :] * r[:, None, :]
        return _spec_norms(x)

    return norms


def F1_integral(S_A: Spectrum, E, f: Union[EntireFn, Sequence[EntireFn]],
                contour: RectContour, q: QuadSpec = QuadSpec()):
    """(1/2pi) int_Gamma ||f(z) (zI - A)^{-1} E (zI - A)^{-1}|| |dz|."""
    fns, single = _as_fns(f)
    _check_clear(contour, S_A.eigenvalues, S_A.source_norm)
    norms = _first_order_norms(S_A, E)
    pieces = _pieces(contour, S_A.eigenvalues)
    seg = _romberg(pieces, lambda z: norms(z)[:, None] * _f_weights(fns, z), q,
                   oriented=False, what="F1_integral", abs_floor=1e-300)
    out = seg.sum(axis=0) / (2.0 * math.pi)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class SegmentIntegrals:
    """M_l = int_{G_l} ||z R E R|| |dz| and N_l = int_{G_l} |z| / min_i |z - lam_i|^2 |dz|."""

    M: tuple
    N: tuple


def segment_integrals(S: Spectrum, E, contour: RectContour,
                      q: QuadSpec = QuadSpec()) -> SegmentIntegrals:
    lam = S.eigenvalues
    _check_clear(contour, lam, S.source_norm)
    norms = _first_order_norms(S, E)
    pieces = _pieces(contour, lam)

    def integrand(z):
        az = np.abs(z)
        dmin = np.min(np.abs(z[:, None] - lam[None, :]), axis=1)
        return np.stack([az * norms(z), az / dmin ** 2], axis=1)

    seg = _romberg(pieces, integrand, q, oriented=False, what="segment_integrals",
                   check=lambda a: a.ravel(), abs_floor=1e-300)
    return SegmentIntegrals(M=tuple(float(v) for v in seg[:, 0]),
                            N=tuple(float(v) for v in seg[:, 1]))


def arctan_integral_check(a: float, T: float, q: QuadSpec = QuadSpec()):
    """Quadrature of int_{-T}^{T} dt / (t^2 + a^2) alongside the bound pi / a."""
    if not (a > 0 and T >= a):
        raise ArgumentError(f"need 0 < a <= T, got a={a}, T={T}")
    piece = _Piece(complex(0.0, -T), complex(0.0, T), [complex(0.0, 0.0) + a])
    seg = _romberg([piece], lambda z: (1.0 / (z.imag ** 2 + a * a))[:, None], q,
                   oriented=False, what="arctan_integral")
    return float(seg[0, 0]), math.pi / a


def contour_nodes(contour: RectContour, q: QuadSpec = QuadSpec(), poles=(), doublings: int = 0):
    """Quadrature nodes used on ``contour`` after ``doublings`` refinements."""
    pieces = _pieces(contour, np.asarray(poles, dtype=complex))
    m = q.points_per_segment * 2 ** doublings
    out = []
    for pc in pieces:
        u = np.linspace(pc.ua, pc.ub, m + 1)
        out.append(pc.nodes(u)[0])
    return np.concatenate(out)
