"""Closed-form perturbation bounds for ||(A+E)_p - A_p|| and their inputs.

Notation follows the usual 1-based convention: lam(i) descending
eigenvalues, sigma(i) singular values, delta_i = lam(i) - lam(i+1).  For an
indefinite A the rank-p selection splits into the top k positive
eigenvalues and the bottom p - k eigenvalues; "bottom" quantities below
refer to index n - (p - k).
"""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import ArgumentError, NotPSDError, ZeroGapError
from .matcore import EntireFn, Spectrum, rank_p_approx, spectral_norm, split_index_k

THM1_CONST = 7.0
THM3_CONST = 4.0
THM3_GRID = 4096


@dataclass(frozen=True)
class GapProfile:
    """Structural quantities of (A, E, p) that the bounds depend on.

    ``r``/``x`` are the halving distance and interaction term used by the
    interaction-aware bounds: ``r = max(r1, r2)`` and ``x = x1`` (top
    cluster).  Bottom-cluster fields are ``None`` when p == k and top-cluster
    fields are ``None`` when k == 0.
    """

    n: int
    p: int
    k: int
    e_norm: float
    delta_p: float
    delta_k: Optional[float]
    delta_bottom: Optional[float]
    sigma_gap: float
    sigma_1: float
    lambda_p: float
    lambda_k: Optional[float]
    lambda_bottom: Optional[float]
    sigma_p1: float
    r: int
    r1: Optional[int]
    r2: Optional[int]
    x: float
    x1: Optional[float]
    x2: Optional[float]
    x_bar: float
    psd: bool

    @property
    def k_zero(self) -> bool:
        return self.k == 0

    @property
    def gap_ok_psd(self) -> bool:
        return self.psd and 4 * self.e_norm <= self.delta_p

    @property
    def gap_ok_sym(self) -> bool:
        gaps = [g for g in (self.delta_k, self.delta_bottom) if g is not None]
        return bool(gaps) and 4 * self.e_norm <= min(gaps)

    @property
    def sv_gap_ok(self) -> bool:
        return 2 * self.e_norm < self.sigma_gap

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(gap_ok_psd=self.gap_ok_psd, gap_ok_sym=self.gap_ok_sym,
                 sv_gap_ok=self.sv_gap_ok, k_zero=self.k_zero)
        return d


def halving_distance_top(lam: np.ndarray, k: int) -> int:
    """Smallest r >= 1 with lam(r+1) <= lam(k)/2; lam(n+1) counts as -inf."""
    n = lam.shape[0]
    half = lam[k - 1] / 2.0
    for r in range(1, n):
        if lam[r] <= half:
            return r
    return n


def halving_distance_bottom(lam: np.ndarray, p: int, k: int) -> int:
    """Smallest r2 >= 1 with |lam(b)|/2 <= lam(n - r2 + 1) - lam(b), b = n-(p-k)+1."""
    n = lam.shape[0]
    b = lam[n - (p - k)]
    for r2 in range(1, n + 1):
        if abs(b) / 2.0 <= lam[n - r2] - b:
            return r2
    return n


def _interaction(U, E, cols):
    sub = U[:, cols]
    return float(np.max(np.abs(sub.T @ E @ sub)))


def gap_profile(S: Spectrum, E, p: int, e_norm: Optional[float] = None) -> GapProfile:
    """Compute every gap, halving distance and interaction term for (A, E, p)."""
    n = S.n
    if not 1 <= p <= n - 1:
        if p == n:
            raise ArgumentError("p == n: there is no (p+1)-st eigenvalue")
        raise ArgumentError(f"p={p} outside 1..{n - 1}")
    E = np.asarray(E, dtype=float)
    if E.shape != (n, n):
        raise ArgumentError(f"noise shape {E.shape} does not match n={n}")
    if e_norm is None:
        e_norm = spectral_norm(E)
    lam = S.eigenvalues
    U = S.eigenvectors
    k = split_index_k(S, p)
    sv = S.singular_values

    delta_k = lambda_k = None
    r1 = x1 = None
    if k >= 1:
        delta_k = S.gap(k)
        lambda_k = S.lam(k)
        r1 = halving_distance_top(lam, k)
        x1 = _interaction(U, E, np.arange(r1))
    delta_bottom = lambda_bottom = None
    r2 = x2 = None
    if p > k:
        nb = n - (p - k)
        delta_bottom = S.gap(nb)
        lambda_bottom = S.lam(nb + 1)
        r2 = halving_distance_bottom(lam, p, k)
        x2 = _interaction(U, E, n - 1 - np.arange(r2))

    return GapProfile(
        n=n,
        p=p,
        k=k,
        e_norm=float(e_norm),
        delta_p=S.gap(p),
        delta_k=delta_k,
        delta_bottom=delta_bottom,
        sigma_gap=float(sv[p - 1] - sv[p]),
        sigma_1=float(sv[0]),
        lambda_p=S.lam(p),
        lambda_k=lambda_k,
        lambda_bottom=lambda_bottom,
        sigma_p1=float(sv[p]),
        r=max(v for v in (r1, r2) if v is not None),
        r1=r1,
        r2=r2,
        x=float(x1 if x1 is not None else 0.0),
        x1=x1,
        x2=x2,
        x_bar=float(max(v for v in (x1, x2) if v is not None)),
        psd=S.is_psd(),
    )


def _require_gap(value, name):
    if value == 0:
        raise ZeroGapError(name)


def _require_psd(S):
    if not S.is_psd():
        raise NotPSDError(f"bound needs a PSD matrix; smallest eigenvalue is {S.eigenvalues[-1]:.3e}")


def eym_bound(S: Spectrum, e_norm: float, p: int) -> float:
    """Eckart-Young-Mirsky baseline 2 (sigma_{p+1} + ||E||)."""
    if not 1 <= p <= S.n - 1:
        raise ArgumentError(f"p={p} outside 1..{S.n - 1}")
    return 2.0 * (S.sv(p + 1) + e_norm)


def thm1_bound(S: Spectrum, e_norm: float, p: int) -> float:
    """7 ||E|| lam_p / delta_p for PSD A."""
    _require_psd(S)
    if not 1 <= p <= S.n - 1:
        raise ArgumentError(f"p={p} outside 1..{S.n - 1}")
    dp = S.gap(p)
    _require_gap(dp, "delta_p")
    return THM1_CONST * e_norm * S.lam(p) / dp


def thm2_bound(profile: GapProfile, S: Spectrum, e_norm: float) -> float:
    """Interaction-aware PSD bound with explicit constants.

    12 (||E|| L + r^2 x lam_p/delta_p + r^2 x L),  L = log(10 sigma_1 / delta_p)
    """
    _require_psd(S)
    dp = profile.delta_p
    _require_gap(dp, "delta_p")
    if not profile.sigma_1 > 0:
        raise ArgumentError("sigma_1 must be positive")
    log_term = math.log(10.0 * profile.sigma_1 / dp)
    rx = profile.r ** 2 * profile.x
    return 12.0 * (e_norm * log_term + rx * profile.lambda_p / dp + rx * log_term)


def _clusters(profile):
    """(log(6 sigma_1/gap), |lambda|/gap) for each non-empty cluster."""
    out = []
    s1 = profile.sigma_1
    if profile.k >= 1:
        _require_gap(profile.delta_k, "delta_k")
        out.append((math.log(6.0 * s1 / profile.delta_k), profile.lambda_k / profile.delta_k))
    if profile.p > profile.k:
        _require_gap(profile.delta_bottom, "delta_{n-(p-k)}")
        out.append((math.log(6.0 * s1 / profile.delta_bottom),
                    abs(profile.lambda_bottom) / profile.delta_bottom))
    return out


def main2_bound(profile: GapProfile, S: Spectrum, e_norm: float) -> float:
    """Symmetric extension of the basic bound; empty clusters contribute nothing.

    6 ||E|| (log(6 s1/d_k) + lam_k/d_k + log(6 s1/d_b) + |lam_b|/d_b)
    """
    return 6.0 * e_norm * sum(lg + ratio for lg, ratio in _clusters(profile))


def main2_1_bound(profile: GapProfile, S: Spectrum, e_norm: float) -> float:
    """Symmetric extension of the interaction-aware bound.

    12 (||E|| + r^2 xbar) sum log(6 s1/d) + 30 r^2 xbar sum |lam|/d
    """
    parts = _clusters(profile)
    rx = profile.r ** 2 * profile.x_bar
    logs = sum(lg for lg, _ in parts)
    ratios = sum(ratio for _, ratio in parts)
    return 12.0 * (e_norm + rx) * logs + 30.0 * rx * ratios


def rectangle_boundary_max(f: EntireFn, x0: float, x1: float, T: float,
                           grid: int = THM3_GRID) -> float:
    """max |f(z)| over the boundary of [x0, x1] x [-T, T].

    Dense uniform grid in arclength (vertices included), then a bounded
    scalar search in the two grid cells around the best grid point.
    """
    from scipy.optimize import minimize_scalar

    w = abs(x1 - x0)
    lo, hi = min(x0, x1), max(x0, x1)
    perim = 2.0 * w + 4.0 * T

    def point(s):
        s = np.mod(s, perim)
        z = np.empty(np.shape(s), dtype=complex)
        a = s < 2 * T
        z[a] = lo + 1j * (-T + s[a])
        b = (s >= 2 * T) & (s < 2 * T + w)
        z[b] = lo + (s[b] - 2 * T) + 1j * T
        c = (s >= 2 * T + w) & (s < 4 * T + w)
        z[c] = hi + 1j * (T - (s[c] - 2 * T - w))
        d = s >= 4 * T + w
        z[d] = hi - (s[d] - 4 * T - w) - 1j * T
        return z

    s = np.concatenate([np.linspace(0.0, perim, grid, endpoint=False),
                        [2 * T, 2 * T + w, 4 * T + w]])
    vals = np.abs(np.asarray(f(point(s))))
    j = int(np.argmax(vals))
    best = float(vals[j])
    h = perim / grid
    res = minimize_scalar(lambda t: -float(np.abs(f(point(np.array([t])))[0])),
                          bounds=(s[j] - h, s[j] + h), method="bounded",
                          options={"xatol": 1e-12 * max(perim, 1.0)})
    return max(best, -float(res.fun))


def thm3_bound(S: Spectrum, e_norm: float, p: int, f: EntireFn) -> float:
    """4 max_{Gamma_1} |f| ||E|| / delta_p over the PSD contour rectangle."""
    if not 1 <= p <= S.n - 1:
        raise ArgumentError(f"p={p} outside 1..{S.n - 1}")
    dp = S.gap(p)
    _require_gap(dp, "delta_p")
    lam1 = S.lam(1)
    x0 = S.lam(p) - dp / 2.0
    fmax = rectangle_boundary_max(f, x0, 2.0 * lam1, 2.0 * abs(lam1))
    return THM3_CONST * fmax * e_norm / dp


def weyl_check(S: Spectrum, St: Spectrum, e_norm: float, slack: float = 1e-10) -> bool:
    """Eigenvalues and singular values of A and A+E differ by at most ||E||."""
    if S.n != St.n:
        raise ArgumentError(f"dimension mismatch: {S.n} vs {St.n}")
    tol = e_norm + slack * max(1.0, S.source_norm, St.source_norm)
    lam_ok = np.all(np.abs(St.eigenvalues - S.eigenvalues) <= tol)
    sv_ok = np.all(np.abs(St.singular_values - S.singular_values) <= tol)
    return bool(lam_ok and sv_ok)


@dataclass
class BoundReport:
    """All bound values for one (A, E, p), plus the profile they came from.

    PSD-only bounds (thm1, thm2) are ``None`` for indefinite A; thm3 is only
    filled when a function is supplied.
    """

    profile: GapProfile
    eym: float
    main2: float
    main2_1: float
    thm1: Optional[float] = None
    thm2: Optional[float] = None
    thm3: Optional[float] = None
    actual_error: Optional[float] = None

    @property
    def gap_ok_psd(self):
        return self.profile.gap_ok_psd

    @property
    def gap_ok_sym(self):
        return self.profile.gap_ok_sym

    @property
    def sv_gap_ok(self):
        return self.profile.sv_gap_ok

    def to_dict(self) -> dict:
        return {
            "actual_error": self.actual_error,
            "eym": self.eym,
            "thm1": self.thm1,
            "thm2": self.thm2,
            "thm3": self.thm3,
            "main2": self.main2,
            "main2_1": self.main2_1,
            "gap_ok_psd": self.gap_ok_psd,
            "gap_ok_sym": self.gap_ok_sym,
            "sv_gap_ok": self.sv_gap_ok,
            "profile": self.profile.to_dict(),
        }


def bound_report(S: Spectrum, E, p: int, St: Optional[Spectrum] = None,
                 f: Optional[EntireFn] = None) -> BoundReport:
    """Evaluate every applicable bound; ``St`` (spectrum of A+E) adds actual_error."""
    E = np.asarray(E, dtype=float)
    e_norm = spectral_norm(E)
    prof = gap_profile(S, E, p, e_norm)
    rep = BoundReport(
        profile=prof,
        eym=eym_bound(S, e_norm, p),
        main2=main2_bound(prof, S, e_norm),
        main2_1=main2_1_bound(prof, S, e_norm),
    )
    if prof.psd:
        rep.thm1 = thm1_bound(S, e_norm, p)
        rep.thm2 = thm2_bound(prof, S, e_norm)
        if f is not None:
            rep.thm3 = thm3_bound(S, e_norm, p, f)
    if St is not None:
        rep.actual_error = spectral_norm(rank_p_approx(St, p) - rank_p_approx(S, p))
    return rep
