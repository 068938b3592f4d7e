"""Dense symmetric linear algebra: eigendecomposition, norms, rank-p truncation.

Matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)``.  Eigenvalues
are kept in descending order and, following the usual notation of the
perturbation literature, the accessors on :class:`Spectrum` are 1-based
(``S.lam(1)`` is the largest eigenvalue, ``S.gap(p)`` is
``lam(p) - lam(p + 1)``).  Everything else (arrays, index lists) is 0-based.
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, EigenConvergenceError, MultipletSplitError

# relative tolerance for treating two eigenvalues as one multiplet
MULTIPLET_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def sym_matrix(entries) -> np.ndarray:
    """Build a symmetric float matrix by mirroring the upper triangle."""
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ArgumentError(f"expected a non-empty square matrix, got shape {a.shape}")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def _check_square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ArgumentError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs of a real symmetric matrix, eigenvalues descending.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_norm: float = field(default=0.0)

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def lam(self, i: int) -> float:
        """i-th largest eigenvalue (1-based)."""
        if not 1 <= i <= self.n:
            raise ArgumentError(f"eigenvalue index {i} outside 1..{self.n}")
        return float(self.eigenvalues[i - 1])

    def gap(self, i: int) -> float:
        """Eigengap lam(i) - lam(i + 1) for 1 <= i <= n - 1."""
        if not 1 <= i <= self.n - 1:
            raise ArgumentError(f"eigengap index {i} outside 1..{self.n - 1}")
        return float(self.eigenvalues[i - 1] - self.eigenvalues[i])

    @property
    def singular_values(self) -> np.ndarray:
        return np.sort(np.abs(self.eigenvalues))[::-1]

    def sv(self, i: int) -> float:
        """i-th largest singular value (1-based); sv(n + 1) is 0."""
        if i == self.n + 1:
            return 0.0
        if not 1 <= i <= self.n:
            raise ArgumentError(f"singular value index {i} outside 1..{self.n + 1}")
        return float(self.singular_values[i - 1])

    def is_psd(self, rel_tol: float = 1e-10) -> bool:
        return bool(self.eigenvalues[-1] >= -rel_tol * max(self.source_norm, 1e-300))

    def matrix(self) -> np.ndarray:
        u = self.eigenvectors
        return sym_matrix((u * self.eigenvalues) @ u.T)


def _fix_signs(vecs):
    # largest-magnitude component of each column made positive (first on ties)
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _off_norm(a):
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigensolver for a dense symmetric matrix.

    Sweeps over all (p, q) pairs in row order and annihilates each
    off-diagonal entry with one Givens rotation.  Stops once the off-diagonal
    Frobenius mass falls below ``tol * ||A||_F``.

    Returns:
        (eigenvalues, eigenvectors) in the order the sweeps leave them.

    Raises:
        EigenConvergenceError: if ``max_sweeps`` sweeps were not enough.
    """
    a = np.array(_check_square(a), dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    fro = np.linalg.norm(a)
    target = tol * fro
    off = 0.0
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= target:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 if theta == 0.0 else np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    off = _off_norm(a)
    if off <= target:
        return np.diag(a).copy(), v
    raise EigenConvergenceError(
        f"Jacobi did not converge after {max_sweeps} sweeps (n={n}, off-diagonal norm {off:.3e})",
        n,
        off,
    )


def eig_sym(a, method: str = "lapack") -> Spectrum:
    """Eigendecomposition of a symmetric matrix with reproducible signs.

    ``method`` is ``"lapack"`` (``numpy.linalg.eigh``) or ``"jacobi"``
    (:func:`jacobi_eigh`).  The result is verified against the source matrix
    before it is returned.
    """
    a = _check_square(a)
    n = a.shape[0]
    if method == "lapack":
        try:
            w, v = np.linalg.eigh(a)
        except np.linalg.LinAlgError as exc:
            raise EigenConvergenceError(f"eigh failed for n={n}: {exc}", n, float("nan")) from exc
    elif method == "jacobi":
        w, v = jacobi_eigh(a)
    else:
        raise ArgumentError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    w = np.array(w[order], dtype=float)
    v = _fix_signs(np.array(v[:, order], dtype=float))
    norm = float(np.max(np.abs(w)))
    resid = float(np.max(np.linalg.norm(a @ v - v * w, axis=0)))
    if not resid <= 1e-8 * max(1.0, norm):
        raise EigenConvergenceError(
            f"eigen-residual {resid:.3e} too large for n={n}", n, resid
        )
    return Spectrum(w, v, norm)


def spectral_norm(m) -> float:
    m = _check_square(m)
    if not np.any(m):
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m, dtype=float)))


def select_top_abs(S: Spectrum, p: int) -> np.ndarray:
    """0-based indices of the p eigenpairs of largest |lambda|, ascending.

    Ties in |lambda| go to the positive eigenvalue, then to the smaller index.
    """
    _check_rank(S, p)
    lam = S.eigenvalues
    order = np.lexsort((np.arange(S.n), lam < 0, -np.abs(lam)))
    chosen = np.sort(order[:p])
    _check_multiplets(lam, chosen)
    return chosen


def _check_rank(S, p):
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= S.n:
        raise ArgumentError(f"rank p={p} outside 1..{S.n}")


def _check_multiplets(lam, chosen):
    mask = np.zeros(lam.shape[0], dtype=bool)
    mask[chosen] = True
    if mask.all():
        return
    inside = lam[mask]
    outside = lam[~mask]
    scale = max(1.0, float(np.max(np.abs(lam))))
    diff = np.min(np.abs(inside[:, None] - outside[None, :]))
    if diff <= MULTIPLET_TOL * scale:
        raise MultipletSplitError(
            "selection splits eigenvalue multiplet "
            f"(selected and unselected eigenvalues differ by {diff:.3e})"
        )


def _assemble(S, idx, values):
    u = S.eigenvectors[:, idx]
    return sym_matrix((u * values) @ u.T)


def rank_p_approx(S: Spectrum, p: int) -> np.ndarray:
    """Best rank-p approximation: the p eigenpairs of largest |lambda|."""
    idx = select_top_abs(S, p)
    return _assemble(S, idx, S.eigenvalues[idx])


def split_index_k(S: Spectrum, p: int) -> int:
    """Number of positive eigenvalues among the rank-p selection.

    The selection is then lam(1..k) together with the bottom p - k
    eigenvalues lam(n - (p - k) + 1 .. n).  ``k == 0`` is allowed.
    """
    idx = select_top_abs(S, p)
    return int(np.sum(S.eigenvalues[idx] > 0))


@dataclass(frozen=True)
class EntireFn:
    """An entire function from a fixed registry of families.

    Use the constructors :meth:`power`, :meth:`exp`, :meth:`cos`, :meth:`sin`
    and :meth:`polynomial`; :func:`parse_fn` understands their names.
    """

    name: str
    evaluator: Callable = field(compare=False, repr=False)

    def __call__(self, z):
        return self.evaluator(z)

    @classmethod
    def power(cls, k: int) -> "EntireFn":
        if int(k) != k or k < 0:
            raise ArgumentError(f"power must be a non-negative integer, got {k}")
        k = int(k)
        if k == 0:
            return cls("1", lambda z: np.ones_like(np.asarray(z, dtype=complex)))
        return cls("z" if k == 1 else f"z^{k}", lambda z: np.asarray(z) ** k)

    @classmethod
    def exp(cls) -> "EntireFn":
        return cls("exp", np.exp)

    @classmethod
    def cos(cls) -> "EntireFn":
        return cls("cos", np.cos)

    @classmethod
    def sin(cls) -> "EntireFn":
        return cls("sin", np.sin)

    @classmethod
    def polynomial(cls, coefficients: Sequence[float]) -> "EntireFn":
        """Polynomial with ``coefficients[j]`` multiplying ``z**j``."""
        c = [float(x) for x in coefficients]
        if not c:
            raise ArgumentError("polynomial needs at least one coefficient")
        return cls(
            "poly(" + ",".join(repr(x) for x in c) + ")",
            lambda z: np.polynomial.polynomial.polyval(z, c),
        )


def parse_fn(text: str) -> EntireFn:
    """Parse ``1``, ``z``, ``z^k``, ``exp``, ``cos``, ``sin`` or ``poly:c0,c1,...``."""
    t = text.strip().replace("**", "^")
    try:
        return _parse_fn(t)
    except ValueError as exc:
        if isinstance(exc, ArgumentError):
            raise
        raise ArgumentError(f"unknown entire function {text!r}") from exc


def _parse_fn(t):
    if t == "1":
        return EntireFn.power(0)
    if t == "z":
        return EntireFn.power(1)
    if t.startswith("z^"):
        return EntireFn.power(int(t[2:]))
    if t in ("exp", "cos", "sin"):
        return getattr(EntireFn, t)()
    if t.startswith("poly:"):
        return EntireFn.polynomial([float(x) for x in t[5:].split(",")])
    raise ArgumentError(f"unknown entire function {t!r}")


def f_p_approx(S: Spectrum, f: EntireFn, p: int) -> np.ndarray:
    """sum_{i<=p} f(lam_i) u_i u_i^T over the p largest eigenvalues."""
    _check_rank(S, p)
    idx = np.arange(p)
    _check_multiplets(S.eigenvalues, idx)
    vals = np.asarray(f(S.eigenvalues[:p].astype(complex)))
    return _assemble(S, idx, np.real(vals))
