"""Builtin synthetic test matrices, selected by a short text spec.

    decay:base=0.8,n=50     lam_i = base**i
    steps:n=50              {10n, 9n, ..., n, n/2, 1, ..., 1}
    censuslike              n=69, p=10, delta_p = 1433.99, lam_p = 1500
    colonlike:n=200         p=9, lam_p = 46.29, lam_{p+1} = 40.20
    list:3,2,1              the given eigenvalues

Every matrix is Q diag(lam) Q^T with a Haar-random orthogonal Q drawn from a
fixed internal seed, so the same spec always yields the same matrix.
"""

import numpy as np
from scipy.stats import ortho_group

from .errors import ArgumentError
from .matcore import sym_matrix
from .noise import rng_for

BASIS_SEED = 0x5EED_BA515


def _kv(body):
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise ArgumentError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def decay_spectrum(base: float = 0.8, n: int = 50) -> np.ndarray:
    if not 0 < base < 1:
        raise ArgumentError(f"decay base must lie in (0, 1), got {base}")
    return base ** np.arange(1, n + 1, dtype=float)


def steps_spectrum(n: int = 50) -> np.ndarray:
    if n < 12:
        raise ArgumentError("steps spectrum needs n >= 12")
    head = [float(j * n) for j in range(10, 0, -1)] + [n / 2.0]
    return np.array(head + [1.0] * (n - 11))


def censuslike_spectrum() -> np.ndarray:
    top = np.linspace(3000.0, 1500.0, 10)
    tail = 66.01 * 0.8 ** np.arange(59)
    return np.concatenate([top, tail])


def colonlike_spectrum(n: int = 200) -> np.ndarray:
    if n < 20:
        raise ArgumentError("colonlike spectrum needs n >= 20")
    top = np.geomspace(400.0, 46.29, 9)
    tail = 40.20 * 0.9 ** np.arange(n - 9)
    return np.concatenate([top, tail])


def parse_synthetic(spec: str) -> np.ndarray:
    """Eigenvalues for a synthetic spec string."""
    name, _, body = spec.strip().partition(":")
    try:
        if name == "decay":
            kv = _kv(body)
            return decay_spectrum(float(kv.get("base", 0.8)), int(kv.get("n", 50)))
        if name == "steps":
            return steps_spectrum(int(_kv(body).get("n", 50)))
        if name == "censuslike":
            return censuslike_spectrum()
        if name == "colonlike":
            return colonlike_spectrum(int(_kv(body).get("n", 200)))
        if name == "list":
            vals = [float(x) for x in body.split(",") if x.strip()]
            if not vals:
                raise ArgumentError("list spectrum is empty")
            return np.array(vals)
    except ValueError as exc:
        if isinstance(exc, ArgumentError):
            raise
        raise ArgumentError(f"bad synthetic spec {spec!r}: {exc}") from exc
    raise ArgumentError(f"unknown synthetic spectrum {name!r}")


def haar_basis(n: int, seed: int = BASIS_SEED) -> np.ndarray:
    if n == 1:
        return np.ones((1, 1))
    return ortho_group.rvs(n, random_state=rng_for(seed))


def matrix_with_spectrum(lam, seed: int = BASIS_SEED) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    q = haar_basis(lam.shape[0], seed)
    return sym_matrix((q * lam) @ q.T)


def synthetic_matrix(spec: str) -> np.ndarray:
    return matrix_with_spectrum(parse_synthetic(spec))
