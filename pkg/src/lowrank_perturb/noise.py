"""Seeded symmetric noise matrices and Gaussian-mechanism calibration.

Randomness comes from numpy's Philox generator, a counter-based 64-bit bit
generator keyed directly by a 64-bit seed.  Independent streams for
(level, trial) pairs are obtained with :func:`fold_seed`, which XOR-folds
each index into the seed through a splitmix64 finalizer, so any trial can be
regenerated on its own regardless of execution order.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

MASK64 = (1 << 64) - 1
NOISE_KINDS = ("wigner_gaussian", "rademacher")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def fold_seed(seed: int, *indices: int) -> int:
    """Derive a child seed: ``s <- splitmix64(s ^ splitmix64(i))`` per index."""
    s = int(seed) & MASK64
    for i in indices:
        s = splitmix64(s ^ splitmix64(int(i) & MASK64))
    return s


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))


@dataclass(frozen=True)
class NoiseSpec:
    """Which noise to draw, how much of it, and from which stream.

    ``goe_diagonal`` switches the diagonal variance from 1 (Wigner
    convention, the default) to 2 (GOE convention); it only affects the
    Gaussian kind.
    """

    kind: str = "wigner_gaussian"
    seed: int = 0
    scale: float = 1.0
    goe_diagonal: bool = False

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ArgumentError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not self.scale >= 0:
            raise ArgumentError(f"noise scale must be >= 0, got {self.scale}")
        if not 0 <= int(self.seed) <= MASK64:
            raise ArgumentError("seed must be an unsigned 64-bit integer")

    def scaled(self, factor: float) -> "NoiseSpec":
        return NoiseSpec(self.kind, self.seed, self.scale * factor, self.goe_diagonal)

    def with_seed(self, seed: int) -> "NoiseSpec":
        return NoiseSpec(self.kind, seed, self.scale, self.goe_diagonal)


def _mirror(upper_values, n):
    m = np.zeros((n, n))
    iu = np.triu_indices(n)
    m[iu] = upper_values
    return m + np.triu(m, 1).T


def sample_wigner(n: int, spec: NoiseSpec) -> np.ndarray:
    """Symmetric matrix with i.i.d. N(0, 1) upper triangle, times ``spec.scale``."""
    if n < 1:
        raise ArgumentError(f"n must be >= 1, got {n}")
    vals = rng_for(spec.seed).standard_normal(n * (n + 1) // 2)
    m = _mirror(vals, n)
    if spec.goe_diagonal:
        m[np.diag_indices(n)] *= math.sqrt(2.0)
    return m * spec.scale


def sample_rademacher(n: int, spec: NoiseSpec) -> np.ndarray:
    """Symmetric matrix with i.i.d. uniform {-1, +1} upper triangle, times ``spec.scale``."""
    if n < 1:
        raise ArgumentError(f"n must be >= 1, got {n}")
    bits = rng_for(spec.seed).integers(0, 2, size=n * (n + 1) // 2)
    return _mirror(2.0 * bits - 1.0, n) * spec.scale


def sample_noise(n: int, spec: NoiseSpec) -> np.ndarray:
    if spec.kind == "rademacher":
        return sample_rademacher(n, spec)
    return sample_wigner(n, spec)


def gaussian_mechanism_sigma(epsilon: float, delta: float, sensitivity: float) -> float:
    """Classical (epsilon, delta) Gaussian mechanism noise scale.

    sigma = sensitivity * sqrt(2 ln(1.25 / delta)) / epsilon
    """
    if not epsilon > 0:
        raise ArgumentError(f"epsilon must be > 0, got {epsilon}")
    if not 0 < delta < 1:
        raise ArgumentError(f"delta must lie in (0, 1), got {delta}")
    if not sensitivity > 0:
        raise ArgumentError(f"sensitivity must be > 0, got {sensitivity}")
    return sensitivity * math.sqrt(2.0 * math.log(1.25 / delta)) / epsilon
