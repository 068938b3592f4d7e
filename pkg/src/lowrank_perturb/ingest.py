"""CSV ingestion, preprocessing and covariance construction.

Preprocessing runs once, in this order: non-numeric tokens become 0, short
rows are zero-padded, each row is scaled to unit Euclidean norm and each
column is centered.  Centering generally breaks the unit row norms, so the
row norms are recorded just before centering (``row_norms``) and the final
matrix only guarantees zero column means.
"""

import csv
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DatasetError
from .matcore import Spectrum, sym_matrix

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def parse_token(token: str) -> float:
    """Strict decimal or scientific literal; anything else is 0."""
    t = token.strip()
    if not _NUMBER.fullmatch(t):
        return 0.0
    v = float(t)
    return v if math.isfinite(v) else 0.0


@dataclass(frozen=True)
class DataMatrix:
    entries: np.ndarray
    row_norms: np.ndarray

    @property
    def shape(self):
        return self.entries.shape


def preprocess(rows) -> DataMatrix:
    """Replace, pad, row-normalize, column-center."""
    rows = [list(r) for r in rows]
    if not rows:
        raise DatasetError("no data rows")
    width = max(len(r) for r in rows)
    if width == 0:
        raise DatasetError("rows have zero columns")
    m = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        m[i, : len(r)] = [parse_token(t) if isinstance(t, str) else float(t) for t in r]
    norms = np.linalg.norm(m, axis=1)
    nz = norms > 0
    m[nz] /= norms[nz, None]
    row_norms = np.linalg.norm(m, axis=1)
    m -= m.mean(axis=0)
    return DataMatrix(m, row_norms)


def load_csv(path, delimiter: str = ",", header: bool = False) -> DataMatrix:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path} is not UTF-8: {exc}") from exc
    if header:
        rows = rows[1:]
    rows = [r for r in rows if r]
    if not rows:
        raise DatasetError(f"{path} has no data rows")
    return preprocess(rows)


def covariance(D: DataMatrix, normalize_rows: bool = False) -> np.ndarray:
    """M^T M, divided by the row count when ``normalize_rows`` is set."""
    m = D.entries
    a = m.T @ m
    if normalize_rows:
        a /= m.shape[0]
    return sym_matrix(a)


@dataclass(frozen=True)
class RankSelection:
    p: int
    energy_fraction: float
    achieved_fraction: float


def select_rank(S: Spectrum, energy_fraction: float) -> RankSelection:
    """Smallest p with ||A_p||_F >= energy_fraction * ||A||_F."""
    if not 0 < energy_fraction <= 1:
        raise ArgumentError(f"energy fraction must lie in (0, 1], got {energy_fraction}")
    lam = S.eigenvalues
    sq = np.sort(lam * lam)[::-1]
    total = math.sqrt(float(np.sum(sq)))
    if total == 0.0:
        return RankSelection(1, energy_fraction, 1.0)
    frac = np.sqrt(np.cumsum(sq)) / total
    # guard against the last cumulative sum rounding just below the total
    frac[-1] = 1.0
    p = int(np.argmax(frac >= energy_fraction)) + 1
    return RankSelection(p, float(energy_fraction), float(frac[p - 1]))
