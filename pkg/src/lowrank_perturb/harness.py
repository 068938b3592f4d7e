"""Seeded Monte-Carlo experiments comparing perturbation bounds with errors.

Every trial draws its noise from ``fold_seed(seed, level_index, trial)``, so
a report is a pure function of its :class:`ExperimentConfig`.  Trials run in
order and statistics use the population standard deviation.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import BoundReport, bound_report, weyl_check
from .errors import ArgumentError
from .ingest import covariance, load_csv, select_rank
from .matcore import (
    Spectrum,
    eig_sym,
    frobenius_norm,
    rank_p_approx,
    spectral_norm,
    split_index_k,
)
from .noise import NoiseSpec, fold_seed, gaussian_mechanism_sigma, sample_noise
from .report import SCHEMA_VERSION
from .synthetic import synthetic_matrix

METRICS = ("spectral", "frobenius", "change_in_error")
BOUNDS = ("eym", "thm1", "thm2", "main2", "main2_1")
DEFAULT_RATIOS = tuple(round(0.05 * j, 2) for j in range(1, 11))
VIOLATION_RTOL = 1e-8
PILOT_DRAWS = 16
PILOT_DOMAIN = 0x70696C6F74


def default_levels(count: int = 20, include_zero: bool = False):
    if count < 1:
        raise ArgumentError(f"need at least one level, got {count}")
    levels = [j / count for j in range(1, count + 1)]
    return tuple([0.0] + levels if include_zero else levels)


@dataclass(frozen=True)
class ExperimentConfig:
    input: Optional[str] = None
    synthetic: Optional[str] = None
    p: Optional[int] = None
    energy: Optional[float] = None
    noise_kind: str = "wigner_gaussian"
    levels: Sequence[float] = field(default_factory=default_levels)
    trials: int = 100
    seed: int = 0
    metrics: Sequence[str] = METRICS
    bounds: Sequence[str] = BOUNDS
    header: bool = False
    delimiter: str = ","
    normalize_rows: bool = False
    goe_diagonal: bool = False

    def __post_init__(self):
        if (self.input is None) == (self.synthetic is None):
            raise ArgumentError("give exactly one of input or synthetic")
        if self.p is not None and self.energy is not None:
            raise ArgumentError("give at most one of p or energy")
        if self.trials < 1:
            raise ArgumentError(f"trials must be >= 1, got {self.trials}")
        lv = list(self.levels)
        if not lv or any(b <= a for a, b in zip(lv, lv[1:])):
            raise ArgumentError("levels must be non-empty and strictly increasing")
        if lv[0] < 0:
            raise ArgumentError("levels must be non-negative")
        bad = set(self.metrics) - set(METRICS) or set(self.bounds) - set(BOUNDS)
        if bad:
            raise ArgumentError(f"unknown metrics/bounds {sorted(bad)}")
        NoiseSpec(self.noise_kind, self.seed)

    def to_dict(self):
        d = asdict(self)
        d["levels"] = list(self.levels)
        d["metrics"] = list(self.metrics)
        d["bounds"] = list(self.bounds)
        return d


@dataclass(frozen=True)
class Problem:
    A: np.ndarray
    S: Spectrum
    p: int
    achieved_fraction: Optional[float]


def load_problem(cfg: ExperimentConfig) -> Problem:
    if cfg.input is not None:
        A = covariance(load_csv(cfg.input, cfg.delimiter, cfg.header), cfg.normalize_rows)
    else:
        A = synthetic_matrix(cfg.synthetic)
    S = eig_sym(A)
    frac = None
    if cfg.p is not None:
        p = int(cfg.p)
    else:
        sel = select_rank(S, cfg.energy if cfg.energy is not None else 0.99)
        p, frac = sel.p, sel.achieved_fraction
    if not 1 <= p <= S.n - 1:
        raise ArgumentError(f"p={p} not resolvable for n={S.n}: need 1 <= p <= n-1")
    return Problem(A, S, p, frac)


def _stats(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return {"mean": None, "std": None, "count": 0}
    a = np.array(vals, dtype=float)
    return {"mean": float(np.mean(a)), "std": float(np.std(a)), "count": len(vals)}


def _exceeds(actual, bound):
    return actual > bound + VIOLATION_RTOL * max(1.0, abs(bound))


def trial_violations(rep: BoundReport, weyl_ok: bool):
    """Names of theorem-backed inequalities that one trial breaks."""
    out = []
    a = rep.actual_error
    if not weyl_ok:
        out.append("weyl")
    if _exceeds(a, rep.eym):
        out.append("eym")
    if rep.gap_ok_psd:
        for name in ("thm1", "thm2"):
            if _exceeds(a, getattr(rep, name)):
                out.append(name)
    if rep.gap_ok_sym:
        for name in ("main2", "main2_1"):
            if _exceeds(a, getattr(rep, name)):
                out.append(name)
    return out


def _gap_ok(rep: BoundReport):
    return rep.gap_ok_psd if rep.profile.psd else rep.gap_ok_sym


def _metadata(cfg, prob):
    S, p = prob.S, prob.p
    return {
        "n": S.n,
        "p": p,
        "k": split_index_k(S, p),
        "delta_p": S.gap(p),
        "lambda_p": S.lam(p),
        "sigma_p1": S.sv(p + 1),
        "psd": S.is_psd(),
        "seed": cfg.seed,
        "energy_achieved": prob.achieved_fraction,
        "zero_level_included": bool(cfg.levels[0] == 0.0),
    }


def _trial_noise(cfg, n, level_idx, level, t):
    spec = NoiseSpec(cfg.noise_kind, fold_seed(cfg.seed, level_idx, t), level, cfg.goe_diagonal)
    return sample_noise(n, spec)


def _study(cfg: ExperimentConfig, kind: str, want_metrics: bool):
    prob = load_problem(cfg)
    S, p, A = prob.S, prob.p, prob.A
    Ap = rank_p_approx(S, p)
    base_resid = S.sv(p + 1)
    levels_out = []
    violations = []
    for li, level in enumerate(cfg.levels):
        rows = {}
        gap_hits = 0
        for t in range(cfg.trials):
            E = _trial_noise(cfg, S.n, li, level, t)
            St = eig_sym(A + E)
            rep = bound_report(S, E, p, St)
            gap_hits += _gap_ok(rep)
            bad = trial_violations(rep, weyl_check(S, St, rep.profile.e_norm))
            violations += [{"level_index": li, "trial": t, "inequality": b} for b in bad]
            rows.setdefault("e_norm", []).append(rep.profile.e_norm)
            if want_metrics:
                Atp = rank_p_approx(St, p)
                vals = {
                    "spectral": rep.actual_error,
                    "frobenius": frobenius_norm(Atp - Ap),
                    "change_in_error": abs(base_resid - St.sv(p + 1)),
                }
                for m in cfg.metrics:
                    rows.setdefault(m, []).append(vals[m])
            else:
                rows.setdefault("actual", []).append(rep.actual_error)
                for b in cfg.bounds:
                    rows.setdefault(b, []).append(getattr(rep, b))
        stats = {name: _stats(v) for name, v in rows.items()}
        gap_rate = gap_hits / cfg.trials
        levels_out.append({"level": float(level), "gap_rate": gap_rate, "stats": stats})
        if gap_rate == 1.0 and "actual" in stats:
            for b in ("thm1", "thm2", "main2", "main2_1", "eym"):
                st = stats.get(b)
                if st and st["mean"] is not None and _exceeds(stats["actual"]["mean"], st["mean"]):
                    violations.append({"level_index": li, "trial": None, "inequality": f"mean_{b}"})
    return {
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "config": cfg.to_dict(),
        "metadata": _metadata(cfg, prob),
        "levels": levels_out,
        "violations": violations,
    }


def run_bound_study(cfg: ExperimentConfig) -> dict:
    """Actual spectral error against each requested bound, per noise level."""
    return _study(cfg, "bounds-study", want_metrics=False)


def run_metric_study(cfg: ExperimentConfig) -> dict:
    """Spectral, Frobenius and change-in-error metrics, per noise level."""
    return _study(cfg, "metric-study", want_metrics=True)


def error_metrics(A, At, p):
    """(spectral, frobenius, change_in_error) of (A+E)_p against A_p.

    change_in_error compares the residuals of the two truncations,
    | ||A - A_p|| - ||At - At_p|| |, which is | sigma_{p+1} - sigma~_{p+1} |.
    """
    S, St = eig_sym(A), eig_sym(At)
    d = rank_p_approx(St, p) - rank_p_approx(S, p)
    change = abs(S.sv(p + 1) - St.sv(p + 1))
    return spectral_norm(d), frobenius_norm(d), change


def calibrate_alpha(cfg: ExperimentConfig, n: int, target_norm: float, level_idx: int) -> float:
    """Scale making the median pilot ||alpha W|| equal ``target_norm``.

    ||alpha W|| = alpha ||W||, so the median over the pilot draws fixes
    alpha in closed form.
    """
    pilot = fold_seed(cfg.seed, PILOT_DOMAIN)
    norms = [
        spectral_norm(sample_noise(n, NoiseSpec(cfg.noise_kind, fold_seed(pilot, level_idx, j),
                                                1.0, cfg.goe_diagonal)))
        for j in range(PILOT_DRAWS)
    ]
    return target_norm / float(np.median(norms))


def beyond_gap_table(rows):
    """Ratio columns as quotients of the stored means."""
    return [
        {
            "ratio": r["ratio"],
            "our_over_true": r["thm1_mean"] / r["actual_mean"] if r["actual_mean"] else None,
            "our_over_classical": r["thm1_mean"] / r["eym_mean"],
        }
        for r in rows
    ]


def run_beyond_gap(cfg: ExperimentConfig, ratio_grid: Sequence[float] = DEFAULT_RATIOS) -> dict:
    """Bounds at calibrated noise sizes ||E|| / delta_p = c for c in ``ratio_grid``."""
    prob = load_problem(cfg)
    S, p, A = prob.S, prob.p, prob.A
    if not S.is_psd():
        raise ArgumentError("beyond-gap study needs a PSD matrix")
    dp = S.gap(p)
    rows = []
    violations = []
    for li, c in enumerate(ratio_grid):
        alpha = calibrate_alpha(cfg, S.n, c * dp, li)
        acc = {"actual": [], "thm1": [], "eym": [], "e_norm": []}
        for t in range(cfg.trials):
            E = _trial_noise(cfg, S.n, li, alpha, t)
            St = eig_sym(A + E)
            rep = bound_report(S, E, p, St)
            bad = [b for b in trial_violations(rep, weyl_check(S, St, rep.profile.e_norm))
                   if b in ("weyl", "eym") or rep.gap_ok_psd]
            violations += [{"level_index": li, "trial": t, "inequality": b} for b in bad]
            acc["actual"].append(rep.actual_error)
            acc["thm1"].append(rep.thm1)
            acc["eym"].append(rep.eym)
            acc["e_norm"].append(rep.profile.e_norm)
        row = {"ratio": float(c), "alpha": alpha}
        for name, vals in acc.items():
            st = _stats(vals)
            row[f"{name}_mean"] = st["mean"]
            row[f"{name}_std"] = st["std"]
        rows.append(row)
    return {
        "schema": SCHEMA_VERSION,
        "kind": "beyond-gap",
        "config": cfg.to_dict(),
        "metadata": _metadata(cfg, prob),
        "rows": rows,
        "table": beyond_gap_table(rows),
        "violations": violations,
    }


@dataclass(frozen=True)
class DPCertificate:
    """Utility certificate for one Gaussian-mechanism release."""

    sigma: float
    report: BoundReport
    scaled_gap_ok: bool

    def to_dict(self):
        return {"sigma": self.sigma, "scaled_gap_ok": self.scaled_gap_ok,
                "report": self.report.to_dict()}


def dp_release(A, p: int, epsilon: float, delta: float, sensitivity: float, seed: int,
               noise_kind: str = "wigner_gaussian"):
    """Release (A + E)_p with E the Gaussian mechanism's symmetric noise.

    The certificate evaluates the bounds for this draw of E and records
    whether delta_p >= 8.01 sigma sqrt(n), the scaled gap condition.
    """
    A = np.asarray(A, dtype=float)
    sigma = gaussian_mechanism_sigma(epsilon, delta, sensitivity)
    S = eig_sym(A)
    E = sample_noise(S.n, NoiseSpec(noise_kind, seed, sigma))
    St = eig_sym(A + E)
    rep = bound_report(S, E, p, St)
    ok = S.gap(p) >= 8.01 * sigma * math.sqrt(S.n)
    return rank_p_approx(St, p), DPCertificate(sigma, rep, bool(ok))
