"""Seeded instance suites that check inequalities instance by instance.

Instance ``i`` of a suite with seed ``s`` is built from
``rng_for(fold_seed(s, i))`` only, so any single instance can be rebuilt in
isolation.  Each suite returns one record per instance holding the measured
quantities and a pass flag per inequality.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import bound_report, weyl_check
from .contour import (
    QuadSpec,
    F1_integral,
    F_integral,
    arctan_integral_check,
    build_contour_psd,
    build_contours_sym,
    segment_integrals,
)
from .errors import ArgumentError
from .harness import trial_violations
from .matcore import EntireFn, eig_sym, f_p_approx, spectral_norm, split_index_k
from .noise import NoiseSpec, fold_seed, rng_for, sample_noise
from .report import SCHEMA_VERSION
from .synthetic import matrix_with_spectrum

MAX_SUITE_N = 30
REGISTRY = (
    EntireFn.power(0),
    EntireFn.power(1),
    EntireFn.power(2),
    EntireFn.power(3),
    EntireFn.exp(),
)
M1_CONST = 20.0 + 4.0 * math.pi / math.log(10.0)


@dataclass(frozen=True)
class Instance:
    A: np.ndarray
    E: np.ndarray
    p: int


def _spectrum(rng, n, psd):
    """Random spectrum with a visible gap after a random p (or k)."""
    p = int(rng.integers(1, n))
    if psd:
        top = np.sort(rng.uniform(2.0, 10.0, p))[::-1]
        rest = np.sort(rng.uniform(0.0, 1.0, n - p))[::-1] * rng.uniform(0.2, 1.5)
        return np.concatenate([top, rest]), p
    k = int(rng.integers(0, p + 1))
    pos = np.sort(rng.uniform(4.0, 10.0, k))[::-1]
    neg = -np.sort(rng.uniform(4.0, 10.0, p - k))[::-1]
    mid = rng.uniform(-1.5, 1.5, n - p)
    lam = np.sort(np.concatenate([pos, mid, neg]))[::-1]
    return lam, p


def random_instance(seed: int, index: int, n_range=(3, 12), psd: bool = True,
                    gap_fraction=(0.05, 1.0), noise_kind=None) -> Instance:
    """Seeded (A, E, p) with ``4 ||E||`` a random fraction of the relevant gap."""
    rng = rng_for(fold_seed(seed, index))
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    lam, p = _spectrum(rng, n, psd)
    A = matrix_with_spectrum(lam, seed=int(rng.integers(0, 2 ** 63)))
    S = eig_sym(A)
    kind = noise_kind or ("wigner_gaussian", "rademacher")[int(rng.integers(0, 2))]
    W = sample_noise(n, NoiseSpec(kind, int(rng.integers(0, 2 ** 63))))
    k = split_index_k(S, p)
    gaps = [S.gap(p)] if psd else [g for g in (
        S.gap(k) if k >= 1 else None, S.gap(n - (p - k)) if p > k else None) if g is not None]
    frac = rng.uniform(*gap_fraction)
    E = W * (frac * min(gaps) / (4.0 * spectral_norm(W)))
    return Instance(A, E, p)


def _guard_n(n_max):
    if n_max > MAX_SUITE_N:
        raise ArgumentError(f"contour suites are limited to n <= {MAX_SUITE_N}, got {n_max}")


def bootstrap_instance(inst: Instance, fns: Sequence[EntireFn] = REGISTRY,
                       q: QuadSpec = QuadSpec(), tol: float = 1e-4) -> dict:
    """F(f), F1(f) and ||f_p(At) - f_p(A)|| for each f on one PSD instance."""
    S = eig_sym(inst.A)
    St = eig_sym(inst.A + inst.E)
    c = build_contour_psd(S, inst.p)
    F = F_integral(S, St, list(fns), c, q)
    F1 = F1_integral(S, inst.E, list(fns), c, q)
    out = []
    for f, fv, f1v in zip(fns, F, F1):
        diff = spectral_norm(f_p_approx(St, f, inst.p) - f_p_approx(S, f, inst.p))
        out.append({
            "f": f.name,
            "F": float(fv),
            "F1": float(f1v),
            "ratio": float(fv / f1v) if f1v > 0 else None,
            "actual": diff,
            "bootstrap_ok": bool(fv <= 2.0 * f1v * (1.0 + tol)),
            "dominates_actual": bool(diff <= fv * (1.0 + tol) + 1e-12),
        })
    e_norm = spectral_norm(inst.E)
    return {"n": S.n, "p": inst.p, "e_norm": e_norm, "delta_p": S.gap(inst.p),
            "gap_ok": bool(4 * e_norm <= S.gap(inst.p)), "functions": out}


def segment_lemma_instance(inst: Instance, q: QuadSpec = QuadSpec(rel_tol=1e-4)) -> dict:
    """Segment integrals on the top-cluster contour against their closed-form bounds."""
    S = eig_sym(inst.A)
    E = inst.E
    k = split_index_k(S, inst.p)
    if k == 0:
        raise ArgumentError("segment lemmas need a top cluster (k >= 1)")
    c = build_contours_sym(S, inst.p)[0]
    a0, a1, T = c.x0, c.x1, c.T
    dk = S.gap(k)
    lam1 = S.lam(1)
    s1 = S.sv(1)
    e_norm = spectral_norm(E)
    prof = bound_report(S, E, inst.p).profile
    seg = segment_integrals(S, E, c, q)
    N1, N2, N3, N4 = seg.N
    b_n1 = 2 * math.pi * a0 / dk + 4 * math.log(3 * T / dk)
    b_n24 = math.sqrt(2) * (a1 - a0) / T
    b_n3 = math.pi * a1 / (a1 - lam1) + 4 * math.log(3 * T / (a1 - lam1))
    rx = prof.r ** 2 * prof.x_bar
    b_m1 = rx * (2 * math.pi * a0 / dk + 2 * math.log(6 * s1 / dk)) + \
        M1_CONST * e_norm * math.log(10 * s1 / dk)
    at_val, at_bound = arctan_integral_check(dk / 2.0, T, q)
    checks = {
        "N1": N1 <= b_n1,
        "N2": N2 <= b_n24,
        "N4": N4 <= b_n24,
        "N3": N3 <= b_n3,
        "M1": seg.M[0] <= b_m1,
        "arctan": at_val <= at_bound,
    }
    return {
        "n": S.n, "p": inst.p, "k": k, "psd": S.is_psd(),
        "gap_ok": bool(4 * e_norm <= dk),
        "M": list(seg.M), "N": list(seg.N),
        "bounds": {"N1": b_n1, "N2": b_n24, "N4": b_n24, "N3": b_n3, "M1": b_m1,
                   "arctan": at_bound},
        "arctan": at_val,
        "checks": {k_: bool(v) for k_, v in checks.items()},
    }


def run_bootstrap_suite(instances: int = 20, seed: int = 0, n_max: int = 12,
                        fns: Sequence[EntireFn] = REGISTRY, q: QuadSpec = QuadSpec(),
                        tol: float = 1e-4, segments: bool = True) -> dict:
    """Contour bootstrapping and segment-lemma checks on seeded PSD instances."""
    _guard_n(n_max)
    records = []
    for i in range(instances):
        inst = random_instance(seed, i, (3, n_max), psd=True)
        rec = {"index": i, "bootstrap": bootstrap_instance(inst, fns, q, tol)}
        if segments:
            rec["segments"] = segment_lemma_instance(inst, QuadSpec(q.points_per_segment,
                                                                     max(q.rel_tol, 1e-4)))
        records.append(rec)
    failures = []
    for rec in records:
        for fr in rec["bootstrap"]["functions"]:
            if rec["bootstrap"]["gap_ok"] and not fr["bootstrap_ok"]:
                failures.append({"index": rec["index"], "check": f"bootstrap[{fr['f']}]"})
            if not fr["dominates_actual"]:
                failures.append({"index": rec["index"], "check": f"contour_bound[{fr['f']}]"})
        for name, ok in rec.get("segments", {}).get("checks", {}).items():
            if not ok:
                failures.append({"index": rec["index"], "check": name})
    return {"schema": SCHEMA_VERSION, "kind": "bootstrap-suite", "seed": seed,
            "instances": records, "failures": failures}


def run_theorem_suite(trials: int = 1000, seed: int = 0, n_max: int = 50) -> dict:
    """Actual error against every applicable bound on mixed PSD/indefinite trials."""
    counts = {"psd": 0, "indefinite": 0}
    violations = []
    checked = {b: 0 for b in ("eym", "thm1", "thm2", "main2", "main2_1", "weyl")}
    for i in range(trials):
        psd = i % 2 == 0
        inst = random_instance(seed, i, (3, n_max), psd=psd)
        S = eig_sym(inst.A)
        St = eig_sym(inst.A + inst.E)
        rep = bound_report(S, inst.E, inst.p, St)
        counts["psd" if rep.profile.psd else "indefinite"] += 1
        checked["eym"] += 1
        checked["weyl"] += 1
        if rep.gap_ok_psd:
            checked["thm1"] += 1
            checked["thm2"] += 1
        if rep.gap_ok_sym:
            checked["main2"] += 1
            checked["main2_1"] += 1
        bad = trial_violations(rep, weyl_check(S, St, rep.profile.e_norm))
        violations += [{"trial": i, "inequality": b,
                        "actual": rep.actual_error, "bound": getattr(rep, b, None)}
                       for b in bad]
    return {"schema": SCHEMA_VERSION, "kind": "theorem-suite", "seed": seed,
            "counts": counts, "checked": checked, "violations": violations}
