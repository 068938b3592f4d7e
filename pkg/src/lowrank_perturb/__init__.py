"""Spectral-norm perturbation bounds for rank-p approximations of symmetric matrices."""

from .bounds import BoundReport, GapProfile, bound_report, gap_profile
from .contour import QuadSpec, RectContour, contour_project
from .matcore import EntireFn, Spectrum, eig_sym, f_p_approx, rank_p_approx, spectral_norm
from .noise import NoiseSpec, gaussian_mechanism_sigma, sample_noise

__all__ = [
    "BoundReport",
    "EntireFn",
    "GapProfile",
    "NoiseSpec",
    "QuadSpec",
    "RectContour",
    "Spectrum",
    "bound_report",
    "contour_project",
    "eig_sym",
    "f_p_approx",
    "gap_profile",
    "gaussian_mechanism_sigma",
    "rank_p_approx",
    "sample_noise",
    "spectral_norm",
]
__version__ = "0.1.0"
