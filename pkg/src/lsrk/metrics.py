"""Recovery quality metrics: relative error, PSNR, SSIM."""

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import DimensionMismatchError, UndefinedMetricError
from .tensors import frobenius_norm

__all__ = ["MetricReport", "relative_error", "psnr", "ssim", "metric_report"]


def _check_pair(estimate, truth):
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise DimensionMismatchError(
            f"metric needs equal shapes, got {estimate.shape} and {truth.shape}")
    return estimate, truth


def relative_error(estimate, truth):
    """||truth - estimate||_F / ||truth||_F."""
    estimate, truth = _check_pair(estimate, truth)
    denom = frobenius_norm(truth)
    if denom == 0.0:
        raise UndefinedMetricError("relative error undefined for zero truth")
    return frobenius_norm(truth - estimate) / denom


def psnr(estimate, truth):
    """10*log10(numel * max|truth|^2 / ||estimate - truth||_F^2), in dB.

    Identical inputs return +inf.
    """
    estimate, truth = _check_pair(estimate, truth)
    peak = float(np.max(np.abs(truth)))
    if peak == 0.0:
        raise UndefinedMetricError("PSNR undefined for zero truth")
    err = frobenius_norm(estimate - truth) ** 2
    if err == 0.0:
        return np.inf
    return float(10.0 * np.log10(truth.size * peak ** 2 / err))


def _gaussian_kernel(size, sigma):
    r = (size - 1) / 2.0
    x = np.arange(size) - r
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def _ssim_2d(x, y, kernel, c1, c2):
    mu_x = convolve2d(x, kernel, mode="valid")
    mu_y = convolve2d(y, kernel, mode="valid")
    xx = convolve2d(x * x, kernel, mode="valid") - mu_x ** 2
    yy = convolve2d(y * y, kernel, mode="valid") - mu_y ** 2
    xy = convolve2d(x * y, kernel, mode="valid") - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (xx + yy + c2)
    return float(np.mean(num / den))


def ssim(estimate, truth, k1=0.01, k2=0.03, sigma=1.5, win_size=11):
    """Mean structural similarity over all 2D frontal slices.

    Entries are first rescaled by the truth's min/max so the dynamic range
    is 1 (skipped when the truth is constant, in which case raw values are
    compared).  Gaussian-weighted 11x11 window statistics; on slices smaller
    than the window, the window shrinks to the largest odd size that fits.
    """
    estimate, truth = _check_pair(estimate, truth)
    if estimate.ndim < 3:
        raise DimensionMismatchError("ssim needs tensor order >= 3")
    t_min, t_max = float(truth.min()), float(truth.max())
    if t_max > t_min:
        scale = t_max - t_min
        estimate = (estimate - t_min) / scale
        truth = (truth - t_min) / scale
    n1, n2 = truth.shape[:2]
    size = min(win_size, n1, n2)
    if size % 2 == 0:
        size -= 1
    kernel = _gaussian_kernel(size, sigma)
    c1 = k1 ** 2
    c2 = k2 ** 2
    rest = truth.shape[2:]
    vals = [
        _ssim_2d(estimate[(slice(None), slice(None)) + idx],
                 truth[(slice(None), slice(None)) + idx], kernel, c1, c2)
        for idx in np.ndindex(*rest)
    ]
    return float(np.mean(vals))


@dataclass(frozen=True)
class MetricReport:
    re: float
    psnr: float
    ssim: float


def metric_report(estimate, truth):
    """All three metrics in one pass."""
    return MetricReport(re=relative_error(estimate, truth),
                        psnr=psnr(estimate, truth),
                        ssim=ssim(estimate, truth))
