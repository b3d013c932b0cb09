"""Global thresholding: Otsu's method and fixed cutoffs.

Foreground is everything strictly brighter than the threshold ``t``, so
``t = 255`` selects nothing.
"""

from dataclasses import dataclass

import numpy as np

from .raster import as_gray

__all__ = ["ThresholdResult", "otsu", "otsu_image", "fixed", "apply_threshold"]


@dataclass(frozen=True)
class ThresholdResult:
    t: int
    between_class_variance: float = 0.0


def _split_score(n0, s0, n1, s1):
    # N**2 * sigma_b**2 == (s0*n1 - s1*n0)**2 / (n0*n1); returned as an exact
    # (numerator, denominator) pair of Python ints.
    d = s0 * n1 - s1 * n0
    return d * d, n0 * n1


def otsu(hist):
    """Otsu threshold of a 256-bin histogram.

    Maximises the between-class variance ``w0*w1*(mu0 - mu1)**2`` where class
    0 holds intensities ``<= t``. Scores are compared as exact integer
    fractions; ties go to the smallest ``t``. A histogram with a single
    occupied bin returns that intensity with zero variance.
    """
    hist = [int(c) for c in np.asarray(hist).ravel()]
    if len(hist) != 256:
        raise ValueError(f"expected 256 bins, got {len(hist)}")
    if any(c < 0 for c in hist):
        raise ValueError("histogram counts must be non-negative")
    total = sum(hist)
    if total == 0:
        raise ValueError("empty histogram")
    total_sum = sum(v * c for v, c in enumerate(hist))

    best_t = None
    best_num, best_den = 0, 1
    n0 = s0 = 0
    for t in range(255):
        n0 += hist[t]
        s0 += t * hist[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        num, den = _split_score(n0, s0, n1, total_sum - s0)
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den

    if best_t is None:
        only = next(v for v, c in enumerate(hist) if c)
        return ThresholdResult(only, 0.0)
    return ThresholdResult(best_t, best_num / (best_den * total * total))


def otsu_image(img):
    """Otsu threshold computed from an image's histogram."""
    img = as_gray(img)
    return otsu(np.bincount(img.ravel(), minlength=256))


def between_class_variance(hist, t):
    """Between-class variance of `hist` split at `t` (0 if a class is empty)."""
    hist = np.asarray(hist, dtype=np.int64)
    values = np.arange(256, dtype=np.int64)
    n0 = int(hist[: t + 1].sum())
    n1 = int(hist[t + 1:].sum())
    if n0 == 0 or n1 == 0:
        return 0.0
    s0 = int((hist[: t + 1] * values[: t + 1]).sum())
    s1 = int((hist[t + 1:] * values[t + 1:]).sum())
    num, den = _split_score(n0, s0, n1, s1)
    total = n0 + n1
    return num / (den * total * total)


def fixed(t, hist=None):
    """A user-chosen threshold; variance is filled in when `hist` is given."""
    if isinstance(t, bool) or int(t) != t or not 0 <= t <= 255:
        raise ValueError(f"threshold must be an integer in [0, 255], got {t!r}")
    t = int(t)
    var = 0.0 if hist is None else between_class_variance(hist, t)
    return ThresholdResult(t, var)


def apply_threshold(img, t):
    """Binary mask with 1 where ``img > t``."""
    img = as_gray(img)
    if isinstance(t, ThresholdResult):
        t = t.t
    return (img > t).astype(np.uint8)
