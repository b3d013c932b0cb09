"""Slow, independent reference implementations used by the tests."""

from collections import deque
from fractions import Fraction
from itertools import permutations

import numpy as np


def naive_histogram(img):
    bins = [0] * 256
    for v in np.asarray(img).ravel().tolist():
        bins[v] += 1
    return bins


def otsu_sweep(img):
    """Exact between-class variance at every t, from sorted pixel values.

    Class statistics come from prefix sums over the sorted pixels rather
    than a histogram. Returns a list of 256 Fractions (0 where a class is
    empty).
    """
    px = np.sort(np.asarray(img).ravel().astype(np.int64))
    prefix = [0] + np.cumsum(px).tolist()
    n = len(px)
    total = prefix[-1]
    below = np.searchsorted(px, np.arange(256), side="right").tolist()
    out = []
    cache = {}
    for t in range(256):
        n0 = below[t]
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            out.append(Fraction(0))
            continue
        if n0 not in cache:
            # empty bins leave the split unchanged, so reuse its value
            s0 = prefix[n0]
            mu0 = Fraction(s0, n0)
            mu1 = Fraction(total - s0, n1)
            cache[n0] = Fraction(n0 * n1, n * n) * (mu0 - mu1) ** 2
        out.append(cache[n0])
    return out


def otsu_argmax(img):
    sweep = otsu_sweep(img)
    best = max(sweep)
    if best == 0:
        return int(np.asarray(img).min())
    return sweep.index(best)


def loop_erode(mask, offsets, iterations=1):
    m = np.asarray(mask, dtype=np.uint8)
    h, w = m.shape
    for _ in range(iterations):
        out = np.zeros_like(m)
        for y in range(h):
            for x in range(w):
                ok = True
                for dx, dy in offsets:
                    yy, xx = y + dy, x + dx
                    if not (0 <= yy < h and 0 <= xx < w) or not m[yy, xx]:
                        ok = False
                        break
                out[y, x] = ok
        m = out
    return m


def loop_dilate(mask, offsets, iterations=1):
    m = np.asarray(mask, dtype=np.uint8)
    h, w = m.shape
    for _ in range(iterations):
        out = np.zeros_like(m)
        for y in range(h):
            for x in range(w):
                for dx, dy in offsets:
                    yy, xx = y - dy, x - dx
                    if 0 <= yy < h and 0 <= xx < w and m[yy, xx]:
                        out[y, x] = 1
                        break
        m = out
    return m


def _footprint(offsets):
    r = max(max(abs(dx), abs(dy)) for dx, dy in offsets)
    fp = np.zeros((2 * r + 1, 2 * r + 1), dtype=bool)
    for dx, dy in offsets:
        fp[r + dy, r + dx] = True
    return r, fp


def window_erode(mask, offsets, iterations=1):
    """Neighbourhood scan via sliding windows over a zero-padded mask."""
    r, fp = _footprint(offsets)
    m = np.asarray(mask).astype(bool)
    for _ in range(iterations):
        win = np.lib.stride_tricks.sliding_window_view(np.pad(m, r), fp.shape)
        m = win[..., fp].all(axis=-1)
    return m.astype(np.uint8)


def window_dilate(mask, offsets, iterations=1):
    r, fp = _footprint(offsets)
    fp = fp[::-1, ::-1]
    m = np.asarray(mask).astype(bool)
    for _ in range(iterations):
        win = np.lib.stride_tricks.sliding_window_view(np.pad(m, r), fp.shape)
        m = win[..., fp].any(axis=-1)
    return m.astype(np.uint8)


def flood_fill_labels(mask, connectivity):
    """Label components by breadth-first flood fill in raster order."""
    m = np.asarray(mask).astype(bool).tolist()
    h = len(m)
    w = len(m[0]) if h else 0
    if connectivity == 4:
        nbrs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    else:
        nbrs = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dy or dx]
    labels = [[0] * w for _ in range(h)]
    count = 0
    for y in range(h):
        for x in range(w):
            if m[y][x] and not labels[y][x]:
                count += 1
                labels[y][x] = count
                queue = deque([(y, x)])
                while queue:
                    cy, cx = queue.popleft()
                    for dy, dx in nbrs:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and m[ny][nx] and not labels[ny][nx]:
                            labels[ny][nx] = count
                            queue.append((ny, nx))
    return np.array(labels, dtype=np.int64).reshape(h, w), count


def brute_region(labels, image, label):
    """Per-pixel summation of every region feature for one label."""
    labels = np.asarray(labels)
    h, w = labels.shape
    pts = [(x, y) for y in range(h) for x in range(w) if labels[y, x] == label]
    n = len(pts)
    cx = sum(x for x, _ in pts) / n
    cy = sum(y for _, y in pts) / n
    mu20 = sum((x - cx) ** 2 for x, _ in pts)
    mu02 = sum((y - cy) ** 2 for _, y in pts)
    mu11 = sum((x - cx) * (y - cy) for x, y in pts)
    cov = np.array([[mu20, mu11], [mu11, mu02]]) / n
    lam = np.sort(np.linalg.eigvalsh(cov))[::-1]
    lam = np.clip(lam, 0, None)
    perimeter = 0
    inside = set(pts)
    for x, y in pts:
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if (x + dx, y + dy) not in inside:
                perimeter += 1
    mean = sum(int(image[y, x]) for x, y in pts) / n
    return {
        "area": n,
        "cx": cx,
        "cy": cy,
        "mu20": mu20,
        "mu02": mu02,
        "mu11": mu11,
        "major": 4 * np.sqrt(lam[0]),
        "minor": 4 * np.sqrt(lam[1]),
        "perimeter": perimeter,
        "mean": mean,
        "bbox": (min(x for x, _ in pts), min(y for _, y in pts),
                 max(x for x, _ in pts), max(y for _, y in pts)),
    }


def brute_distance(mask):
    """All-pairs minimum Euclidean distance to a background pixel."""
    m = np.asarray(mask).astype(bool)
    fg = np.argwhere(m)
    bg = np.argwhere(~m)
    out = np.zeros(m.shape)
    if len(fg) == 0:
        return out
    if len(bg) == 0:
        out[:] = np.inf
        return out
    d2 = ((fg[:, None, :] - bg[None, :, :]) ** 2).sum(axis=2).min(axis=1)
    out[fg[:, 0], fg[:, 1]] = np.sqrt(d2)
    return out


def max_matching_size(gt, det, radius):
    """Maximum-cardinality one-to-one matching by exhaustive enumeration."""
    gt = list(gt)
    det = list(det)
    r2 = radius * radius
    ok = [[(g[0] - d[0]) ** 2 + (g[1] - d[1]) ** 2 <= r2 for d in det] for g in gt]
    small, large, transpose = (gt, det, False) if len(gt) <= len(det) else (det, gt, True)
    best = 0
    slots = list(range(len(large))) + [None] * len(small)
    for perm in set(permutations(slots, len(small))):
        size = 0
        for i, j in enumerate(perm):
            if j is None:
                continue
            a, b = (j, i) if transpose else (i, j)
            if ok[a][b]:
                size += 1
        best = max(best, size)
    return best


def exact_region(labels, image, label, dps=40):
    """Region features from per-pixel integer sums, reals in mpmath.

    Deviation sums are taken as ``sum((n*x - Sx)**2)`` etc., which equal
    ``n**2 * mu20`` exactly, so the covariance is known without rounding.
    """
    import mpmath

    ys, xs = np.nonzero(np.asarray(labels) == label)
    xs = [int(v) for v in xs]
    ys = [int(v) for v in ys]
    n = len(xs)
    sx, sy = sum(xs), sum(ys)
    d20 = sum((n * x - sx) ** 2 for x in xs)
    d02 = sum((n * y - sy) ** 2 for y in ys)
    d11 = sum((n * x - sx) * (n * y - sy) for x, y in zip(xs, ys))
    with mpmath.workdps(dps):
        scale = mpmath.mpf(n) ** 3  # covariance = d / n**3
        a, c, b = d20 / scale, d02 / scale, d11 / scale
        half = (a + c) / 2
        disc = mpmath.sqrt(((a - c) / 2) ** 2 + b * b)
        lam1, lam2 = half + disc, half - disc
        if d11 == 0 and d20 == d02:
            theta = mpmath.mpf(0)
        else:
            theta = mpmath.atan2(2 * d11, d20 - d02) / 2
        minor = mpmath.mpf(0) if d20 * d02 - d11 * d11 == 0 else 4 * mpmath.sqrt(lam2)
        inside = set(zip(xs, ys))
        perimeter = sum((x + dx, y + dy) not in inside
                        for x, y in inside for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)))
        img = np.asarray(image)
        total = sum(int(img[y, x]) for x, y in zip(xs, ys))
        return {
            "area": n,
            "cx": mpmath.mpf(sx) / n,
            "cy": mpmath.mpf(sy) / n,
            "n2mu20": d20,
            "n2mu02": d02,
            "n2mu11": d11,
            "major": 4 * mpmath.sqrt(lam1),
            "minor": minor,
            "orientation": theta,
            "perimeter": perimeter,
            "mean": mpmath.mpf(total) / n,
        }
