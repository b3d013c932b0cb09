"""Distance-transform watershed for splitting touching particles.

The distance transform is exact Euclidean. Pixels outside the frame count
as foreground, so only real background pixels act as sources; a mask
without any background yields an all-infinite map flagged ``degenerate``.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .labeling import label_components
from .raster import as_mask

__all__ = ["DistanceMap", "distance_transform", "find_markers", "watershed_segment"]

_NEIGHBOURS8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass(frozen=True)
class DistanceMap:
    data: np.ndarray
    degenerate: bool = False
    metric: str = "euclidean"

    @property
    def shape(self):
        return self.data.shape


def _column_distance(mask):
    # 1-D distance to the nearest background pixel within each column.
    h, w = mask.shape
    inf = np.iinfo(np.int64).max // 4
    g = np.where(mask == 0, 0, inf).astype(np.int64)
    for y in range(1, h):
        g[y] = np.minimum(g[y], g[y - 1] + 1)
    for y in range(h - 2, -1, -1):
        g[y] = np.minimum(g[y], g[y + 1] + 1)
    g[g >= inf // 2] = -1
    return g


def _lower_envelope(f):
    """Squared distance transform of one line (Felzenszwalb-Huttenlocher).

    `f` holds squared distances, with None marking "no source here". Returns
    a list of exact integer squared distances, None where no source exists
    on the whole line.
    """
    n = len(f)
    sites = [q for q in range(n) if f[q] is not None]
    if not sites:
        return [None] * n
    v = [sites[0]]
    z = [-math.inf, math.inf]
    for q in sites[1:]:
        while True:
            p = v[-1]
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2 * q - 2 * p)
            # z[0] is -inf, so the first parabola is never popped.
            if s <= z[len(v) - 1]:
                v.pop()
                z.pop()
            else:
                break
        v.append(q)
        z[-1] = s
        z.append(math.inf)
    out = [0] * n
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        p = v[k]
        out[q] = (q - p) * (q - p) + f[p]
    return out


def distance_transform(mask):
    """Exact Euclidean distance from each foreground pixel to the nearest
    background pixel; background maps to 0."""
    mask = as_mask(mask)
    if not (mask == 0).any():
        return DistanceMap(np.full(mask.shape, np.inf), degenerate=True)
    g = _column_distance(mask)
    h, w = mask.shape
    sq = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        row = [None if d < 0 else d * d for d in g[y].tolist()]
        env = _lower_envelope(row)
        sq[y] = [math.inf if d is None else d for d in env]
    return DistanceMap(np.sqrt(sq))


def _as_distance(dm):
    return dm.data if isinstance(dm, DistanceMap) else np.asarray(dm, dtype=np.float64)


def find_markers(dm, min_distance=3, min_prominence=0.0):
    """Label plateaus of 8-neighbourhood local maxima with value >= min_distance.

    With ``min_prominence > 0`` a plateau is dropped when it connects to a
    higher value (or an equally high, earlier marker) through pixels no lower
    than ``value - min_prominence``; this removes shallow saddle maxima at the
    neck between touching particles.

    Returns ``(labels, count)`` with markers numbered in raster order.
    """
    if min_distance < 1:
        raise ValueError("min_distance must be >= 1")
    d = _as_distance(dm)
    padded = np.pad(d, 1, constant_values=-np.inf)
    h, w = d.shape
    peak = d >= min_distance
    for dy, dx in _NEIGHBOURS8:
        peak &= d >= padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    labels, count = label_components(peak, 8)
    if min_prominence <= 0 or count < 2:
        return labels, count

    keep = np.ones(count + 1, dtype=bool)
    keep[0] = False
    firsts = [tuple(np.argwhere(labels == k)[0]) for k in range(1, count + 1)]
    values = [d[p] for p in firsts]
    for k in range(1, count + 1):
        v = values[k - 1]
        region, _ = label_components(d >= v - min_prominence, 8)
        comp = region == region[firsts[k - 1]]
        if d[comp].max() > v:
            keep[k] = False
            continue
        for j in range(1, k):
            if values[j - 1] == v and comp[firsts[j - 1]]:
                keep[k] = False
                break
    return label_components(keep[labels], 8)


def watershed_segment(dm, markers, mask):
    """Flood the negated distance map from `markers` inside `mask`.

    Pixels are claimed by the first basin to reach them, processing higher
    distance values first and, at equal values, lower labels first. Every
    foreground pixel ends up labelled: components that no marker reaches get
    fresh labels after the marker labels, in raster order. Returns
    ``(labels, count)``.
    """
    mask = as_mask(mask)
    d = _as_distance(dm)
    markers = np.asarray(markers)
    if not (d.shape == markers.shape == mask.shape):
        raise ValueError("distance map, markers and mask must share a shape")
    if ((markers != 0) & (mask == 0)).any():
        raise ValueError("marker outside mask")

    h, w = mask.shape
    out = markers.astype(np.int32).ravel().tolist()
    fg = mask.ravel().tolist()
    dist = d.ravel().tolist()
    heap = []
    counter = 0
    for idx in np.flatnonzero(markers).tolist():
        heap.append((-dist[idx], out[idx], counter, idx))
        counter += 1
    heapq.heapify(heap)
    while heap:
        _, lab, _, idx = heapq.heappop(heap)
        y, x = divmod(idx, w)
        for dy, dx in _NEIGHBOURS8:
            yy, xx = y + dy, x + dx
            if 0 <= yy < h and 0 <= xx < w:
                q = yy * w + xx
                if fg[q] and not out[q]:
                    out[q] = lab
                    heapq.heappush(heap, (-dist[q], lab, counter, q))
                    counter += 1

    labels = np.array(out, dtype=np.int32).reshape(h, w)
    count = int(markers.max(initial=0))
    leftover = (mask != 0) & (labels == 0)
    if leftover.any():
        extra, nextra = label_components(leftover, 8)
        labels[leftover] = extra[leftover] + count
        count += nextra
    return labels, count
