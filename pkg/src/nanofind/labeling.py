"""Connected-component labeling of binary masks.

Components are found with a two-pass union-find over horizontal runs of
foreground pixels. Labels are numbered 1..count in raster order of each
component's first pixel.
"""

import numpy as np

from .raster import as_mask

__all__ = ["check_connectivity", "label_components", "component_sizes", "filter_small"]


def check_connectivity(conn):
    """Normalise 4/8 (or "four"/"eight") to an int."""
    names = {"four": 4, "eight": 8, "4": 4, "8": 8}
    if isinstance(conn, str):
        conn = names.get(conn.strip().lower(), conn)
    if conn not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {conn!r}")
    return int(conn)


def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


def _runs(mask):
    # (row, start, stop) of every horizontal foreground run, in raster order.
    h, w = mask.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    edges = np.diff(padded, axis=1)
    sr, sc = np.nonzero(edges == 1)
    _, ec = np.nonzero(edges == -1)
    return sr, sc, ec


def label_components(mask, connectivity=8):
    """Label connected foreground regions.

    Returns ``(labels, count)`` where `labels` is an int32 array with 0 for
    background and 1..count for the components.
    """
    conn = check_connectivity(connectivity)
    mask = as_mask(mask)
    labels = np.zeros(mask.shape, dtype=np.int32)
    rows, starts, stops = _runs(mask)
    nruns = len(rows)
    if nruns == 0:
        return labels, 0

    rows = rows.tolist()
    starts = starts.tolist()
    stops = stops.tolist()
    # Diagonal contact widens the overlap test by one pixel on each side.
    slack = 1 if conn == 8 else 0
    parent = list(range(nruns))

    prev_lo = prev_hi = 0  # run index range [prev_lo, prev_hi) of the row above
    row_start = 0
    for i in range(nruns):
        if i > 0 and rows[i] != rows[i - 1]:
            if rows[i] == rows[i - 1] + 1:
                prev_lo, prev_hi = row_start, i
            else:
                prev_lo = prev_hi = i
            row_start = i
        s, e = starts[i], stops[i]
        while prev_lo < prev_hi and stops[prev_lo] + slack <= s:
            prev_lo += 1
        j = prev_lo
        while j < prev_hi and starts[j] < e + slack:
            a, b = _find(parent, i), _find(parent, j)
            if a < b:
                parent[b] = a
            elif b < a:
                parent[a] = b
            j += 1

    root_label = {}
    for i in range(nruns):
        r = _find(parent, i)
        lab = root_label.get(r)
        if lab is None:
            lab = root_label[r] = len(root_label) + 1
        labels[rows[i], starts[i]:stops[i]] = lab
    return labels, len(root_label)


def component_sizes(labels, count=None):
    """List of ``(label, pixel_count)`` for labels 1..count."""
    labels = np.asarray(labels)
    if count is None:
        count = int(labels.max(initial=0))
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    return [(lab, int(sizes[lab])) for lab in range(1, count + 1)]


def filter_small(labels, min_area, count=None):
    """Drop components smaller than `min_area` and relabel the rest compactly.

    Raster order of the surviving labels is preserved. Returns
    ``(labels, count)``.
    """
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    labels = np.asarray(labels)
    if count is None:
        count = int(labels.max(initial=0))
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    keep = sizes >= min_area
    keep[0] = False
    lut = np.zeros(count + 1, dtype=np.int32)
    lut[keep] = np.arange(1, int(keep.sum()) + 1, dtype=np.int32)
    return lut[labels], int(keep.sum())
