"""Per-particle features from image moments, plus the particle CSV format.

Each pixel is treated as a point at its integer ``(x, y) = (col, row)``
coordinate. Second moments are central sums, e.g.
``mu20 = sum((x - cx)**2)``, and the region covariance is ``mu / area``.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .raster import as_gray

__all__ = [
    "Particle",
    "CSV_HEADER",
    "measure",
    "central_moments",
    "to_csv",
    "read_csv",
]

CSV_HEADER = (
    "label,x,y,area,major_axis,minor_axis,perimeter,mean_intensity,orientation,iteration"
)


@dataclass(frozen=True)
class Particle:
    label: int
    centroid_x: float
    centroid_y: float
    area: int
    perimeter: int
    major_axis: float
    minor_axis: float
    orientation: float
    mean_intensity: float
    bbox: tuple  # (x_min, y_min, x_max, y_max), inclusive
    iteration: int = 1

    @property
    def centroid(self):
        return (self.centroid_x, self.centroid_y)


def central_moments(labels, count=None):
    """Exact moment sums per label.

    Returns a dict of object arrays of Python ints indexed by label (entry 0
    is background):
    ``n``, ``sx``, ``sy`` and the scaled central moments
    ``m20 = n*mu20``, ``m02 = n*mu02``, ``m11 = n*mu11``, all integer-exact.
    """
    labels = np.asarray(labels)
    if count is None:
        count = int(labels.max(initial=0))
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs].astype(np.int64)
    xs = xs.astype(np.int64)
    ys = ys.astype(np.int64)
    out = {}
    size = count + 1

    def acc(v):
        total = np.zeros(size, dtype=np.int64)
        np.add.at(total, lab, v)
        return total

    # Products below may exceed int64 on large frames; use Python ints.
    n = np.bincount(lab, minlength=size).astype(object)
    sx, sy = acc(xs).astype(object), acc(ys).astype(object)
    sxx = acc(xs * xs).astype(object)
    syy = acc(ys * ys).astype(object)
    sxy = acc(xs * ys).astype(object)
    out["n"] = n
    out["sx"] = sx
    out["sy"] = sy
    out["m20"] = n * sxx - sx * sx
    out["m02"] = n * syy - sy * sy
    out["m11"] = n * sxy - sx * sy
    return out


def _perimeter(labels, count):
    # 4-neighbour edges between a region pixel and anything not in the region,
    # the frame included.
    padded = np.pad(labels, 1)
    core = padded[1:-1, 1:-1]
    per = np.zeros(count + 1, dtype=np.int64)
    for nb in (padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:]):
        edge = (core != 0) & (nb != core)
        per += np.bincount(core[edge], minlength=count + 1)
    return per


def _axes_and_orientation(m20, m02, m11, n):
    # Eigen-decomposition of [[m20, m11], [m11, m02]] / n**2 (covariance).
    if m11 == 0 and m20 == m02:
        theta = 0.0
    else:
        theta = 0.5 * math.atan2(2 * m11, m20 - m02)
    n2 = float(n) * float(n)
    half_trace = (m20 + m02) / (2 * n2)
    # Integer numerators stay exact until the final division.
    disc = math.sqrt(((m20 - m02) ** 2 + 4 * m11 * m11) / 4) / n2
    lam1 = half_trace + disc
    # det/lam1 avoids cancellation for elongated regions.
    det = m20 * m02 - m11 * m11
    lam2 = max(det / (n2 * n2) / lam1, 0.0) if lam1 > 0 else 0.0
    return 4.0 * math.sqrt(lam1), 4.0 * math.sqrt(lam2), theta


def measure(labels, image, iteration=1, count=None):
    """Measure every labelled region of `labels` against `image`.

    Intensity features come from `image`; geometry from `labels`. Returns a
    list of Particle in label order.
    """
    labels = np.asarray(labels)
    image = as_gray(image)
    if labels.shape != image.shape:
        raise ValueError(
            f"label map shape {labels.shape} does not match image shape {image.shape}"
        )
    if count is None:
        count = int(labels.max(initial=0))
    if count == 0:
        return []

    mom = central_moments(labels, count)
    flat = labels.ravel()
    intensity = np.bincount(flat, weights=image.ravel().astype(np.float64),
                            minlength=count + 1)
    per = _perimeter(labels, count)

    ys, xs = np.indices(labels.shape)
    fg = flat != 0
    lab = flat[fg]
    big = np.iinfo(np.int64).max
    xmin = np.full(count + 1, big)
    ymin = np.full(count + 1, big)
    xmax = np.full(count + 1, -1)
    ymax = np.full(count + 1, -1)
    np.minimum.at(xmin, lab, xs.ravel()[fg])
    np.minimum.at(ymin, lab, ys.ravel()[fg])
    np.maximum.at(xmax, lab, xs.ravel()[fg])
    np.maximum.at(ymax, lab, ys.ravel()[fg])

    particles = []
    for k in range(1, count + 1):
        n = int(mom["n"][k])
        if n == 0:
            continue
        major, minor, theta = _axes_and_orientation(
            int(mom["m20"][k]), int(mom["m02"][k]), int(mom["m11"][k]), n
        )
        particles.append(
            Particle(
                label=k,
                centroid_x=int(mom["sx"][k]) / n,
                centroid_y=int(mom["sy"][k]) / n,
                area=n,
                perimeter=int(per[k]),
                major_axis=major,
                minor_axis=minor,
                orientation=theta,
                mean_intensity=float(intensity[k]) / n,
                bbox=(int(xmin[k]), int(ymin[k]), int(xmax[k]), int(ymax[k])),
                iteration=iteration,
            )
        )
    return particles


def _row(p):
    return (
        f"{p.label},{p.centroid_x:.6f},{p.centroid_y:.6f},{p.area},"
        f"{p.major_axis:.6f},{p.minor_axis:.6f},{p.perimeter},"
        f"{p.mean_intensity:.6f},{p.orientation:.6f},{p.iteration}"
    )


def format_csv(particles):
    """Particle table as CSV text (rows sorted by label)."""
    lines = [CSV_HEADER]
    lines.extend(_row(p) for p in sorted(particles, key=lambda p: p.label))
    return "\n".join(lines) + "\n"


def to_csv(particles, path):
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(particles))


def read_csv(path):
    """Parse a particle CSV written by :func:`to_csv`.

    The bounding box is not stored in the file and comes back as
    ``(0, 0, 0, 0)``. Malformed rows raise ValueError naming the line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise ValueError(f"{path}:1: expected header {CSV_HEADER!r}")
        particles = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 10:
                raise ValueError(f"{path}:{lineno}: expected 10 fields, got {len(row)}")
            try:
                particles.append(
                    Particle(
                        label=int(row[0]),
                        centroid_x=float(row[1]),
                        centroid_y=float(row[2]),
                        area=int(row[3]),
                        major_axis=float(row[4]),
                        minor_axis=float(row[5]),
                        perimeter=int(row[6]),
                        mean_intensity=float(row[7]),
                        orientation=float(row[8]),
                        iteration=int(row[9]),
                        bbox=(0, 0, 0, 0),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return particles
