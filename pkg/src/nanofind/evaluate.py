"""Detection accuracy against point labels, and intensity/size statistics."""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GroundTruth",
    "MatchReport",
    "ZeroVarianceError",
    "match",
    "pearson",
    "intensity_size_report",
    "load_ground_truth",
    "write_ground_truth",
    "format_report",
    "write_report",
]


class ZeroVarianceError(ValueError):
    """Correlation requested on constant data."""


@dataclass
class GroundTruth:
    points: list = field(default_factory=list)  # [(x, y), ...]
    source: str = ""

    def __len__(self):
        return len(self.points)


@dataclass
class MatchReport:
    pairs: list  # [(gt_index, detection_index, distance), ...] in match order
    unmatched_gt: list
    unmatched_detections: list
    recall: float
    precision: float
    radius: float
    n_gt: int = 0
    n_detections: int = 0

    @property
    def vacuous(self):
        return self.n_gt == 0 or self.n_detections == 0


def _coords(items):
    out = []
    for it in items:
        if hasattr(it, "centroid_x"):
            out.append((float(it.centroid_x), float(it.centroid_y)))
        else:
            x, y = it
            out.append((float(x), float(y)))
    return out


def match(gt, detections, radius=10.0):
    """Greedy closest-first one-to-one matching within `radius`.

    `gt` is a GroundTruth or a sequence of (x, y); `detections` holds
    Particles or (x, y) pairs. Candidate pairs are taken in order of
    increasing distance, ties by (gt_index, detection_index).
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    g = np.array(_coords(gt.points if isinstance(gt, GroundTruth) else gt),
                 dtype=np.float64).reshape(-1, 2)
    d = np.array(_coords(detections), dtype=np.float64).reshape(-1, 2)

    pairs = []
    if len(g) and len(d):
        d2 = ((g[:, None, :] - d[None, :, :]) ** 2).sum(axis=2)
        gi, di = np.nonzero(d2 <= radius * radius)
        order = np.lexsort((di, gi, d2[gi, di]))
        used_g, used_d = set(), set()
        for k in order:
            a, b = int(gi[k]), int(di[k])
            if a in used_g or b in used_d:
                continue
            used_g.add(a)
            used_d.add(b)
            pairs.append((a, b, math.sqrt(d2[a, b])))

    matched_g = {p[0] for p in pairs}
    matched_d = {p[1] for p in pairs}
    ng, nd = len(g), len(d)
    return MatchReport(
        pairs=pairs,
        unmatched_gt=[i for i in range(ng) if i not in matched_g],
        unmatched_detections=[i for i in range(nd) if i not in matched_d],
        recall=len(pairs) / ng if ng else 1.0,
        precision=len(pairs) / nd if nd else 1.0,
        radius=float(radius),
        n_gt=ng,
        n_detections=nd,
    )


def pearson(xs, ys):
    """Pearson product-moment correlation.

    If exactly one input is constant there is no linear association and 0.0
    is returned; both constant raises ZeroVarianceError.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-D sequences of equal length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    x_const = bool(np.all(x == x[0]))
    y_const = bool(np.all(y == y[0]))
    if x_const and y_const:
        raise ZeroVarianceError("both inputs have zero variance")
    if x_const or y_const:
        return 0.0
    dx = x - math.fsum(x) / len(x)
    dy = y - math.fsum(y) / len(y)
    # Scale deviations to unit max so squares neither underflow nor overflow.
    dx = dx / np.abs(dx).max()
    dy = dy / np.abs(dy).max()
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    r = math.fsum(dx * dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def intensity_size_report(particles):
    """Correlation of mean intensity with area.

    Returns ``(r, csv_text)`` where the CSV has columns
    ``mean_intensity,area``. Raises ZeroVarianceError if either column is
    constant.
    """
    if len(particles) < 2:
        raise ValueError(f"need at least 2 particles, got {len(particles)}")
    intensity = [p.mean_intensity for p in particles]
    area = [p.area for p in particles]
    if len(set(intensity)) == 1:
        raise ZeroVarianceError("mean_intensity is constant across particles")
    if len(set(area)) == 1:
        raise ZeroVarianceError("area is constant across particles")
    r = pearson(intensity, area)
    lines = ["mean_intensity,area"]
    lines.extend(f"{i:.6f},{a}" for i, a in zip(intensity, area))
    return r, "\n".join(lines) + "\n"


def load_ground_truth(path):
    """Read an ``x,y`` CSV of point labels."""
    with open(path, newline="") as fh:
        text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
        raise ValueError(f"{path}:1: expected header 'x,y'")
    points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric coordinate {row!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"{path}:{lineno}: non-finite coordinate")
        points.append((x, y))
    return GroundTruth(points, source=str(path))


def write_ground_truth(gt, path):
    points = gt.points if isinstance(gt, GroundTruth) else gt
    with open(path, "w", newline="") as fh:
        fh.write("x,y\n")
        for x, y in points:
            fh.write(f"{x!r},{y!r}\n")


def format_report(report):
    """Human-readable multi-line summary of a MatchReport."""
    lines = [
        f"recall={report.recall:.6f}",
        f"precision={report.precision:.6f}",
        f"radius={report.radius:.6f}",
        f"ground_truth={report.n_gt} detections={report.n_detections} "
        f"matched={len(report.pairs)}",
        f"unmatched_gt={len(report.unmatched_gt)} "
        f"unmatched_detections={len(report.unmatched_detections)}",
    ]
    if report.n_gt == 0:
        lines.append("warning: no ground-truth points; recall is vacuous (0/0 -> 1)")
    if report.n_detections == 0:
        lines.append("warning: no detections; precision is vacuous (0/0 -> 1)")
    return "\n".join(lines) + "\n"


def write_report(report, path):
    """Write the match table as CSV: kind,gt_index,detection_index,distance."""
    with open(path, "w", newline="") as fh:
        fh.write("kind,gt_index,detection_index,distance\n")
        for g, d, dist in report.pairs:
            fh.write(f"pair,{g},{d},{dist:.6f}\n")
        for g in report.unmatched_gt:
            fh.write(f"unmatched_gt,{g},,\n")
        for d in report.unmatched_detections:
            fh.write(f"unmatched_detection,,{d},\n")
