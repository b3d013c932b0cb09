"""Recursive particle detection.

Each pass thresholds the working image, cleans the mask by erosion and
dilation, labels and measures the surviving components, then paints the
detected regions with the mean intensity of the working image so that the
next, lower threshold can pick up fainter particles.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import morphology
from .labeling import check_connectivity, filter_small, label_components
from .raster import as_gray, box3, histogram, median3, list_pgm_files, load_pgm
from .regionprops import measure, to_csv
from .threshold import apply_threshold, fixed, otsu
from .watershed import distance_transform, find_markers, watershed_segment

__all__ = [
    "DetectConfig",
    "DetectResult",
    "BatchResult",
    "detect",
    "detect_batch",
    "mask_out",
    "SUMMARY_HEADER",
]

log = logging.getLogger(__name__)

SUMMARY_HEADER = "file,particles,iterations,thresholds"

_PREFILTERS = {"none": lambda img: img, "box3": box3, "median3": median3}


@dataclass
class DetectConfig:
    max_iterations: int = 3
    erode_schedule: tuple = (2, 1, 1)
    dilate_schedule: tuple = None  # None -> same as erode_schedule
    connectivity: int = 8
    min_area: int = 4
    se: str = "square3"
    threshold_mode: str = "otsu"  # "otsu" (per iteration) or "fixed"
    fixed_thresholds: tuple = ()
    threshold_floor: int = 8
    separation: str = "morphological"  # or "watershed"
    min_distance: float = 3.0
    marker_prominence: float = 1.0
    drop_border: bool = False
    threshold_prefilter: str = "median3"  # filter seen by Otsu only: median3|box3|none
    mask_margin: int = 1  # extra dilations of a detection before masking it out

    def __post_init__(self):
        self.erode_schedule = tuple(int(v) for v in self.erode_schedule)
        if self.dilate_schedule is None:
            self.dilate_schedule = self.erode_schedule
        self.dilate_schedule = tuple(int(v) for v in self.dilate_schedule)
        self.fixed_thresholds = tuple(int(v) for v in self.fixed_thresholds)
        self.validate()

    def validate(self):
        """Raise ValueError naming the offending key."""

        def bad(key, msg):
            raise ValueError(f"invalid config {key}: {msg}")

        if self.max_iterations < 1:
            bad("max_iterations", "must be >= 1")
        for key in ("erode_schedule", "dilate_schedule"):
            sched = getattr(self, key)
            if len(sched) < self.max_iterations:
                bad(key, f"has {len(sched)} entries, need {self.max_iterations}")
            if any(v < 0 for v in sched):
                bad(key, "counts must be >= 0")
        if any(a < b for a, b in zip(self.erode_schedule, self.erode_schedule[1:])):
            bad("erode_schedule", "must be non-increasing")
        try:
            self.connectivity = check_connectivity(self.connectivity)
        except ValueError as exc:
            bad("connectivity", str(exc))
        if self.min_area < 0:
            bad("min_area", "must be >= 0")
        try:
            morphology.get_se(self.se)
        except ValueError as exc:
            bad("se", str(exc))
        if self.threshold_mode not in ("otsu", "fixed"):
            bad("threshold_mode", "must be 'otsu' or 'fixed'")
        if self.threshold_mode == "fixed":
            if len(self.fixed_thresholds) < self.max_iterations:
                bad("fixed_thresholds", f"need {self.max_iterations} values")
            if any(not 0 <= t <= 255 for t in self.fixed_thresholds):
                bad("fixed_thresholds", "values must lie in [0, 255]")
        if not 0 <= self.threshold_floor <= 255:
            bad("threshold_floor", "must lie in [0, 255]")
        if self.separation not in ("morphological", "watershed"):
            bad("separation", "must be 'morphological' or 'watershed'")
        if self.min_distance < 1:
            bad("min_distance", "must be >= 1")
        if self.marker_prominence < 0:
            bad("marker_prominence", "must be >= 0")
        if self.threshold_prefilter not in _PREFILTERS:
            bad("threshold_prefilter", f"must be one of {sorted(_PREFILTERS)}")
        if self.mask_margin < 0:
            bad("mask_margin", "must be >= 0")

    _LISTS = ("erode_schedule", "dilate_schedule", "fixed_thresholds")
    _FLOATS = ("min_distance", "marker_prominence")
    _STRINGS = ("se", "threshold_mode", "separation", "connectivity",
                "threshold_prefilter")

    @classmethod
    def from_mapping(cls, mapping, base=None):
        """Apply string-valued overrides (e.g. from a key=value file) to `base`."""
        known = {f.name for f in fields(cls)}
        values = asdict(base) if base is not None else {}
        for key, raw in mapping.items():
            if key not in known:
                raise ValueError(f"invalid config {key}: unknown key")
            raw = str(raw).strip()
            try:
                if key in cls._LISTS:
                    values[key] = tuple(int(v) for v in raw.split(",") if v.strip())
                elif key in cls._FLOATS:
                    values[key] = float(raw)
                elif key in cls._STRINGS:
                    values[key] = raw
                elif key == "drop_border":
                    if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                        raise ValueError(raw)
                    values[key] = raw.lower() in ("true", "1", "yes")
                else:
                    values[key] = int(raw)
            except ValueError:
                raise ValueError(f"invalid config {key}: cannot parse {raw!r}") from None
        if "erode_schedule" in mapping and "dilate_schedule" not in mapping:
            values["dilate_schedule"] = None
        return cls(**values)

    def to_mapping(self):
        """Flat key -> string form, the inverse of :meth:`from_mapping`."""
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, tuple):
                out[key] = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                out[key] = "true" if value else "false"
            else:
                out[key] = str(value)
        return out


@dataclass
class DetectResult:
    particles: list
    per_iteration_counts: list
    thresholds_used: list
    final_masked_image: np.ndarray
    supports: list = field(default_factory=list, repr=False)  # label map per pass

    @property
    def iterations(self):
        return len(self.thresholds_used)


def mask_out(img, labels, fill):
    """Copy of `img` with every labelled pixel set to `fill`.

    `fill` is rounded half-up and clamped to [0, 255].
    """
    img = as_gray(img)
    labels = np.asarray(labels)
    if labels.shape != img.shape:
        raise ValueError(
            f"label map shape {labels.shape} does not match image shape {img.shape}"
        )
    value = int(np.clip(np.floor(float(fill) + 0.5), 0, 255))
    out = img.copy()
    out[labels != 0] = value
    return out


def _working_mean(img):
    # Integer half-up rounding of the mean.
    total = int(img.sum(dtype=np.int64))
    n = img.size
    return (2 * total + n) // (2 * n)


def _segment(mask, cfg):
    if cfg.separation == "watershed":
        dm = distance_transform(mask)
        markers, _ = find_markers(dm, cfg.min_distance, cfg.marker_prominence)
        labels, _ = watershed_segment(dm, markers, mask)
        # Watershed numbering follows marker order; restore raster order.
        firsts = {}
        for idx, lab in zip(*np.unique(labels.ravel(), return_index=True)[::-1]):
            if lab:
                firsts[int(lab)] = int(idx)
        order = sorted(firsts, key=firsts.get)
        lut = np.zeros(int(labels.max(initial=0)) + 1, dtype=np.int32)
        for new, old in enumerate(order, start=1):
            lut[old] = new
        return lut[labels], len(order)
    return label_components(mask, cfg.connectivity)


def _drop_border(labels, count):
    edge = np.unique(np.concatenate(
        [labels[0], labels[-1], labels[:, 0], labels[:, -1]]
    ))
    keep = np.ones(count + 1, dtype=bool)
    keep[0] = False
    keep[edge] = False
    lut = np.zeros(count + 1, dtype=np.int32)
    lut[keep] = np.arange(1, int(keep.sum()) + 1, dtype=np.int32)
    return lut[labels], int(keep.sum())


def detect(img, cfg=None):
    """Run the recursive detection loop on a gray image.

    Pass i thresholds the working image at ``cfg.fixed_thresholds[i]`` or
    at the Otsu level of its ``threshold_prefilter``-ed copy (the filter
    keeps pixel noise from swamping small particle populations in the
    histogram; the threshold itself is applied to the unfiltered image),
    erodes and dilates per the schedules, labels, drops components below
    ``min_area`` and measures the rest against the original image. Detected
    regions, grown by ``mask_margin`` dilations, are then painted with the
    working image's mean and excluded from later passes.

    From the second pass on, the loop stops before thresholding when the
    new threshold is not strictly below the previous one, is at or below
    ``threshold_floor``, or does not exceed the fill level (the masked
    regions would otherwise light up again). It also stops after a pass
    that finds nothing.
    """
    cfg = cfg or DetectConfig()
    original = as_gray(img)
    se = morphology.get_se(cfg.se)
    working = original.copy()
    claimed = np.zeros(original.shape, dtype=bool)
    particles, counts, thresholds, supports = [], [], [], []
    prev_t = None
    fill = None

    for i in range(cfg.max_iterations):
        if cfg.threshold_mode == "fixed":
            t = fixed(cfg.fixed_thresholds[i]).t
        else:
            t = otsu(histogram(_PREFILTERS[cfg.threshold_prefilter](working))).t
        if prev_t is not None:
            if t >= prev_t or t <= cfg.threshold_floor or t <= fill:
                log.debug("pass %d: stop at threshold %d (prev %d, fill %d)",
                          i + 1, t, prev_t, fill)
                break

        mask = apply_threshold(working, t)
        if cfg.erode_schedule[i]:
            mask = morphology.erode(mask, se, cfg.erode_schedule[i])
        if cfg.dilate_schedule[i]:
            mask = morphology.dilate(mask, se, cfg.dilate_schedule[i])
        mask[claimed] = 0

        labels, count = _segment(mask, cfg)
        labels, count = filter_small(labels, cfg.min_area, count)
        if cfg.drop_border and count:
            labels, count = _drop_border(labels, count)

        found = measure(labels, original, iteration=i + 1, count=count)
        thresholds.append(t)
        counts.append(len(found))
        supports.append(labels)
        particles.extend(found)
        log.debug("pass %d: threshold %d, %d particles", i + 1, t, len(found))
        if not found:
            break

        footprint = labels != 0
        if cfg.mask_margin:
            footprint = morphology.dilate(footprint, se, cfg.mask_margin).astype(bool)
        claimed |= footprint
        fill = _working_mean(working)
        working = mask_out(working, footprint, fill)
        prev_t = t

    # Number particles 1..N across passes, in pass order then raster order.
    renumbered = [replace(p, label=k) for k, p in enumerate(particles, start=1)]
    return DetectResult(renumbered, counts, thresholds, working, supports)


def _safe_detect(path, cfg):
    try:
        img = load_pgm(path)
    except (OSError, ValueError) as exc:
        return path, None, str(exc)
    return path, detect(img, cfg), None


@dataclass
class BatchResult:
    results: dict  # path -> DetectResult, in filename order
    skipped: dict  # path -> error message
    summary_rows: list

    @property
    def summary_csv(self):
        return SUMMARY_HEADER + "\n" + "".join(r + "\n" for r in self.summary_rows)


def particles_filename(path):
    stem = os.path.splitext(os.path.basename(path))[0]
    return f"{stem}.particles.csv"


def detect_batch(directory, cfg=None, out_dir=None, workers=1, files=None):
    """Detect particles in every ``*.pgm`` of `directory`, in filename order.

    Unreadable images are logged and skipped. When `out_dir` is given, a
    ``<stem>.particles.csv`` per image and ``summary.csv`` are written there.
    """
    cfg = cfg or DetectConfig()
    if files is None:
        if not os.path.isdir(directory):
            raise FileNotFoundError(f"not a directory: {directory}")
        files = list_pgm_files(directory)

    if workers > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_safe_detect, files, [cfg] * len(files)))
    else:
        outcomes = [_safe_detect(f, cfg) for f in files]

    results, skipped, rows = {}, {}, []
    for path, res, err in outcomes:
        if res is None:
            log.warning("skipping %s: %s", path, err)
            skipped[path] = err
            continue
        results[path] = res
        rows.append(
            f"{os.path.basename(path)},{len(res.particles)},{res.iterations},"
            + ";".join(str(t) for t in res.thresholds_used)
        )
    batch = BatchResult(results, skipped, rows)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for path, res in results.items():
            to_csv(res.particles, os.path.join(out_dir, particles_filename(path)))
        with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
            fh.write(batch.summary_csv)
    return batch
