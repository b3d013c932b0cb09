"""Synthetic SEM-like test images with exact ground truth.

Random numbers come from SplitMix64 so images can be reproduced from the
seed in any language:

* ``state_i = seed + i * 0x9E3779B97F4A7C15 (mod 2**64)`` for i = 1, 2, ...,
  each output mixed with the standard SplitMix64 finaliser;
* ``uniform = (u64 >> 11) * 2**-53``;
* ``integer in [lo, hi] = lo + u64 % (hi - lo + 1)``;
* normals by Box-Muller on pairs ``(u1, u2)``:
  ``sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)``.

Draw order: for each disk (bright ones first) radius, cx, cy, then level,
repeated per rejected attempt as needed; then ``ceil(w*h/2)`` normal pairs
for the noise field in row-major order.
"""

import json
import os
from dataclasses import asdict, dataclass, fields

import numpy as np

from .evaluate import GroundTruth, write_ground_truth
from .raster import box3, write_pgm

__all__ = [
    "SplitMix64",
    "SynthConfig",
    "SynthParticle",
    "PlacementError",
    "generate",
    "truth_to_ground_truth",
    "write_synth",
]

_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
MAX_ATTEMPTS = 10_000


class PlacementError(RuntimeError):
    def __init__(self, placed, requested):
        super().__init__(
            f"could only place {placed} of {requested} disks after "
            f"{MAX_ATTEMPTS} attempts"
        )
        self.placed = placed
        self.requested = requested


class SplitMix64:
    """Counter-based SplitMix64 stream."""

    def __init__(self, seed):
        self.seed = int(seed) & _MASK
        self.counter = 0

    @staticmethod
    def _mix(z):
        z = ((z ^ (z >> 30)) * _M1) & _MASK
        z = ((z ^ (z >> 27)) * _M2) & _MASK
        return z ^ (z >> 31)

    def next_u64(self):
        self.counter += 1
        return self._mix((self.seed + self.counter * _GAMMA) & _MASK)

    def uniform(self):
        return (self.next_u64() >> 11) * 2.0**-53

    def integers(self, lo, hi):
        """Integer in the closed interval [lo, hi]."""
        return lo + self.next_u64() % (hi - lo + 1)

    def u64_block(self, n):
        i = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        self.counter += n
        z = np.uint64(self.seed) + i * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))

    def normals(self, n):
        npairs = (n + 1) // 2
        u = (self.u64_block(2 * npairs) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        u1, u2 = u[0::2], u[1::2]
        rad = np.sqrt(-2.0 * np.log1p(-u1))
        z = np.empty(2 * npairs)
        z[0::2] = rad * np.cos(2.0 * np.pi * u2)
        z[1::2] = rad * np.sin(2.0 * np.pi * u2)
        return z[:n]


@dataclass
class SynthConfig:
    width: int = 512
    height: int = 512
    background_level: int = 30
    bright_range: tuple = (117, 186)
    faint_range: tuple = (70, 110)
    n_bright: int = 30
    n_faint: int = 15
    radius_range: tuple = (3, 8)
    min_separation: float = None  # None -> 2 * max radius + 2
    noise_sigma: float = 4.0
    blur: str = "none"
    seed: int = 0

    def __post_init__(self):
        self.bright_range = tuple(int(v) for v in self.bright_range)
        self.faint_range = tuple(int(v) for v in self.faint_range)
        self.radius_range = tuple(int(v) for v in self.radius_range)
        if self.min_separation is None:
            self.min_separation = 2 * self.radius_range[1] + 2
        self.validate()

    def validate(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        for name in ("bright_range", "faint_range", "radius_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: lower bound exceeds upper bound")
        for name in ("bright_range", "faint_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi > 255:
                raise ValueError(f"{name} must lie within [0, 255]")
        if not 0 <= self.background_level <= 255:
            raise ValueError("background_level must lie within [0, 255]")
        if not self.bright_range[0] > self.faint_range[1] > self.background_level:
            raise ValueError(
                "need bright_range min > faint_range max > background_level"
            )
        if self.radius_range[0] < 0:
            raise ValueError("radius_range must be non-negative")
        if self.n_bright < 0 or self.n_faint < 0:
            raise ValueError("particle counts must be non-negative")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.min_separation < 0:
            raise ValueError("min_separation must be non-negative")
        if self.blur not in ("none", "box3"):
            raise ValueError(f"blur must be 'none' or 'box3', got {self.blur!r}")

    @classmethod
    def from_mapping(cls, mapping):
        """Build from string values as read from a key=value file."""
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, raw in mapping.items():
            if key not in known:
                raise ValueError(f"unknown synth config key {key!r}")
            try:
                if key.endswith("_range"):
                    lo, hi = (int(v) for v in str(raw).split(","))
                    kwargs[key] = (lo, hi)
                elif key in ("noise_sigma", "min_separation"):
                    kwargs[key] = float(raw)
                elif key == "blur":
                    kwargs[key] = str(raw).strip()
                else:
                    kwargs[key] = int(raw)
            except ValueError:
                raise ValueError(f"invalid value for {key!r}: {raw!r}") from None
        return cls(**kwargs)

    def to_mapping(self):
        out = {}
        for key, value in asdict(self).items():
            out[key] = ",".join(str(v) for v in value) if isinstance(value, tuple) else value
        return out


@dataclass(frozen=True)
class SynthParticle:
    cx: float
    cy: float
    radius: int
    population: str  # "bright" or "faint"
    level: int


def _place(cfg, rng):
    placed = []
    requested = cfg.n_bright + cfg.n_faint
    rmin, rmax = cfg.radius_range
    w, h = cfg.width, cfg.height
    jobs = [("bright", cfg.bright_range)] * cfg.n_bright + [("faint", cfg.faint_range)] * cfg.n_faint
    for population, (lo, hi) in jobs:
        for _ in range(MAX_ATTEMPTS):
            r = rng.integers(rmin, rmax)
            if 2 * r + 1 > w or 2 * r + 1 > h:
                continue
            cx = rng.integers(r, w - 1 - r)
            cy = rng.integers(r, h - 1 - r)
            level = rng.integers(lo, hi)
            ok = True
            if cfg.min_separation > 0:
                for p in placed:
                    need = max(cfg.min_separation, r + p.radius + 2)
                    if (cx - p.cx) ** 2 + (cy - p.cy) ** 2 < need * need:
                        ok = False
                        break
            if ok:
                placed.append(SynthParticle(float(cx), float(cy), r, population, level))
                break
        else:
            raise PlacementError(len(placed), requested)
    return placed


def generate(cfg):
    """Render an image and its ground truth; returns ``(image, particles)``."""
    cfg.validate()
    rng = SplitMix64(cfg.seed)
    truth = _place(cfg, rng)
    h, w = cfg.height, cfg.width
    canvas = np.full((h, w), float(cfg.background_level))
    yy, xx = np.indices((h, w))
    for p in truth:
        r = p.radius
        y0, y1 = int(p.cy) - r, int(p.cy) + r + 1
        x0, x1 = int(p.cx) - r, int(p.cx) + r + 1
        inside = (xx[y0:y1, x0:x1] - p.cx) ** 2 + (yy[y0:y1, x0:x1] - p.cy) ** 2 <= r * r
        canvas[y0:y1, x0:x1][inside] = p.level
    if cfg.noise_sigma > 0:
        canvas += cfg.noise_sigma * rng.normals(h * w).reshape(h, w)
    img = np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8)
    if cfg.blur == "box3":
        img = box3(img)
    return img, truth


def truth_to_ground_truth(truth):
    """Disk centres as point labels; populations go in the source tag."""
    pops = ",".join(p.population for p in truth)
    return GroundTruth([(p.cx, p.cy) for p in truth], source=f"synthgen:{pops}")


def write_synth(cfg, out_dir, stem="synth"):
    """Generate and write ``<stem>.pgm``, ``<stem>.gt.csv``, ``<stem>.manifest.json``."""
    img, truth = generate(cfg)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "image": os.path.join(out_dir, f"{stem}.pgm"),
        "ground_truth": os.path.join(out_dir, f"{stem}.gt.csv"),
        "manifest": os.path.join(out_dir, f"{stem}.manifest.json"),
    }
    write_pgm(img, paths["image"])
    write_ground_truth(truth_to_ground_truth(truth), paths["ground_truth"])
    manifest = {
        "generator": "nanofind.synthgen",
        "rng": "splitmix64",
        "config": cfg.to_mapping(),
        "particles": [asdict(p) for p in truth],
    }
    with open(paths["manifest"], "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
