"""
Automatic thresholding
======================

A micrograph of bright particles on a dark substrate has a two-humped
intensity histogram. Otsu's method picks the cut that best separates the
humps, with no hand-tuned constant.
"""

import numpy as np

from nanofind import SynthConfig, apply_threshold, generate, histogram, otsu

# A small synthetic scene: 12 bright disks on a background of 30.
img, truth = generate(SynthConfig(width=160, height=160, n_bright=12, n_faint=0, seed=3))
hist = histogram(img)

# A coarse text histogram, 16 intensities per bar.
coarse = hist.reshape(16, 16).sum(axis=1)
for k, count in enumerate(coarse):
    bar = "#" * int(60 * np.log1p(count) / np.log1p(coarse.max()))
    print(f"{16 * k:3d}-{16 * k + 15:3d} {bar}")

res = otsu(hist)
print(f"\nOtsu threshold t = {res.t} (between-class variance {res.between_class_variance:.1f})")

# Foreground is every pixel strictly brighter than t.
mask = apply_threshold(img, res.t)
print(f"foreground pixels: {mask.sum()} of {mask.size}")
yy, xx = np.indices(img.shape)
disk_px = sum(int(((xx - p.cx) ** 2 + (yy - p.cy) ** 2 <= p.radius ** 2).sum()) for p in truth)
print(f"true disk pixels:  {disk_px}")

# A constant image has nothing to separate: t is that value, foreground empty.
flat = np.full((8, 8), 128, dtype=np.uint8)
print("constant image ->", otsu(histogram(flat)))
