"""Raster containers and PGM file I/O.

Images are plain 2-D numpy arrays indexed ``[row, col]``, i.e. ``[y, x]``
with the origin at the top-left pixel:

* gray images are ``uint8`` arrays,
* binary masks are ``uint8`` arrays holding only 0 and 1,
* label maps are ``int32`` arrays with 0 as background.
"""

import os

import numpy as np

__all__ = [
    "PGMError",
    "as_gray",
    "as_mask",
    "load_pgm",
    "write_pgm",
    "histogram",
    "mask_to_image",
    "box3",
    "median3",
]


class PGMError(ValueError):
    """Raised for malformed or unsupported PGM content."""


def as_gray(img):
    """Validate and return `img` as a 2-D uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_mask(mask):
    """Return `mask` as a 2-D uint8 array of zeros and ones."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
    return (arr != 0).astype(np.uint8)


def _tokens(data, count, pos):
    # Pulls `count` whitespace-separated header tokens, skipping '#' comments.
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PGMError("truncated header")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        out.append(data[start:pos])
    return out, pos


def load_pgm(path):
    """Read a binary (P5) or ASCII (P2) PGM file with maxval <= 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise PGMError(f"{path}: not a PGM file (magic {magic!r})")
    fields, pos = _tokens(data, 3, 2)
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise PGMError(f"{path}: malformed header {fields!r}") from None
    if width <= 0 or height <= 0:
        raise PGMError(f"{path}: invalid dimensions {width}x{height}")
    if maxval > 255:
        raise PGMError(
            f"{path}: maxval {maxval} > 255; only 8-bit images are supported"
        )
    if maxval <= 0:
        raise PGMError(f"{path}: invalid maxval {maxval}")
    npix = width * height

    if magic == b"P5":
        # Exactly one whitespace byte separates the header from the raster.
        pos += 1
        raw = data[pos:pos + npix]
        if len(raw) < npix:
            raise PGMError(f"{path}: truncated data ({len(raw)} of {npix} bytes)")
        pixels = np.frombuffer(raw, dtype=np.uint8)
    else:
        body = data[pos:].split()
        if len(body) < npix:
            raise PGMError(f"{path}: truncated data ({len(body)} of {npix} values)")
        try:
            pixels = np.array([int(v) for v in body[:npix]], dtype=np.int64)
        except ValueError:
            raise PGMError(f"{path}: non-integer pixel value") from None
        if pixels.min() < 0:
            raise PGMError(f"{path}: negative pixel value")

    if pixels.max(initial=0) > maxval:
        raise PGMError(f"{path}: pixel value exceeds maxval {maxval}")
    return pixels.astype(np.uint8).reshape(height, width)


def write_pgm(img, path):
    """Write `img` as binary P5 with header ``P5\\n<w> <h>\\n255\\n``."""
    img = as_gray(img)
    height, width = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def histogram(img):
    """256-bin intensity histogram as an int64 array; ``bins[v]`` counts value v."""
    img = as_gray(img)
    return np.bincount(img.ravel(), minlength=256).astype(np.int64)


def mask_to_image(mask):
    """Map a 0/1 mask to a 0/255 gray image."""
    return as_mask(mask) * np.uint8(255)


def box3(img):
    """3x3 mean filter with edge replication, rounded half-up to uint8."""
    img = as_gray(img)
    padded = np.pad(img.astype(np.int64), 1, mode="edge")
    h, w = img.shape
    acc = sum(padded[dy:dy + h, dx:dx + w] for dy in range(3) for dx in range(3))
    return ((acc + 4) // 9).astype(np.uint8)


def median3(img):
    """3x3 median filter with edge replication."""
    img = as_gray(img)
    padded = np.pad(img, 1, mode="edge")
    h, w = img.shape
    stack = np.stack([padded[dy:dy + h, dx:dx + w] for dy in range(3) for dx in range(3)])
    return np.partition(stack, 4, axis=0)[4]


def list_pgm_files(directory):
    """Sorted list of ``*.pgm`` paths directly inside `directory`."""
    names = sorted(n for n in os.listdir(directory) if n.lower().endswith(".pgm"))
    return [os.path.join(directory, n) for n in names]
