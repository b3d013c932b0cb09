"""Binary erosion and dilation with flat structuring elements.

Pixels outside the frame are treated as background by both operators, so
foreground touching the border erodes and nothing grows in from outside.
"""

from dataclasses import dataclass

import numpy as np

from .raster import as_mask

__all__ = [
    "StructuringElement",
    "square3",
    "cross3",
    "get_se",
    "erode",
    "dilate",
    "open",
    "close",
]


@dataclass(frozen=True)
class StructuringElement:
    """Set of ``(dx, dy)`` offsets; dx moves along columns, dy along rows."""

    offsets: frozenset
    name: str = "custom"

    def __post_init__(self):
        offsets = frozenset((int(dx), int(dy)) for dx, dy in self.offsets)
        if (0, 0) not in offsets:
            raise ValueError("structuring element must contain the origin")
        object.__setattr__(self, "offsets", offsets)

    @property
    def symmetric(self):
        return all((-dx, -dy) in self.offsets for dx, dy in self.offsets)

    @property
    def radius(self):
        return max(max(abs(dx), abs(dy)) for dx, dy in self.offsets)

    def reflected(self):
        return StructuringElement(
            frozenset((-dx, -dy) for dx, dy in self.offsets), self.name + "_reflected"
        )

    @classmethod
    def from_array(cls, footprint, name="custom"):
        """Build from an odd-sized 2-D footprint centred on the origin."""
        fp = np.asarray(footprint) != 0
        h, w = fp.shape
        if h % 2 == 0 or w % 2 == 0:
            raise ValueError("footprint dimensions must be odd")
        ys, xs = np.nonzero(fp)
        return cls(frozenset(zip(xs - w // 2, ys - h // 2)), name)


def square3():
    return StructuringElement(
        frozenset((dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)), "square3"
    )


def cross3():
    return StructuringElement(
        frozenset([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]), "cross3"
    )


_NAMED = {"square3": square3, "cross3": cross3}


def get_se(se):
    """Resolve a name such as ``"square3"`` to a StructuringElement."""
    if isinstance(se, StructuringElement):
        return se
    try:
        return _NAMED[se]()
    except KeyError:
        raise ValueError(
            f"unknown structuring element {se!r}; expected one of {sorted(_NAMED)}"
        ) from None


def _shifted(mask, dx, dy):
    # out[y, x] = mask[y + dy, x + dx], zero outside the frame.
    h, w = mask.shape
    out = np.zeros_like(mask)
    if abs(dx) >= w or abs(dy) >= h:
        return out
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    ys_src = slice(max(0, dy), min(h, h + dy))
    xs_src = slice(max(0, dx), min(w, w + dx))
    out[ys, xs] = mask[ys_src, xs_src]
    return out


def _check_iterations(iterations):
    if int(iterations) != iterations or iterations < 1:
        raise ValueError(f"iterations must be a positive integer, got {iterations!r}")


def erode(mask, se=None, iterations=1):
    """Keep p iff ``p + (dx, dy)`` is in-frame foreground for every offset."""
    _check_iterations(iterations)
    se = get_se(se or "square3")
    out = as_mask(mask).astype(bool)
    for _ in range(iterations):
        acc = np.ones_like(out)
        for dx, dy in se.offsets:
            acc &= _shifted(out, dx, dy)
        out = acc
    return out.astype(np.uint8)


def dilate(mask, se=None, iterations=1):
    """Set p iff ``p - (dx, dy)`` is in-frame foreground for some offset."""
    _check_iterations(iterations)
    se = get_se(se or "square3")
    out = as_mask(mask).astype(bool)
    for _ in range(iterations):
        acc = np.zeros_like(out)
        for dx, dy in se.offsets:
            acc |= _shifted(out, -dx, -dy)
        out = acc
    return out.astype(np.uint8)


def open(mask, se=None, iterations=1):
    """Erode then dilate by the same number of iterations."""
    return dilate(erode(mask, se, iterations), se, iterations)


def close(mask, se=None, iterations=1):
    """Dilate then erode by the same number of iterations.

    The mask is padded with background while processing so that growth
    clipped by the frame cannot erode original foreground; the result is
    therefore always a superset of `mask`.
    """
    se = get_se(se or "square3")
    m = as_mask(mask)
    pad = se.radius * iterations
    padded = np.pad(m, pad)
    out = erode(dilate(padded, se, iterations), se, iterations)
    return out[pad:pad + m.shape[0], pad:pad + m.shape[1]]
