"""
Erosion, dilation and opening
=============================

Thresholding leaves isolated noise pixels and thin bridges between
particles. Eroding first removes both; dilating by the same amount brings
the surviving particles back to roughly their original size.
"""

import numpy as np

from nanofind import label_components
from nanofind.morphology import cross3, dilate, erode, open, square3


def show(mask):
    for row in mask:
        print("".join("#" if v else "." for v in row))
    print()


# Two 5x5 blocks joined by a one-pixel bridge, plus a stray noise pixel.
m = np.zeros((9, 17), dtype=np.uint8)
m[2:7, 1:6] = 1
m[2:7, 10:15] = 1
m[4, 6:10] = 1
m[0, 16] = 1
print("thresholded mask:")
show(m)
print("components before:", label_components(m)[1])

opened = open(m, square3(), 1)
print("opened with a 3x3 square:")
show(opened)
print("components after:", label_components(opened)[1])

# The cross is gentler: it only looks at the four edge neighbours.
print("eroded with a cross:")
show(erode(m, cross3(), 1))

# Dilation is the dual of erosion once the frame is padded with background,
# compared on the original frame.
p = np.pad(m, 1)
dual = (1 - erode(1 - p, square3()))[1:-1, 1:-1]
assert np.array_equal(dual, dilate(p, square3())[1:-1, 1:-1])
print("erosion/dilation duality holds on the padded mask")
