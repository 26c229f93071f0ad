#!/usr/bin/env python3
"""Independent numeric oracle for the frozen constants used by the C++ tests.

Evaluates the curved ground-surface projection directly with numpy, without
touching the C++ implementation. Run: python3 tests/oracles/derive_constants.py
"""
import math

import numpy as np


def world(i, j, l, lam, d_max):
    x = j - l / 2.0
    y = l / 2.0 - i
    z = (math.hypot(x, y) / d_max) ** 4 * lam
    return x, y, z


def main():
    l = 512
    d_max = (l / 2.0) * math.sqrt(2.0)
    x, y, z = world(256, 384, l, 3.0, d_max)
    print(f"world(256,384): x={x} y={y} z={z!r}")

    phi = math.atan2(0.0 - 1.5, 10.0)
    print(f"phi(10,0,0; H=1.5) = {phi!r}")
    v = (math.pi / 2 + phi) * 512 / math.pi
    print(f"v(10,0,0; h=512) = {v!r}")

    # Keep fraction of the elevation-margin heuristic, l=512, lambda=3, H=1.5, margin=0.05.
    ii, jj = np.meshgrid(np.arange(l, dtype=np.float64), np.arange(l, dtype=np.float64), indexing="ij")
    xs = jj - l / 2.0
    ys = l / 2.0 - ii
    r = np.hypot(xs, ys)
    zs = (r / d_max) ** 4 * 3.0
    elev = np.arctan2(zs - 1.5, r)
    elev[r == 0] = -math.pi / 2
    keep = elev < -0.05
    print(f"heuristic keep count = {int(keep.sum())} of {l * l}; fraction = {keep.mean()!r}")

    # PSNR of a uniform +16 offset on 8-bit data.
    print(f"psnr(+16) = {10 * math.log10(255.0 ** 2 / 256.0)!r}")


if __name__ == "__main__":
    main()
