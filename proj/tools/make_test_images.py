# Copyright 2026 The fheadapt Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the PGM images under tests/data."""

import pathlib
import sys

import numpy as np
from skimage import data, transform

OUT = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")


def save(name, img, maxval=255):
    OUT.mkdir(parents=True, exist_ok=True)
    v = np.clip(np.rint(img * maxval), 0, maxval).astype(">u2" if maxval > 255 else np.uint8)
    h, w = img.shape
    (OUT / name).write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode() + v.tobytes())


def blob(n, cx, cy, sx, sy, amp):
    y, x = np.mgrid[0:n, 0:n].astype(float)
    return amp * np.exp(-((x - cx) ** 2 / (2 * sx**2) + (y - cy) ** 2 / (2 * sy**2)))


n = 40
save("blobs_bright.pgm", 0.2 + blob(n, 18.3, 21.7, 2.1, 2.9, 0.6))
save("blobs_mixed.pgm", 0.5 + blob(n, 15.4, 17.2, 2.6, 1.9, 0.4) - blob(n, 24.8, 23.1, 1.8, 2.4, 0.35))
x = np.linspace(0.0, 1.0, n)
save("ramp_h.pgm", np.tile(0.1 + 0.7 * x, (n, 1)) + blob(n, 20.2, 19.6, 2.2, 2.7, 0.3))
save("ramp_v.pgm", np.tile((0.1 + 0.6 * x)[:, None], (1, n)) - blob(n, 19.1, 20.8, 2.5, 2.0, 0.3) + 0.3)
imp = np.full((n, n), 0.25)
imp[19, 21] = 1.0
save("impulse.pgm", imp)
cam = data.camera()[96:352, 160:416] / 255.0
save("camera64.pgm", transform.resize(cam, (64, 64), anti_aliasing=True))
