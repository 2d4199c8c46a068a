#!/usr/bin/env python3
"""Regenerates the bundled test scenes from the scikit-image sample gallery.

Two families are produced, all stored as 16-bit binary PGM:

* Native-resolution scenes (camera, moon at 512x512; coins center-cropped to
  256x256): raw 8-bit samples mapped to the full 16-bit range. Loading these
  against a 64x64 scene grid exercises the loader's block-averaging path.

* 64x64 scenes (suffix "64"): the source is center-cropped square, resized to
  64x64 with anti-aliasing, and peak-normalised to 255. These carry
  pixel-level detail at the reconstruction resolution, which block-averaged
  large images cannot (averaging 8x8 blocks low-passes the ground truth so
  hard that plain bicubic upsampling already matches it closely). The
  textured trio brick64/grass64/text64 is what the acceptance study uses.

Deterministic: no randomness, fixed library data.
"""

import numpy as np
from skimage import data
from skimage.transform import resize


def write_pgm16(path, img):
    """img: float array scaled so 255 is full scale."""
    a = np.clip(np.round(img / 255.0 * 65535.0), 0, 65535).astype(np.uint16)
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n65535\n" % (a.shape[1], a.shape[0]))
        f.write(a.astype(">u2").tobytes())


def center_crop(img, side):
    h, w = img.shape
    r0, c0 = (h - side) // 2, (w - side) // 2
    return img[r0 : r0 + side, c0 : c0 + side]


def prep64(img, side=64):
    sq = center_crop(img.astype(float), min(img.shape))
    out = resize(sq, (side, side), anti_aliasing=True)
    return out * 255.0 / max(out.max(), 1e-9)


def main():
    write_pgm16("camera.pgm", data.camera().astype(float))
    write_pgm16("moon.pgm", data.moon().astype(float))
    write_pgm16("coins256.pgm", center_crop(data.coins().astype(float), 256))

    for name, img in [
        ("camera64", data.camera()),
        ("coins64", data.coins()),
        ("brick64", data.brick()),
        ("grass64", data.grass()),
        ("text64", data.text()),
        ("moon64", data.moon()),
    ]:
        write_pgm16(name + ".pgm", prep64(img))
        print(name + ".pgm written")


if __name__ == "__main__":
    main()
