"""Smoke test for the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import math
import random

import nrm_aug_py as na


def main():
    h, w = 16, 20
    rng = random.Random(0)
    img = [rng.random() for _ in range(h * w * 3)]

    assert na.manipulation_kinds()[0] == "identity"
    assert len(na.degradation_kinds()) == 5
    for kind in na.manipulation_kinds():
        assert na.manipulate(img, h, w, kind, 0.0) == img, kind

    bright = na.manipulate(img, h, w, "brightness", 0.2)
    assert all(abs(b - min(1.0, 1.2 * x)) < 1e-12 for x, b in zip(img, bright))

    noisy = na.degrade(img, h, w, "gaussian", 0.1, seed=3)
    assert noisy == na.degrade(img, h, w, "gaussian", 0.1, seed=3)
    assert noisy != img

    assert math.isinf(na.psnr(img, img, h, w))
    assert abs(na.ssim(img, img, h, w) - 1.0) < 1e-12
    mse = sum((a - b) ** 2 for a, b in zip(img, noisy)) / len(img)
    assert abs(na.psnr(img, noisy, h, w) + 10 * math.log10(mse)) < 1e-9

    p = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]
    q = [(0.0, 0.0, 1.0)]
    assert abs(na.chamfer(p, q) - ((1 + math.sqrt(2)) / 2 + 1)) < 1e-12

    try:
        na.degrade(img, h, w, "blurry", 1.0)
    except ValueError as e:
        assert "salt_pepper" in str(e)
    else:
        raise AssertionError("unknown degradation accepted")

    try:
        na.Field.load("/nonexistent/checkpoint.json")
    except OSError:
        pass
    else:
        raise AssertionError("missing checkpoint loaded")

    print("smoke test passed")


if __name__ == "__main__":
    main()
