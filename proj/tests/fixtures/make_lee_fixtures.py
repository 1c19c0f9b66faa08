"""Writes lee_cases.txt: random binary shapes and their skimage Lee skeletons."""
import numpy as np
from scipy import ndimage as ndi
from skimage.draw import line, disk
from skimage.morphology import skeletonize


def shapes(rng):
    for _ in range(25):  # smoothed noise blobs
        h, w = rng.integers(12, 40, size=2)
        g = ndi.gaussian_filter(rng.random((h, w)), rng.uniform(1.0, 3.0))
        yield g > np.quantile(g, rng.uniform(0.4, 0.7))
    for _ in range(25):  # thick random strokes
        h, w = rng.integers(16, 48, size=2)
        img = np.zeros((h, w), bool)
        for _ in range(rng.integers(1, 4)):
            r0, r1 = rng.integers(0, h, size=2)
            c0, c1 = rng.integers(0, w, size=2)
            rr, cc = line(r0, c0, r1, c1)
            img[rr, cc] = True
        yield ndi.binary_dilation(img, iterations=int(rng.integers(0, 3)))
    for _ in range(10):  # rectangles and disks
        h, w = rng.integers(10, 40, size=2)
        img = np.zeros((h, w), bool)
        r0, c0 = rng.integers(0, h // 2), rng.integers(0, w // 2)
        img[r0:r0 + rng.integers(2, h // 2 + 2), c0:c0 + rng.integers(2, w // 2 + 2)] = True
        rr, cc = disk((rng.integers(0, h), rng.integers(0, w)), rng.integers(2, 8), shape=img.shape)
        img[rr, cc] = True
        yield img
    for _ in range(10):  # salt noise touching the border
        h, w = rng.integers(8, 24, size=2)
        yield rng.random((h, w)) < rng.uniform(0.3, 0.8)


def main():
    rng = np.random.default_rng(20240611)
    with open("lee_cases.txt", "w") as f:
        for k, img in enumerate(shapes(rng)):
            sk = skeletonize(img, method="lee")
            f.write(f"case {k} {img.shape[0]} {img.shape[1]}\n")
            for grid in (img, sk):
                for row in grid:
                    f.write("".join("1" if v else "0" for v in row) + "\n")


if __name__ == "__main__":
    main()
