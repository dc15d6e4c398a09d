import os

import numpy as np
import pytest

from mlep.raster import RasterImage

ASSETS = os.path.join(os.path.dirname(__file__), "assets")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def jpeg_bytes():
    with open(os.path.join(ASSETS, "sample_224.jpg"), "rb") as fp:
        return fp.read()


def random_image(rng, h, w, c=3) -> RasterImage:
    return RasterImage(rng.integers(0, 256, size=(h, w, c), dtype=np.uint8))
