"""The numba kernels and their numpy fallbacks must agree bit for bit."""

import numpy as np
import pytest

from mlep.backend import USE_NUMBA, backend_name
from mlep.lep import _lep_fast_np, lep_fast
from mlep.pyramid import _resample_plane_np, resample_plane

needs_numba = pytest.mark.skipif(
    not USE_NUMBA, reason="numba backend not active; nothing to compare"
)


def test_backend_name_is_valid():
    assert backend_name() in ("numba", "numpy")


@needs_numba
def test_resample_variants_bit_identical(rng):
    for _ in range(40):
        h, w = rng.integers(2, 32, size=2)
        src = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
        for kernel in (0, 1, 2):
            cases = [
                (int(h), int(w), 1.0, 1.0),
                (max(2, h // 2), max(2, w // 2), 0.5, 0.5),
                (int(h * 2), int(w * 2), 2.0, 2.0),
                (max(2, int(h * 0.8)), max(2, int(w * 1.7)), 0.8, 1.7),
            ]
            for oh, ow, sy, sx in cases:
                jit_out = resample_plane(src, oh, ow, sy, sx, kernel)
                np_out = _resample_plane_np(src, oh, ow, sy, sx, kernel)
                assert np.array_equal(jit_out, np_out), (kernel, sy, sx)


@needs_numba
def test_lep_variants_bit_identical(rng):
    for _ in range(40):
        h, w = rng.integers(2, 40, size=2)
        c = int(rng.integers(1, 6))
        data = rng.integers(0, 256, size=(h, w, c), dtype=np.uint8)
        for stride in (1, 2):
            jit_out = lep_fast(data, stride).levels
            np_out = _lep_fast_np(data, stride)
            assert np.array_equal(jit_out, np_out), stride
