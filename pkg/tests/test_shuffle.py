import itertools

import numpy as np
import pytest

from mlep.errors import DimensionError
from mlep.raster import RasterImage
from mlep.shuffle import (
    ShuffleSpec,
    derive_seed,
    partition_grid,
    shuffle_image,
    unshuffle_image,
)

from conftest import random_image


class TestPartitionGrid:
    def test_exact_division_default_setup(self):
        grid = partition_grid(224, 224, 2)
        assert (grid.rows, grid.cols) == (112, 112)
        assert (grid.offset_y, grid.offset_x) == (0, 0)
        assert (grid.crop_h, grid.crop_w) == (224, 224)

    def test_exact_division_large_patch(self):
        grid = partition_grid(224, 224, 8)
        assert (grid.rows, grid.cols) == (28, 28)

    def test_non_divisible_crops_centered(self):
        grid = partition_grid(225, 225, 2)
        assert (grid.rows, grid.cols) == (112, 112)
        assert (grid.offset_y, grid.offset_x) == (0, 0)
        assert (grid.crop_h, grid.crop_w) == (224, 224)

    def test_centering_offsets(self):
        grid = partition_grid(11, 14, 4)
        assert (grid.rows, grid.cols) == (2, 3)
        assert (grid.offset_y, grid.offset_x) == (1, 1)

    def test_too_small_rejected(self):
        with pytest.raises(DimensionError):
            partition_grid(3, 8, 4)


class TestShuffle:
    def test_single_patch_is_identity(self, rng):
        img = random_image(rng, 4, 4)
        for seed in (0, 1, 99):
            out, _ = shuffle_image(img, 4, seed)
            assert out == img

    def test_constant_image_unchanged(self):
        img = RasterImage(np.full((8, 8, 3), 42, dtype=np.uint8))
        for l in (2, 4, 8):
            out, _ = shuffle_image(img, l, 7)
            assert out == img

    def test_seeded_determinism(self, rng):
        img = random_image(rng, 8, 8)
        a, spec_a = shuffle_image(img, 2, 17)
        b, spec_b = shuffle_image(img, 2, 17)
        assert a == b
        assert spec_a.to_json() == spec_b.to_json()

    def test_different_seeds_differ(self, rng):
        img = random_image(rng, 16, 16)
        a, _ = shuffle_image(img, 2, 1)
        b, _ = shuffle_image(img, 2, 2)
        assert a != b

    def test_channels_use_independent_permutations(self, rng):
        img = random_image(rng, 16, 16)
        _, spec = shuffle_image(img, 2, 5)
        assert not np.array_equal(spec.permutations[0], spec.permutations[1])

    def test_non_divisible_dims_rejected(self, rng):
        img = random_image(rng, 9, 8)
        with pytest.raises(DimensionError):
            shuffle_image(img, 2, 0)

    def test_patch_multiset_preserved(self, rng):
        for l in (2, 4, 8):
            img = random_image(rng, 16, 16)
            out, _ = shuffle_image(img, l, 3)
            for c in range(3):
                before = _sorted_patches(img.plane(c), l)
                after = _sorted_patches(out.plane(c), l)
                assert before == after

    def test_histogram_invariant(self, rng):
        img = random_image(rng, 16, 16)
        out, _ = shuffle_image(img, 2, 11)
        for c in range(3):
            assert np.array_equal(
                np.bincount(img.plane(c).ravel(), minlength=256),
                np.bincount(out.plane(c).ravel(), minlength=256),
            )


def _sorted_patches(plane: np.ndarray, l: int) -> list:
    h, w = plane.shape
    patches = [
        plane[i : i + l, j : j + l].tobytes()
        for i in range(0, h, l)
        for j in range(0, w, l)
    ]
    return sorted(patches)


class TestUnshuffle:
    def test_inverse_reconstructs_exactly(self, rng):
        for l in (2, 4, 8):
            img = random_image(rng, 16, 24)
            shuffled, spec = shuffle_image(img, l, 123)
            assert unshuffle_image(shuffled, spec) == img

    def test_identity_permutations_are_noop(self, rng):
        img = random_image(rng, 8, 8)
        spec = ShuffleSpec.identity(8, 8, 3, 2)
        assert unshuffle_image(img, spec) == img

    def test_channels_reconstruct_independently(self, rng):
        img = random_image(rng, 8, 8)
        shuffled, spec = shuffle_image(img, 2, 9)
        scrambled_perm = np.roll(spec.permutations[0], 1)
        altered = ShuffleSpec(
            patch_size=spec.patch_size,
            seed=spec.seed,
            permutations=(scrambled_perm,) + spec.permutations[1:],
        )
        out = unshuffle_image(shuffled, altered)
        assert np.array_equal(out.plane(1), img.plane(1))
        assert np.array_equal(out.plane(2), img.plane(2))

    def test_dim_mismatch_rejected(self, rng):
        img = random_image(rng, 8, 8)
        _, spec = shuffle_image(img, 2, 1)
        other = random_image(rng, 16, 16)
        with pytest.raises(DimensionError):
            unshuffle_image(other, spec)


class TestSpec:
    def test_json_round_trip(self, rng):
        img = random_image(rng, 8, 8)
        _, spec = shuffle_image(img, 2, 31)
        again = ShuffleSpec.from_json(spec.to_json())
        assert again.patch_size == spec.patch_size
        assert again.seed == spec.seed
        for a, b in zip(again.permutations, spec.permutations):
            assert np.array_equal(a, b)

    def test_non_bijection_rejected(self):
        with pytest.raises(ValueError):
            ShuffleSpec(patch_size=2, seed=0, permutations=(np.array([0, 0, 1]),))


class TestDeriveSeed:
    def test_stable_and_distinct(self):
        a = derive_seed(1, "img.png")
        assert a == derive_seed(1, "img.png")
        assert a != derive_seed(2, "img.png")
        assert a != derive_seed(1, "other.png")
        assert a != derive_seed(1, "img.png", 3)
        assert 0 <= a < 2**64


def test_permutation_frequencies_are_uniform():
    """Over many seeds, each of the 24 permutations of a 4-patch grid
    shows up within 5 binomial sigmas of the uniform rate."""
    n_seeds = 10_000
    img = RasterImage(
        np.arange(16, dtype=np.uint8).reshape(4, 4)[:, :, None].copy()
    )
    perms = list(itertools.permutations(range(4)))
    counts = dict.fromkeys(perms, 0)
    for seed in range(n_seeds):
        _, spec = shuffle_image(img, 2, seed)
        counts[tuple(spec.permutations[0].tolist())] += 1
    p = 1.0 / 24.0
    sigma = (n_seeds * p * (1 - p)) ** 0.5
    for perm, count in counts.items():
        assert abs(count - n_seeds * p) <= 5 * sigma, (perm, count)
