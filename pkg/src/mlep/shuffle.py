"""Per-channel patch shuffling.

Each channel is split into l x l patches and the patches are permuted
by an independent, seeded permutation. Permutations come from a
counter-based Philox generator keyed by (seed, channel), so extraction
is reproducible across runs and platforms; the policy is named below so
a future generator change cannot silently alter stored specs.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .raster import RasterImage

RNG_POLICY = "philox4x64-perm-v1"

_U64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(base_seed: int, *parts) -> int:
    """Stable 64-bit seed from a base seed and context (path, epoch, ...)."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(base_seed) & _U64).encode())
    for part in parts:
        h.update(b"\x00")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "little")


def _channel_rng(seed: int, channel: int) -> np.random.Generator:
    key = np.array([seed & _U64, channel], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class PatchGrid:
    """Patch layout for an image, including any centering pre-crop."""

    rows: int
    cols: int
    offset_y: int
    offset_x: int
    crop_h: int
    crop_w: int


@dataclass(frozen=True)
class ShuffleSpec:
    """Patch size, seed provenance and the materialized permutations."""

    patch_size: int
    seed: int
    permutations: tuple  # one 1-D index array per channel
    per_channel: bool = True
    rng_policy: str = RNG_POLICY

    def __post_init__(self):
        for perm in self.permutations:
            p = np.asarray(perm)
            if not np.array_equal(np.sort(p), np.arange(p.size)):
                raise ValueError("permutation is not a bijection")

    def to_json(self) -> str:
        doc = {
            "patch_size": self.patch_size,
            "seed": self.seed,
            "per_channel": self.per_channel,
            "rng_policy": self.rng_policy,
            "permutations": [np.asarray(p).tolist() for p in self.permutations],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ShuffleSpec":
        doc = json.loads(text)
        perms = tuple(
            np.asarray(p, dtype=np.int64) for p in doc["permutations"]
        )
        return cls(
            patch_size=int(doc["patch_size"]),
            seed=int(doc["seed"]),
            permutations=perms,
            per_channel=bool(doc.get("per_channel", True)),
            rng_policy=doc.get("rng_policy", RNG_POLICY),
        )

    @classmethod
    def identity(cls, h: int, w: int, channels: int, l: int) -> "ShuffleSpec":
        n = (h // l) * (w // l)
        perm = np.arange(n, dtype=np.int64)
        return cls(patch_size=l, seed=0, permutations=(perm,) * channels)


def partition_grid(h: int, w: int, l: int):
    """Patch grid for an h x w plane with patch size l.

    When l divides both dims the grid covers the full plane. Otherwise
    the grid covers the largest centered sub-image divisible by l and
    the returned offsets say where to crop first.
    """
    if h < l or w < l:
        raise DimensionError(f"image {h}x{w} smaller than patch size {l}")
    crop_h = (h // l) * l
    crop_w = (w // l) * l
    return PatchGrid(
        rows=crop_h // l,
        cols=crop_w // l,
        offset_y=(h - crop_h) // 2,
        offset_x=(w - crop_w) // 2,
        crop_h=crop_h,
        crop_w=crop_w,
    )


def _as_patches(plane: np.ndarray, l: int) -> np.ndarray:
    """(H, W) -> (n_patches, l, l) in row-major patch order, copied."""
    h, w = plane.shape
    view = plane.reshape(h // l, l, w // l, l).swapaxes(1, 2)
    return view.reshape(-1, l, l)


def _from_patches(patches: np.ndarray, h: int, w: int, l: int) -> np.ndarray:
    view = patches.reshape(h // l, w // l, l, l).swapaxes(1, 2)
    return np.ascontiguousarray(view.reshape(h, w))


def shuffle_image(img: RasterImage, l: int, seed: int):
    """Permute each channel's l x l patches; returns (image, spec).

    Channel c uses an independent permutation drawn from the generator
    keyed by (seed, c). The shuffled image places original patch t at
    grid slot perm[t].
    """
    h, w = img.height, img.width
    if h % l or w % l:
        raise DimensionError(
            f"dims {h}x{w} not divisible by patch size {l}; pre-crop via partition_grid"
        )
    n = (h // l) * (w // l)
    out_planes = []
    perms = []
    for c in range(img.channels):
        perm = _channel_rng(seed, c).permutation(n)
        patches = _as_patches(img.plane(c), l)
        moved = np.empty_like(patches)
        moved[perm] = patches
        out_planes.append(_from_patches(moved, h, w, l))
        perms.append(perm.astype(np.int64))
    spec = ShuffleSpec(patch_size=l, seed=int(seed), permutations=tuple(perms))
    return RasterImage.from_planes(out_planes), spec


def unshuffle_image(img: RasterImage, spec: ShuffleSpec) -> RasterImage:
    """Exact inverse of shuffle_image for the matching spec."""
    l = spec.patch_size
    h, w = img.height, img.width
    if h % l or w % l:
        raise DimensionError(f"dims {h}x{w} not divisible by patch size {l}")
    if len(spec.permutations) != img.channels:
        raise DimensionError(
            f"spec has {len(spec.permutations)} channel permutations, image has {img.channels}"
        )
    n = (h // l) * (w // l)
    out_planes = []
    for c in range(img.channels):
        perm = spec.permutations[c]
        if perm.size != n:
            raise DimensionError(
                f"permutation length {perm.size} does not match {n} patches"
            )
        patches = _as_patches(img.plane(c), l)
        out_planes.append(_from_patches(patches[perm], h, w, l))
    return RasterImage.from_planes(out_planes)
