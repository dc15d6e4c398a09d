"""Seeded procedural test corpus.

"Real" images are mixtures of smooth cosine fields, oriented sinusoid
textures and per-channel noise, so they carry the high local randomness
of photographs. "Fake" counterparts are the same images passed through
a bilinear half-scale down/up round trip plus a mild binomial blur,
which mimics generator-style upsampling smoothness.
"""

import os

import numpy as np

from .errors import ConfigError
from .pyramid import InterpKernel, downsample, upsample
from .raster import RasterImage, save_png
from .shuffle import derive_seed
from .evalkit import ManifestRecord, write_manifest

_U64 = 0xFFFFFFFFFFFFFFFF


def _rng(seed: int) -> np.random.Generator:
    key = np.array([seed & _U64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def synth_real(seed: int, size: int = 224,
               noise_range: tuple = (20.0, 60.0)) -> RasterImage:
    rng = _rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)

    field = np.zeros((size, size))
    for _ in range(3):
        fy, fx = rng.uniform(0.5, 6.0, size=2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(10.0, 40.0)
        field += amp * np.cos(2.0 * np.pi * (fy * yy + fx * xx) / size + phase)

    # oriented fine texture
    theta = rng.uniform(0.0, np.pi)
    freq = rng.uniform(8.0, 40.0)
    tex_amp = rng.uniform(5.0, 25.0)
    field += tex_amp * np.sin(
        2.0 * np.pi * freq * (np.cos(theta) * xx + np.sin(theta) * yy) / size
    )

    base = 128.0 + field
    noise_amp = rng.uniform(noise_range[0], noise_range[1])
    planes = []
    for _ in range(3):
        gain = rng.uniform(0.85, 1.15)
        shift = rng.uniform(-12.0, 12.0)
        noise = rng.uniform(-noise_amp, noise_amp, size=(size, size))
        plane = np.clip(gain * base + shift + noise, 0.0, 255.0)
        planes.append(np.floor(plane + 0.5).astype(np.uint8))
    return RasterImage.from_planes(planes)


def _smooth_121(plane: np.ndarray) -> np.ndarray:
    f = plane.astype(np.float64)
    p = np.pad(f, 1, mode="edge")
    horiz = (p[:, :-2] + 2.0 * p[:, 1:-1] + p[:, 2:]) / 4.0
    both = (horiz[:-2, :] + 2.0 * horiz[1:-1, :] + horiz[2:, :]) / 4.0
    return np.clip(np.floor(both + 0.5), 0.0, 255.0).astype(np.uint8)


def synth_fake(real: RasterImage) -> RasterImage:
    small = downsample(real, "1/2", InterpKernel.BILINEAR)
    up = upsample(small, real.height, real.width, InterpKernel.BILINEAR)
    return RasterImage.from_planes(
        [_smooth_121(up.plane(c)) for c in range(up.channels)]
    )


def synth_pair(seed: int, size: int = 224, noise_range: tuple = (20.0, 60.0)):
    real = synth_real(seed, size, noise_range)
    return real, synth_fake(real)


def synth_photo_pair(seed: int, size: int = 224):
    """Pair with camera-like moderate noise; the fake's pixel-domain
    footprint stays small while its entropy footprint does not."""
    return synth_pair(seed, size, noise_range=(8.0, 25.0))


def build_corpus(out_dir, n_train_per_class: int, n_test_per_class: int,
                 seed: int = 0, size: int = 224) -> str:
    """Write paired real/fake PNGs plus a manifest; returns manifest path."""
    if n_train_per_class < 1 or n_test_per_class < 1:
        raise ConfigError("corpus needs at least one train and one test image per class")
    os.makedirs(out_dir, exist_ok=True)
    total = n_train_per_class + n_test_per_class
    records = []
    for i in range(total):
        split = "train" if i < n_train_per_class else "test"
        real, fake = synth_pair(derive_seed(seed, "corpus", i), size)
        real_path = os.path.join(out_dir, f"real_{i:04d}.png")
        fake_path = os.path.join(out_dir, f"fake_{i:04d}.png")
        save_png(real, real_path)
        save_png(fake, fake_path)
        records.append(ManifestRecord(path=real_path, label=0, split=split))
        records.append(ManifestRecord(path=fake_path, label=1, split=split))
    manifest_path = os.path.join(out_dir, "manifest.csv")
    write_manifest(records, manifest_path)
    return manifest_path
