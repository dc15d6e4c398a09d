"""Pixel / entropy / frequency domain diagnostics for image pairs.

The 2-D transform is a row-column radix-2 decomposition: inputs whose
dims are not powers of two are zero-padded up to the next power of two
and the padding is recorded on the result. Forward transform carries no
normalization; the inverse carries 1/(H*W).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .lep import LEVEL_U8, lep_fast
from .pyramid import build_stack
from .raster import RasterImage


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def _bit_reverse_indices(n: int) -> np.ndarray:
    rev = np.zeros(1, dtype=np.int64)
    while rev.size < n:
        rev = np.concatenate([2 * rev, 2 * rev + 1])
    return rev


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    """Radix-2 DIT FFT along the last axis; length must be a power of two."""
    n = x.shape[-1]
    y = np.asarray(x, dtype=np.complex128)[..., _bit_reverse_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp((-2j * np.pi / size) * np.arange(half))
        grouped = y.reshape(y.shape[:-1] + (n // size, size))
        even = grouped[..., :half]
        odd = grouped[..., half:] * tw
        y = np.concatenate([even + odd, even - odd], axis=-1).reshape(y.shape[:-1] + (n,))
        size *= 2
    return y


@dataclass(frozen=True)
class Spectrum2d:
    """Forward 2-D DFT values on the (possibly padded) grid."""

    values: np.ndarray
    source_height: int
    source_width: int

    @property
    def padded(self) -> bool:
        return self.values.shape != (self.source_height, self.source_width)


def dft2(grid: np.ndarray) -> Spectrum2d:
    """Forward 2-D DFT of a real-valued H x W grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] < 2 or grid.shape[1] < 2:
        raise DimensionError(f"dft2 needs a 2-D grid of at least 2x2, got {grid.shape}")
    h, w = grid.shape
    p, q = _next_pow2(h), _next_pow2(w)
    padded = np.zeros((p, q), dtype=np.complex128)
    padded[:h, :w] = grid
    rows = _fft_pow2(padded)
    cols = _fft_pow2(rows.T).T
    return Spectrum2d(values=cols, source_height=h, source_width=w)


def idft2(values: np.ndarray) -> np.ndarray:
    """Inverse of dft2 on the padded grid, normalized by 1/(H*W)."""
    values = np.asarray(values, dtype=np.complex128)
    h, w = values.shape
    rows = np.conj(_fft_pow2(np.conj(values)))
    cols = np.conj(_fft_pow2(np.conj(rows.T))).T
    return cols / (h * w)


@dataclass(frozen=True)
class DiffReport:
    """Absolute differences of an image pair in three domains."""

    pixel_diff: RasterImage
    entropy_diff: RasterImage
    spectrum_diff: RasterImage
    pixel_mad: float
    entropy_mad: float
    spectrum_mad: float

    @property
    def stats(self) -> dict:
        return {
            "pixel_mad": self.pixel_mad,
            "entropy_mad": self.entropy_mad,
            "spectrum_mad": self.spectrum_mad,
        }


def _to_u8_image(values: np.ndarray) -> RasterImage:
    out = np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)
    return RasterImage(np.ascontiguousarray(out[:, :, None] if out.ndim == 2 else out))


def _entropy_view(img: RasterImage, cfg) -> np.ndarray:
    # Shuffling is disabled here on purpose: the map stays spatially
    # aligned with the source so differences can be localized.
    stack = build_stack(img, cfg.scales, cfg.interp)
    lep = lep_fast(stack, cfg.stride)
    return LEVEL_U8[lep.levels].astype(np.float64)


def _log_magnitude(img: RasterImage) -> np.ndarray:
    gray = img.pixels.astype(np.float64).mean(axis=2)
    return np.log1p(np.abs(dft2(gray).values))


def diff_report(real: RasterImage, fake: RasterImage, cfg) -> DiffReport:
    """Compare a pair of equal-sized images in all three domains."""
    if real.pixels.shape != fake.pixels.shape:
        raise DimensionError(
            f"image dims differ: {real.pixels.shape} vs {fake.pixels.shape}"
        )

    pix = np.abs(real.pixels.astype(np.int16) - fake.pixels.astype(np.int16))
    pixel_mad = float(pix.mean())
    pixel_img = RasterImage(np.ascontiguousarray(pix.astype(np.uint8)))

    ent_r = _entropy_view(real, cfg)
    ent_f = _entropy_view(fake, cfg)
    ent = np.abs(ent_r - ent_f)
    entropy_mad = float(ent.mean())
    entropy_img = _to_u8_image(ent.mean(axis=2))

    mag_r = _log_magnitude(real)
    mag_f = _log_magnitude(fake)
    spec = np.abs(mag_r - mag_f)
    spectrum_mad = float(spec.mean())
    peak = float(spec.max())
    display = spec / peak * 255.0 if peak > 0 else spec
    spectrum_img = _to_u8_image(display)

    return DiffReport(
        pixel_diff=pixel_img,
        entropy_diff=entropy_img,
        spectrum_diff=spectrum_img,
        pixel_mad=pixel_mad,
        entropy_mad=entropy_mad,
        spectrum_mad=spectrum_mad,
    )
