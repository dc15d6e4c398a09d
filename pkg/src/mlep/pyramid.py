"""Multi-scale resampling: down/up interpolation and channel stacking.

Sampling convention (all kernels, both backends): destination pixel j
maps to source coordinate (j + 0.5) / s - 0.5, clamped to the valid
range; results are rounded half away from zero and clamped to [0, 255]
so u8 in gives u8 out deterministically. No anti-alias prefilter is
applied; resampling aliasing is part of the signal being analyzed.

The numba and numpy kernel variants use identical float64 expression
trees so their outputs are bit-identical; tests enforce this.
"""

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

import numpy as np

from .backend import USE_NUMBA
from .errors import ConfigError, DimensionError
from .raster import RasterImage


class InterpKernel(IntEnum):
    NEAREST = 0
    BILINEAR = 1
    BICUBIC = 2  # Catmull-Rom, a = -0.5

    @classmethod
    def parse(cls, name: str) -> "InterpKernel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ConfigError(
                f"unknown interpolation kernel {name!r}; expected nearest, bilinear or bicubic"
            ) from None


@dataclass(frozen=True)
class ScaleSet:
    """Ordered resampling factors s_1..s_K, each in (0, 1], s_1 == 1."""

    factors: tuple

    def __post_init__(self):
        fs = tuple(Fraction(f) for f in self.factors)
        object.__setattr__(self, "factors", fs)
        if not fs:
            raise ConfigError("scale set must not be empty")
        if fs[0] != 1:
            raise ConfigError("first scale factor must be 1 (identity scale)")
        for f in fs:
            if not (0 < f <= 1):
                raise ConfigError(f"scale factor {f} outside (0, 1]")

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def validate_for(self, h: int, w: int) -> None:
        for f in self.factors:
            if int(f * h) < 2 or int(f * w) < 2:
                raise ConfigError(
                    f"scale {f} reduces {h}x{w} below the 2x2 minimum"
                )

    @classmethod
    def parse(cls, text: str) -> "ScaleSet":
        try:
            factors = tuple(Fraction(tok.strip()) for tok in text.split(",") if tok.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse scale list {text!r}: {exc}") from None
        return cls(factors)

    def __str__(self) -> str:
        return ",".join(str(f) for f in self.factors)


@dataclass(frozen=True)
class ScaledStack:
    """H x W x (C*K) stack of resampled channels, scale-major order."""

    data: np.ndarray
    base_channels: int
    scales: ScaleSet

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.dtype != np.uint8:
            raise DimensionError("stack data must be (H, W, C*K) uint8")
        if self.data.shape[2] != self.base_channels * len(self.scales):
            raise DimensionError(
                f"stack has {self.data.shape[2]} channels, expected "
                f"{self.base_channels} x {len(self.scales)}"
            )

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


# ---------------------------------------------------------------------------
# numpy kernel variant


def _axis_coords(n_out: int, n_src: int, s: float) -> np.ndarray:
    co = (np.arange(n_out, dtype=np.float64) + 0.5) / s - 0.5
    return np.minimum(np.maximum(co, 0.0), n_src - 1.0)


def _cubic_near(x):
    # Catmull-Rom segment for |x| <= 1, a = -0.5
    return ((1.5 * x - 2.5) * x) * x + 1.0


def _cubic_far(x):
    # Catmull-Rom segment for 1 < |x| <= 2, a = -0.5
    return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0


def _resample_plane_np(src: np.ndarray, oh: int, ow: int, sy: float, sx: float,
                       kernel: int) -> np.ndarray:
    h, w = src.shape
    cy = _axis_coords(oh, h, sy)
    cx = _axis_coords(ow, w, sx)

    if kernel == InterpKernel.NEAREST:
        iy = np.floor(cy + 0.5).astype(np.int64)
        ix = np.floor(cx + 0.5).astype(np.int64)
        return np.ascontiguousarray(src[iy[:, None], ix[None, :]])

    f = src.astype(np.float64)
    y0 = np.floor(cy).astype(np.int64)
    x0 = np.floor(cx).astype(np.int64)
    fy = cy - y0
    fx = cx - x0

    if kernel == InterpKernel.BILINEAR:
        y1 = np.minimum(y0 + 1, h - 1)
        x1 = np.minimum(x0 + 1, w - 1)
        one_fx = 1.0 - fx
        top = one_fx[None, :] * f[y0[:, None], x0[None, :]] + fx[None, :] * f[y0[:, None], x1[None, :]]
        bot = one_fx[None, :] * f[y1[:, None], x0[None, :]] + fx[None, :] * f[y1[:, None], x1[None, :]]
        val = (1.0 - fy)[:, None] * top + fy[:, None] * bot
    else:
        wy = (_cubic_far(fy + 1.0), _cubic_near(fy), _cubic_near(1.0 - fy), _cubic_far(2.0 - fy))
        wx = (_cubic_far(fx + 1.0), _cubic_near(fx), _cubic_near(1.0 - fx), _cubic_far(2.0 - fx))
        ys = [np.clip(y0 + t, 0, h - 1) for t in (-1, 0, 1, 2)]
        xs = [np.clip(x0 + t, 0, w - 1) for t in (-1, 0, 1, 2)]
        val = None
        for i in range(4):
            yi = ys[i][:, None]
            inner = (wx[0][None, :] * f[yi, xs[0][None, :]]
                     + wx[1][None, :] * f[yi, xs[1][None, :]]
                     + wx[2][None, :] * f[yi, xs[2][None, :]]
                     + wx[3][None, :] * f[yi, xs[3][None, :]])
            term = wy[i][:, None] * inner
            val = term if val is None else val + term

    out = np.floor(val + 0.5)
    return np.clip(out, 0.0, 255.0).astype(np.uint8)


# ---------------------------------------------------------------------------
# numba kernel variant

if USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _resample_plane_nb(src, out, sy, sx, kernel):  # pragma: no cover - timed via tests
        h, w = src.shape
        oh, ow = out.shape
        for i in range(oh):
            cy = (i + 0.5) / sy - 0.5
            if cy < 0.0:
                cy = 0.0
            elif cy > h - 1.0:
                cy = h - 1.0
            for j in range(ow):
                cx = (j + 0.5) / sx - 0.5
                if cx < 0.0:
                    cx = 0.0
                elif cx > w - 1.0:
                    cx = w - 1.0

                if kernel == 0:
                    out[i, j] = src[int(math.floor(cy + 0.5)), int(math.floor(cx + 0.5))]
                    continue

                y0 = int(math.floor(cy))
                x0 = int(math.floor(cx))
                fy = cy - y0
                fx = cx - x0

                if kernel == 1:
                    y1 = y0 + 1
                    if y1 > h - 1:
                        y1 = h - 1
                    x1 = x0 + 1
                    if x1 > w - 1:
                        x1 = w - 1
                    one_fx = 1.0 - fx
                    top = one_fx * src[y0, x0] + fx * src[y0, x1]
                    bot = one_fx * src[y1, x0] + fx * src[y1, x1]
                    val = (1.0 - fy) * top + fy * bot
                else:
                    xa = fy + 1.0
                    wy0 = ((-0.5 * xa + 2.5) * xa - 4.0) * xa + 2.0
                    wy1 = ((1.5 * fy - 2.5) * fy) * fy + 1.0
                    xb = 1.0 - fy
                    wy2 = ((1.5 * xb - 2.5) * xb) * xb + 1.0
                    xc = 2.0 - fy
                    wy3 = ((-0.5 * xc + 2.5) * xc - 4.0) * xc + 2.0
                    xa = fx + 1.0
                    wx0 = ((-0.5 * xa + 2.5) * xa - 4.0) * xa + 2.0
                    wx1 = ((1.5 * fx - 2.5) * fx) * fx + 1.0
                    xb = 1.0 - fx
                    wx2 = ((1.5 * xb - 2.5) * xb) * xb + 1.0
                    xc = 2.0 - fx
                    wx3 = ((-0.5 * xc + 2.5) * xc - 4.0) * xc + 2.0

                    val = 0.0
                    for t in range(4):
                        yy = y0 + t - 1
                        if yy < 0:
                            yy = 0
                        elif yy > h - 1:
                            yy = h - 1
                        x_m1 = x0 - 1 if x0 - 1 >= 0 else 0
                        x_p1 = x0 + 1 if x0 + 1 <= w - 1 else w - 1
                        x_p2 = x0 + 2 if x0 + 2 <= w - 1 else w - 1
                        x_c = x0 if x0 <= w - 1 else w - 1
                        inner = (wx0 * src[yy, x_m1]
                                 + wx1 * src[yy, x_c]
                                 + wx2 * src[yy, x_p1]
                                 + wx3 * src[yy, x_p2])
                        if t == 0:
                            val += wy0 * inner
                        elif t == 1:
                            val += wy1 * inner
                        elif t == 2:
                            val += wy2 * inner
                        else:
                            val += wy3 * inner

                iv = int(math.floor(val + 0.5))
                if iv < 0:
                    iv = 0
                elif iv > 255:
                    iv = 255
                out[i, j] = iv


def resample_plane(src: np.ndarray, oh: int, ow: int, sy: float, sx: float,
                   kernel) -> np.ndarray:
    """Resample one (H, W) uint8 plane to (oh, ow)."""
    kernel = int(kernel)
    if USE_NUMBA:
        out = np.empty((oh, ow), dtype=np.uint8)
        _resample_plane_nb(src, out, float(sy), float(sx), kernel)
        return out
    return _resample_plane_np(src, oh, ow, float(sy), float(sx), kernel)


def resample_image(pixels: np.ndarray, oh: int, ow: int, sy: float, sx: float,
                   kernel) -> np.ndarray:
    """Resample an (H, W, C) uint8 array channel by channel."""
    planes = [
        resample_plane(np.ascontiguousarray(pixels[:, :, c]), oh, ow, sy, sx, kernel)
        for c in range(pixels.shape[2])
    ]
    return np.ascontiguousarray(np.stack(planes, axis=-1))


def downsample(img: RasterImage, s, kernel: InterpKernel) -> RasterImage:
    """Shrink by factor s in (0, 1]; output dims floor(s*H) x floor(s*W)."""
    s = Fraction(s)
    if not (0 < s <= 1):
        raise ConfigError(f"downsample factor {s} outside (0, 1]")
    oh = int(s * img.height)
    ow = int(s * img.width)
    if oh < 2 or ow < 2:
        raise ConfigError(f"factor {s} reduces {img.height}x{img.width} below 2x2")
    sf = float(s)
    return RasterImage(resample_image(img.pixels, oh, ow, sf, sf, kernel))


def upsample(img: RasterImage, h: int, w: int, kernel: InterpKernel) -> RasterImage:
    """Grow back to exactly h x w (h, w at least the current dims)."""
    if h < img.height or w < img.width:
        raise DimensionError(
            f"upsample target {h}x{w} smaller than source {img.height}x{img.width}"
        )
    sy = h / img.height
    sx = w / img.width
    return RasterImage(resample_image(img.pixels, h, w, sy, sx, kernel))


def build_stack(img: RasterImage, scales: ScaleSet, kernel: InterpKernel) -> ScaledStack:
    """Concatenate Up(Down(img, s_k)) blocks along channels, scale-major.

    The scale-1 block is the input itself, bit-exact.
    """
    scales.validate_for(img.height, img.width)
    blocks = []
    for s in scales:
        if s == 1:
            blocks.append(img.pixels.copy())
        else:
            small = downsample(img, s, kernel)
            blocks.append(upsample(small, img.height, img.width, kernel).pixels)
    return ScaledStack(
        data=np.ascontiguousarray(np.concatenate(blocks, axis=2)),
        base_channels=img.channels,
        scales=scales,
    )
