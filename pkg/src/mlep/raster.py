"""8-bit raster images: decoding, encoding, cropping, resizing.

Images are held as (H, W, C) uint8 numpy arrays with C in {1, 3}.
PNG and JPEG are read; only PNG is written (lossless round trips are
needed for bit-exact fixtures).
"""

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionError
from .fileutil import atomic_write_bytes

_GRAY_MODES = ("1", "L", "LA", "I", "I;16", "I;16B", "I;16L", "F")


@dataclass(frozen=True)
class CropMode:
    """Crop placement: deterministic center or seeded random offset."""

    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("center", "random"):
            raise ValueError(f"unknown crop kind {self.kind!r}")
        if self.kind == "random" and self.seed is None:
            raise ValueError("random crop requires an explicit seed")

    @classmethod
    def center(cls) -> "CropMode":
        return cls("center")

    @classmethod
    def random(cls, seed: int) -> "CropMode":
        return cls("random", int(seed))


@dataclass(frozen=True)
class RasterImage:
    """An H x W x C grid of unsigned 8-bit intensities, C in {1, 3}."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.dtype != np.uint8:
            raise DimensionError(
                f"pixels must be (H, W, C) uint8, got shape {p.shape} dtype {p.dtype}"
            )
        h, w, c = p.shape
        if c not in (1, 3):
            raise DimensionError(f"channel count must be 1 or 3, got {c}")
        if h < 2 or w < 2:
            raise DimensionError(f"image must be at least 2x2, got {h}x{w}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def plane(self, c: int) -> np.ndarray:
        """One channel as an (H, W) view."""
        return self.pixels[:, :, c]

    @classmethod
    def from_planes(cls, planes) -> "RasterImage":
        """Build from a sequence of (H, W) uint8 channel planes."""
        return cls(np.ascontiguousarray(np.stack(planes, axis=-1)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


def decode_image(data: bytes) -> RasterImage:
    """Decode a PNG or JPEG stream.

    Grayscale sources yield 1 channel, color sources 3; alpha is dropped.
    """
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"stream open/decode failed: {exc}") from exc
    try:
        target = "L" if img.mode in _GRAY_MODES else "RGB"
        if img.mode != target:
            img = img.convert(target)
        arr = np.asarray(img, dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise DecodeError(f"pixel conversion failed: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return RasterImage(np.ascontiguousarray(arr))


def encode_png(img: RasterImage) -> bytes:
    """Encode as PNG (lossless)."""
    arr = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    mode = "L" if img.channels == 1 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def load_image(path) -> RasterImage:
    with open(path, "rb") as fp:
        return decode_image(fp.read())


def save_png(img: RasterImage, path) -> None:
    atomic_write_bytes(path, encode_png(img))


def crop(img: RasterImage, h: int, w: int, mode: CropMode) -> RasterImage:
    """Extract an h x w window; center offset or seeded uniform offset."""
    if h > img.height or w > img.width:
        raise DimensionError(
            f"crop {h}x{w} exceeds source {img.height}x{img.width}"
        )
    if mode.kind == "center":
        top = (img.height - h) // 2
        left = (img.width - w) // 2
    else:
        key = np.array([mode.seed & 0xFFFFFFFFFFFFFFFF, 0], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        top = int(rng.integers(0, img.height - h + 1))
        left = int(rng.integers(0, img.width - w + 1))
    return RasterImage(np.ascontiguousarray(img.pixels[top : top + h, left : left + w]))


def resize_to(img: RasterImage, h: int, w: int, interp) -> RasterImage:
    """Resample to exactly h x w using the shared half-pixel convention."""
    from .pyramid import resample_image

    if h < 2 or w < 2:
        raise DimensionError(f"resize target must be at least 2x2, got {h}x{w}")
    sy = h / img.height
    sx = w / img.width
    return RasterImage(resample_image(img.pixels, h, w, sy, sx, interp))
