"""End-to-end feature extraction and the portable tensor format.

Pipeline per image: resize (short side to input_size, aspect kept) ->
crop to input_size x input_size -> per-channel patch shuffle ->
multi-scale stack -> local entropy map. Deterministic for a fixed
(image, config) pair.

Tensor files ("MLEP" format, version 1) hold one feature map:

  offset  size  field
  0       4     magic "MLEP"
  4       1     version, 1
  5       1     dtype: 0 = level-index u8, 1 = float32 entropy values
  6       2     reserved, zero
  8       4     height, u32 LE
  12      4     width, u32 LE
  16      4     channels, u32 LE
  20      ...   payload, row-major (h, w, channels), little-endian
"""

import contextlib
import io
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import shuffle as shuffle_mod
from .errors import ConfigError, TensorFormatError
from .lep import LEVEL_VALUES, LepMap, lep_fast
from .pyramid import InterpKernel, ScaleSet, build_stack
from .raster import CropMode, RasterImage, crop, resize_to

MAGIC = b"MLEP"
VERSION = 1
DTYPE_LEVEL_U8 = 0
DTYPE_F32 = 1

_ABLATED_PATCH_SIZES = (2, 4, 8)


@dataclass(frozen=True)
class MlepConfig:
    """Extraction settings; the defaults are the best-known configuration
    (patch size 2, scales 1, 1/2, 1/4, bilinear, stride 1, 224 input)."""

    patch_size: int = 2
    scales: ScaleSet = field(default_factory=lambda: ScaleSet(("1", "1/2", "1/4")))
    interp: InterpKernel = InterpKernel.BILINEAR
    stride: int = 1
    seed: int = 0
    input_size: int = 224
    crop: CropMode = field(default_factory=CropMode.center)

    def __post_init__(self):
        if self.patch_size not in _ABLATED_PATCH_SIZES:
            raise ConfigError(
                f"patch size {self.patch_size} is outside the supported set "
                f"{_ABLATED_PATCH_SIZES}"
            )
        if self.stride not in (1, 2):
            raise ConfigError(f"stride must be 1 or 2, got {self.stride}")
        if self.input_size < 2:
            raise ConfigError(f"input size must be at least 2, got {self.input_size}")
        self.scales.validate_for(self.input_size, self.input_size)

    def with_seed(self, seed: int) -> "MlepConfig":
        return replace(self, seed=int(seed))

    def to_json(self) -> str:
        doc = {
            "patch_size": self.patch_size,
            "scales": str(self.scales),
            "interp": self.interp.name.lower(),
            "stride": self.stride,
            "seed": self.seed,
            "input_size": self.input_size,
            "crop": {"kind": self.crop.kind, "seed": self.crop.seed},
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MlepConfig":
        doc = json.loads(text)
        crop_doc = doc.get("crop", {"kind": "center", "seed": None})
        mode = (
            CropMode.center()
            if crop_doc["kind"] == "center"
            else CropMode.random(crop_doc["seed"])
        )
        return cls(
            patch_size=int(doc["patch_size"]),
            scales=ScaleSet.parse(doc["scales"]),
            interp=InterpKernel.parse(doc["interp"]),
            stride=int(doc["stride"]),
            seed=int(doc["seed"]),
            input_size=int(doc["input_size"]),
            crop=mode,
        )


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except TensorFormatError:
        raise
    except Exception as exc:
        exc.args = (f"[{name}] {exc}",) + exc.args[1:]
        raise


def extract_mlep(img: RasterImage, cfg: MlepConfig) -> LepMap:
    """Run the full pipeline on one image."""
    size = cfg.input_size
    with _stage("resize"):
        if img.height <= img.width:
            h = size
            w = max(size, int(round(img.width * size / img.height)))
        else:
            w = size
            h = max(size, int(round(img.height * size / img.width)))
        resized = resize_to(img, h, w, cfg.interp)
    with _stage("crop"):
        cropped = crop(resized, size, size, cfg.crop)
        grid = shuffle_mod.partition_grid(size, size, cfg.patch_size)
        if grid.crop_h != size or grid.crop_w != size:
            inner = cropped.pixels[
                grid.offset_y : grid.offset_y + grid.crop_h,
                grid.offset_x : grid.offset_x + grid.crop_w,
            ]
            cropped = RasterImage(np.ascontiguousarray(inner))
    with _stage("shuffle"):
        scrambled, _spec = shuffle_mod.shuffle_image(cropped, cfg.patch_size, cfg.seed)
    with _stage("resample"):
        stack = build_stack(scrambled, cfg.scales, cfg.interp)
    with _stage("entropy"):
        return lep_fast(stack, cfg.stride)


# ---------------------------------------------------------------------------
# tensor serialization


@dataclass(frozen=True)
class FeatureTensor:
    """A dense (h, w, channels) feature map, u8 levels or f32 values."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3:
            raise TensorFormatError("bad_header", "tensor data must be 3-D")
        if self.data.dtype not in (np.uint8, np.float32):
            raise TensorFormatError(
                "bad_dtype", f"unsupported tensor dtype {self.data.dtype}"
            )

    @property
    def dtype_code(self) -> int:
        return DTYPE_LEVEL_U8 if self.data.dtype == np.uint8 else DTYPE_F32

    @classmethod
    def from_lep(cls, lep: LepMap, dtype: str = "level") -> "FeatureTensor":
        if dtype == "level":
            return cls(np.ascontiguousarray(lep.levels))
        if dtype == "f32":
            return cls(LEVEL_VALUES[lep.levels].astype(np.float32))
        raise ConfigError(f"tensor dtype must be 'level' or 'f32', got {dtype!r}")


def write_tensor(tensor: FeatureTensor, sink) -> None:
    h, w, c = tensor.data.shape
    header = MAGIC + struct.pack("<BBHIII", VERSION, tensor.dtype_code, 0, h, w, c)
    payload = np.ascontiguousarray(tensor.data)
    if tensor.dtype_code == DTYPE_F32:
        payload = payload.astype("<f4")
    sink.write(header)
    sink.write(payload.tobytes())


def tensor_bytes(tensor: FeatureTensor) -> bytes:
    buf = io.BytesIO()
    write_tensor(tensor, buf)
    return buf.getvalue()


def _read_exact(source, n: int, what: str) -> bytes:
    data = source.read(n)
    if len(data) != n:
        raise TensorFormatError(
            "truncated", f"stream ended inside {what}: wanted {n} bytes, got {len(data)}"
        )
    return data


def read_tensor(source) -> FeatureTensor:
    magic = _read_exact(source, 4, "magic")
    if magic != MAGIC:
        raise TensorFormatError("bad_magic", f"bad magic {magic!r}")
    version, dtype_code, reserved, h, w, c = struct.unpack(
        "<BBHIII", _read_exact(source, 16, "header")
    )
    if version != VERSION:
        raise TensorFormatError("bad_version", f"unsupported version {version}")
    if dtype_code not in (DTYPE_LEVEL_U8, DTYPE_F32):
        raise TensorFormatError("bad_dtype", f"unknown dtype code {dtype_code}")
    if reserved != 0:
        raise TensorFormatError("bad_header", "reserved header bytes must be zero")
    if h == 0 or w == 0 or c == 0:
        raise TensorFormatError("bad_header", f"degenerate dims {h}x{w}x{c}")
    itemsize = 1 if dtype_code == DTYPE_LEVEL_U8 else 4
    payload = _read_exact(source, h * w * c * itemsize, "payload")
    if dtype_code == DTYPE_LEVEL_U8:
        arr = np.frombuffer(payload, dtype=np.uint8)
    else:
        arr = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    return FeatureTensor(arr.reshape(h, w, c).copy())


def tensor_from_bytes(data: bytes) -> FeatureTensor:
    return read_tensor(io.BytesIO(data))
