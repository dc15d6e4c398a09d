"""Local entropy patterns over 2x2 windows.

A 2x2 window holds four u8 values; its Shannon entropy depends only on
the multiset partition of those values, so exactly five levels exist:

  index 0: all four equal            0.0 bits
  index 1: three equal + one         2 - (3/4)*log2(3) ~ 0.811278 bits
  index 2: two pairs                 1.0 bits
  index 3: one pair + two singles    1.5 bits
  index 4: all distinct              2.0 bits

Maps store the level index (u8), which is exact and compact; the float
values are available through LEVEL_VALUES.

Two implementations are provided. ``lep_naive`` evaluates the entropy
formula per window and snaps to the nearest level; it is the reference.
``lep_fast`` classifies each window by its 6-bit pairwise-equality
signature through a precomputed 64-entry table and must match the
reference bit for bit.
"""

import itertools
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .backend import USE_NUMBA
from .errors import DimensionError
from .raster import RasterImage

LEVEL_VALUES = np.array([0.0, 2.0 - 0.75 * np.log2(3.0), 1.0, 1.5, 2.0])

# Display mapping: round(value / 2 * 255), half away from zero.
LEVEL_U8 = np.floor(LEVEL_VALUES / 2.0 * 255.0 + 0.5).astype(np.uint8)


class EntropyLevel(IntEnum):
    CONSTANT = 0
    THREE_ONE = 1
    TWO_PAIRS = 2
    PAIR_PLUS_TWO = 3
    ALL_DISTINCT = 4

    @property
    def bits(self) -> float:
        return float(LEVEL_VALUES[self])


def _partition_level(a: int, b: int, c: int, d: int) -> int:
    vals = sorted((a, b, c, d))
    distinct = len(set(vals))
    if distinct == 1:
        return 0
    if distinct == 2:
        # counts are either 3+1 or 2+2; with sorted values the middle
        # two are equal exactly in the 3+1 case or split in 2+2
        return 1 if vals[1] == vals[2] else 2
    if distinct == 3:
        return 3
    return 4


def window_entropy(a: int, b: int, c: int, d: int) -> EntropyLevel:
    """Entropy level of one 2x2 window, by multiset partition."""
    return EntropyLevel(_partition_level(int(a), int(b), int(c), int(d)))


def _build_signature_table() -> np.ndarray:
    """Level for each 6-bit pairwise-equality signature.

    Bit k of the signature is the equality of pair k in the order
    (a,b), (a,c), (a,d), (b,c), (b,d), (c,d). Equality is transitive,
    so only 15 of the 64 signatures can occur; the rest keep level 0
    and are unreachable for real pixel data.
    """
    table = np.zeros(64, dtype=np.uint8)
    for a, b, c, d in itertools.product(range(4), repeat=4):
        sig = (
            (a == b)
            | ((a == c) << 1)
            | ((a == d) << 2)
            | ((b == c) << 3)
            | ((b == d) << 4)
            | ((c == d) << 5)
        )
        table[sig] = _partition_level(a, b, c, d)
    return table


SIGNATURE_TABLE = _build_signature_table()

REALIZABLE_SIGNATURES = frozenset(
    int(
        (a == b)
        | ((a == c) << 1)
        | ((a == d) << 2)
        | ((b == c) << 3)
        | ((b == d) << 4)
        | ((c == d) << 5)
    )
    for a, b, c, d in itertools.product(range(4), repeat=4)
)


@dataclass(frozen=True)
class LepMap:
    """Grid of entropy-level indices, one layer per stack channel."""

    levels: np.ndarray  # (h, w, channels) uint8, values 0..4
    stride: int

    def __post_init__(self):
        if self.levels.ndim != 3 or self.levels.dtype != np.uint8:
            raise DimensionError("level map must be (h, w, channels) uint8")
        if self.stride not in (1, 2):
            raise DimensionError(f"stride must be 1 or 2, got {self.stride}")
        if self.levels.size and int(self.levels.max()) > 4:
            raise DimensionError("level map contains indices outside 0..4")

    @property
    def channels(self) -> int:
        return self.levels.shape[2]


def _stack_planes(stack) -> np.ndarray:
    if isinstance(stack, np.ndarray):
        data = stack
    elif hasattr(stack, "data") and isinstance(stack.data, np.ndarray):
        data = stack.data
    else:
        data = np.asarray(stack)
    if data.ndim == 2:
        data = data[:, :, None]
    if data.ndim != 3 or data.dtype != np.uint8:
        raise DimensionError("expected (H, W, C) uint8 data")
    if data.shape[0] < 2 or data.shape[1] < 2:
        raise DimensionError("need at least one 2x2 window")
    return data


def _check_stride(stride: int) -> None:
    if stride not in (1, 2):
        raise DimensionError(f"stride must be 1 or 2, got {stride}")


def lep_naive(stack, stride: int = 1) -> LepMap:
    """Reference path: per-window Shannon entropy from the definition.

    For each window element the count of equal elements c_i gives
    entropy -(1/4) * sum_i log2(c_i / 4); the result snaps to the
    nearest of the five levels.
    """
    _check_stride(stride)
    data = _stack_planes(stack)
    a = data[0:-1:stride, 0:-1:stride, :]
    b = data[0:-1:stride, 1::stride, :]
    c = data[1::stride, 0:-1:stride, :]
    d = data[1::stride, 1::stride, :]
    win = np.stack([a, b, c, d], axis=-1).astype(np.int16)
    counts = (win[..., :, None] == win[..., None, :]).sum(axis=-1)
    ent = -0.25 * np.log2(counts / 4.0).sum(axis=-1)
    levels = np.argmin(np.abs(ent[..., None] - LEVEL_VALUES), axis=-1)
    return LepMap(levels=levels.astype(np.uint8), stride=stride)


def _lep_fast_np(data: np.ndarray, stride: int) -> np.ndarray:
    a = data[:-1, :-1, :]
    b = data[:-1, 1:, :]
    c = data[1:, :-1, :]
    d = data[1:, 1:, :]
    sig = (
        (a == b).astype(np.uint8)
        | ((a == c).astype(np.uint8) << 1)
        | ((a == d).astype(np.uint8) << 2)
        | ((b == c).astype(np.uint8) << 3)
        | ((b == d).astype(np.uint8) << 4)
        | ((c == d).astype(np.uint8) << 5)
    )
    return np.ascontiguousarray(SIGNATURE_TABLE[sig][::stride, ::stride, :])


if USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _lep_fast_nb(data, stride, table, out):  # pragma: no cover - checked via equality tests
        oh, ow, nc = out.shape
        for ch in range(nc):
            for i in range(oh):
                r = i * stride
                for j in range(ow):
                    q = j * stride
                    a = data[r, q, ch]
                    b = data[r, q + 1, ch]
                    c = data[r + 1, q, ch]
                    d = data[r + 1, q + 1, ch]
                    sig = 0
                    if a == b:
                        sig |= 1
                    if a == c:
                        sig |= 2
                    if a == d:
                        sig |= 4
                    if b == c:
                        sig |= 8
                    if b == d:
                        sig |= 16
                    if c == d:
                        sig |= 32
                    out[i, j, ch] = table[sig]


def lep_fast(stack, stride: int = 1) -> LepMap:
    """Signature-table path; bit-identical to lep_naive."""
    _check_stride(stride)
    data = _stack_planes(stack)
    h, w, nc = data.shape
    oh = (h - 2) // stride + 1
    ow = (w - 2) // stride + 1
    if USE_NUMBA:
        out = np.empty((oh, ow, nc), dtype=np.uint8)
        _lep_fast_nb(np.ascontiguousarray(data), stride, SIGNATURE_TABLE, out)
        return LepMap(levels=out, stride=stride)
    return LepMap(levels=_lep_fast_np(data, stride), stride=stride)


def lep_to_u8(lep: LepMap) -> list[RasterImage]:
    """One grayscale image per channel; levels scaled onto [0, 255]."""
    values = LEVEL_U8[lep.levels]
    return [
        RasterImage(np.ascontiguousarray(values[:, :, ch : ch + 1]))
        for ch in range(lep.channels)
    ]
