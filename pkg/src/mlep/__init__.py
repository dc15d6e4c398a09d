"""Multi-granularity local entropy patterns for image forensics.

Pipeline: per-channel patch shuffling, multi-scale resampling, and
discrete 2x2-window entropy maps, plus a small trainable detector,
difference-map diagnostics and evaluation metrics.
"""

from .backend import HAVE_NUMBA, USE_NUMBA, backend_name
from .errors import (
    ConfigError,
    DecodeError,
    DimensionError,
    ManifestError,
    MetricError,
    MlepError,
    TensorFormatError,
    TrainingError,
)
from .raster import CropMode, RasterImage, crop, decode_image, encode_png, load_image, resize_to, save_png
from .shuffle import PatchGrid, ShuffleSpec, derive_seed, partition_grid, shuffle_image, unshuffle_image
from .pyramid import InterpKernel, ScaleSet, ScaledStack, build_stack, downsample, upsample
from .lep import (
    LEVEL_U8,
    LEVEL_VALUES,
    EntropyLevel,
    LepMap,
    lep_fast,
    lep_naive,
    lep_to_u8,
    window_entropy,
)
from .pipeline import FeatureTensor, MlepConfig, extract_mlep, read_tensor, write_tensor
from .spectrum import DiffReport, Spectrum2d, dft2, diff_report, idft2
from .learn import DetectorModel, TrainSettings, bce_loss, featurize, predict, train
from .evalkit import (
    EvalReport,
    HistReport,
    Manifest,
    ManifestRecord,
    accuracy,
    average_precision,
    entropy_histogram_report,
    evaluate,
    extract_features,
    parse_manifest,
    read_manifest,
    write_manifest,
)
from .synthetic import build_corpus, synth_fake, synth_pair, synth_photo_pair, synth_real

__version__ = "0.1.0"
