"""Command-line frontend.

Subcommands: extract, hist, diff, train, eval, bench. Exit codes:
0 success, 1 usage error, 2 data error, 3 internal error. All file
outputs are written atomically (temp file + rename). MLEP_SEED, when
set, overrides --seed for every subcommand.
"""

import argparse
import json
import os
import sys
import time
import traceback
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .backend import USE_NUMBA, backend_name
from .errors import ConfigError, MlepError
from .evalkit import (
    entropy_histogram_report,
    evaluate,
    extract_features,
    read_manifest,
)
from .fileutil import atomic_write_bytes, atomic_write_text
from .learn import DetectorModel, TrainSettings, train
from .lep import lep_fast, lep_naive, lep_to_u8, _lep_fast_np
from .pipeline import FeatureTensor, MlepConfig, extract_mlep, tensor_bytes
from .pyramid import InterpKernel, ScaleSet
from .raster import CropMode, load_image, save_png
from .spectrum import diff_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_pipeline_flags(p):
    p.add_argument("--patch", type=int, default=2, help="shuffle patch size")
    p.add_argument("--scales", default="1,1/2,1/4",
                   help="comma-separated resampling factors in (0,1], first must be 1")
    p.add_argument("--interp", default="bilinear",
                   choices=["nearest", "bilinear", "bicubic"], help="resampling kernel")
    p.add_argument("--stride", type=int, default=1, choices=[1, 2],
                   help="entropy window stride")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--input-size", type=int, default=224,
                   help="square working size after resize and crop")


def _config_from_args(args) -> MlepConfig:
    seed = args.seed
    env = os.environ.get("MLEP_SEED")
    if env is not None:
        seed = int(env)
    return MlepConfig(
        patch_size=args.patch,
        scales=ScaleSet.parse(args.scales),
        interp=InterpKernel.parse(args.interp),
        stride=args.stride,
        seed=seed,
        input_size=args.input_size,
        crop=CropMode.center(),
    )


def _collect_inputs(path: str) -> list:
    if os.path.isdir(path):
        names = sorted(
            n for n in os.listdir(path)
            if n.lower().endswith(_IMAGE_SUFFIXES)
        )
        return [os.path.join(path, n) for n in names]
    return [path]


def cmd_extract(args) -> int:
    cfg = _config_from_args(args)
    inputs = _collect_inputs(args.input)
    if not inputs:
        print(f"no images found under {args.input}", file=sys.stderr)
        return EXIT_DATA
    os.makedirs(args.out, exist_ok=True)

    def process(path):
        img = load_image(path)
        lep = extract_mlep(img, cfg)
        stem = os.path.splitext(os.path.basename(path))[0]
        out_path = os.path.join(args.out, stem + ".mlep")
        tensor = FeatureTensor.from_lep(lep, dtype=args.dtype)
        atomic_write_bytes(out_path, tensor_bytes(tensor))
        if args.viz:
            for ch, vis in enumerate(lep_to_u8(lep)):
                save_png(vis, os.path.join(args.out, f"{stem}_lep_ch{ch:02d}.png"))
        h, w, c = lep.levels.shape
        return f"{path} -> {out_path} ({h}x{w}x{c})"

    def worker(path):
        try:
            return process(path), None
        except Exception as exc:
            return None, f"{path}: {exc}"

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(worker, inputs))
    else:
        results = [worker(p) for p in inputs]

    failures = 0
    for line, err in results:
        if err is not None:
            failures += 1
            print(f"error: {err}", file=sys.stderr)
        else:
            print(line)
    return EXIT_DATA if failures == len(inputs) else EXIT_OK


def cmd_hist(args) -> int:
    cfg = _config_from_args(args)
    manifest = read_manifest(args.manifest)
    report = entropy_histogram_report(manifest, cfg, jobs=args.jobs, log=sys.stderr)
    atomic_write_text(args.out, report.to_csv())
    for label, name in ((0, "real"), (1, "fake")):
        dist = ", ".join(f"{p:.4f}" for p in report.class_means[label])
        print(f"class {label} ({name}): n={report.n_per_class[label]} levels=[{dist}]")
    if report.skipped:
        print(f"skipped {len(report.skipped)} unreadable records", file=sys.stderr)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_diff(args) -> int:
    cfg = _config_from_args(args)
    real = load_image(args.real)
    fake = load_image(args.fake)
    report = diff_report(real, fake, cfg)
    os.makedirs(args.out, exist_ok=True)
    save_png(report.pixel_diff, os.path.join(args.out, "pixel_diff.png"))
    save_png(report.entropy_diff, os.path.join(args.out, "entropy_diff.png"))
    save_png(report.spectrum_diff, os.path.join(args.out, "spectrum_diff.png"))
    atomic_write_text(
        os.path.join(args.out, "stats.json"), json.dumps(report.stats, indent=2)
    )
    print(
        f"pixel_mad={report.pixel_mad:.4f} entropy_mad={report.entropy_mad:.4f} "
        f"spectrum_mad={report.spectrum_mad:.4f}"
    )
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    manifest = read_manifest(args.manifest)
    records = manifest.split("train")
    features, labels, _ = extract_features(records, cfg, jobs=args.jobs)
    settings = TrainSettings(
        seed=cfg.seed,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch,
        hidden_dim=args.hidden,
    )
    model = train(features, labels, settings)
    atomic_write_text(args.model, model.to_json())
    print(
        f"trained on {len(records)} samples, final loss "
        f"{model.metadata['final_loss']:.6f}, wrote {args.model}"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    manifest = read_manifest(args.manifest)
    with open(args.model, "r", encoding="utf-8") as fp:
        model = DetectorModel.from_json(fp.read())
    report = evaluate(model, manifest, cfg, jobs=args.jobs)
    print(f"Acc: {report.accuracy:.4f}  AP: {report.average_precision:.4f}")
    if args.out:
        atomic_write_text(args.out, report.to_json())
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.iters < 1:
        print("bench: --iters must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    rng = np.random.default_rng(args.seed)
    data = rng.integers(0, 256, size=(args.size, args.size, args.channels), dtype=np.uint8)
    n_pixels = data.size

    fast = lep_fast(data)
    naive = lep_naive(data)
    if not np.array_equal(fast.levels, naive.levels):
        print("bench: fast and naive outputs disagree", file=sys.stderr)
        return EXIT_INTERNAL
    print("outputs verified equal: yes")

    def best_time(fn):
        best = float("inf")
        for _ in range(args.iters):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        return best

    rows = [("lep_naive", best_time(lambda: lep_naive(data)))]
    rows.append((f"lep_fast[{backend_name()}]", best_time(lambda: lep_fast(data))))
    if USE_NUMBA:
        rows.append(("lep_fast[numpy]", best_time(lambda: _lep_fast_np(data, 1))))

    naive_t = rows[0][1]
    print(f"{'kernel':<18} {'ns/pixel':>12} {'speedup_vs_naive':>18}")
    for name, t in rows:
        print(f"{name:<18} {t / n_pixels * 1e9:>12.2f} {naive_t / t:>18.2f}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="mlep",
        description="Local entropy pattern feature extraction and detection tools",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    cpus = os.cpu_count() or 1

    p = sub.add_parser("extract", help="extract feature tensors from images",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--input", required=True, help="image file or directory")
    p.add_argument("--out", required=True, help="output directory")
    _add_pipeline_flags(p)
    p.add_argument("--dtype", default="level", choices=["level", "f32"],
                   help="tensor payload type")
    p.add_argument("--viz", action="store_true", help="also write per-channel PNG maps")
    p.add_argument("--jobs", type=int, default=cpus, help="parallel workers")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("hist", help="per-class entropy level histograms",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True, help="dataset manifest CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_pipeline_flags(p)
    p.add_argument("--jobs", type=int, default=cpus, help="parallel workers")
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("diff", help="pixel/entropy/spectrum difference report",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--real", required=True, help="reference image")
    p.add_argument("--fake", required=True, help="comparison image")
    p.add_argument("--out", required=True, help="output directory")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("train", help="train the histogram detector",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True, help="dataset manifest CSV")
    p.add_argument("--model", required=True, help="output model JSON path")
    _add_pipeline_flags(p)
    p.add_argument("--lr", type=float, default=0.002, help="learning rate")
    p.add_argument("--batch", type=int, default=64, help="mini-batch size")
    p.add_argument("--epochs", type=int, default=200, help="training epochs")
    p.add_argument("--hidden", type=int, default=16, help="hidden layer width")
    p.add_argument("--jobs", type=int, default=cpus, help="parallel workers")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on the test split",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True, help="dataset manifest CSV")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--out", default=None, help="optional report JSON path")
    _add_pipeline_flags(p)
    p.add_argument("--jobs", type=int, default=cpus, help="parallel workers")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="benchmark entropy kernels",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--size", type=int, default=224, help="stack height and width")
    p.add_argument("--channels", type=int, default=9, help="stack channels")
    p.add_argument("--iters", type=int, default=5, help="timing repetitions")
    p.add_argument("--seed", type=int, default=0, help="random data seed")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"mlep {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MlepError, FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"mlep {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
