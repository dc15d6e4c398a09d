"""Dataset manifests, detection metrics and per-class entropy reports.

Manifests are CSV files with header ``path,label,split`` where label is
0 (real) or 1 (fake) and split is ``train`` or ``test``. Accuracy uses
a 0.5 threshold with >= counting as positive. Average precision is the
un-interpolated form: the mean of precision at each positive-labeled
rank in the score-sorted list (stable ties by original index), computed
in exact rational arithmetic.
"""

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ManifestError, MetricError
from .fileutil import atomic_write_text
from .learn import DetectorModel, featurize, predict
from .lep import LEVEL_VALUES
from .pipeline import MlepConfig, extract_mlep
from .raster import load_image
from .shuffle import derive_seed

VALID_SPLITS = ("train", "test")


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    label: int
    split: str


@dataclass(frozen=True)
class Manifest:
    records: tuple

    def split(self, name: str) -> list:
        return [r for r in self.records if r.split == name]

    def __len__(self) -> int:
        return len(self.records)


def read_manifest(path) -> Manifest:
    with open(path, "r", newline="", encoding="utf-8") as fp:
        return parse_manifest(fp.read(), source=str(path))


def parse_manifest(text: str, source: str = "<memory>") -> Manifest:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or [c.strip() for c in rows[0]] != ["path", "label", "split"]:
        raise ManifestError(f"{source}: expected header 'path,label,split'")
    records = []
    seen = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ManifestError(f"{source}:{lineno}: expected 3 columns, got {len(row)}")
        p, label_s, split = row[0].strip(), row[1].strip(), row[2].strip()
        if label_s not in ("0", "1"):
            raise ManifestError(f"{source}:{lineno}: label must be 0 or 1, got {label_s!r}")
        if split not in VALID_SPLITS:
            raise ManifestError(f"{source}:{lineno}: split must be train or test, got {split!r}")
        if p in seen:
            raise ManifestError(f"{source}:{lineno}: duplicate path {p!r}")
        seen.add(p)
        records.append(ManifestRecord(path=p, label=int(label_s), split=split))
    if not records:
        raise ManifestError(f"{source}: manifest has no records")
    return Manifest(records=tuple(records))


def write_manifest(records, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["path", "label", "split"])
    for r in records:
        writer.writerow([r.path, r.label, r.split])
    atomic_write_text(path, buf.getvalue())


# ---------------------------------------------------------------------------
# metrics


def accuracy(preds, labels, threshold: float = 0.5) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels)
    if preds.size == 0 or preds.shape != labels.shape:
        raise MetricError("accuracy needs equal, nonzero-length inputs")
    decisions = (preds >= threshold).astype(np.int64)
    return float((decisions == labels).mean())


def average_precision(scores, labels) -> float:
    scores = list(scores)
    labels = list(labels)
    if len(scores) != len(labels) or not scores:
        raise MetricError("average_precision needs equal, nonzero-length inputs")
    n_pos = sum(1 for y in labels if y == 1)
    if n_pos == 0:
        raise MetricError("average_precision is undefined without positive labels")
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    total = Fraction(0)
    hits = 0
    for rank, i in enumerate(order, start=1):
        if labels[i] == 1:
            hits += 1
            total += Fraction(hits, rank)
    return float(total / n_pos)


# ---------------------------------------------------------------------------
# batch feature extraction


def _extract_one(record: ManifestRecord, cfg: MlepConfig) -> np.ndarray:
    img = load_image(record.path)
    per_image = cfg.with_seed(derive_seed(cfg.seed, record.path))
    return featurize(extract_mlep(img, per_image))


def extract_features(records, cfg: MlepConfig, jobs: int = 1,
                     on_error: str = "raise"):
    """Features and labels for manifest records, in manifest order.

    on_error='skip' drops unreadable records and returns them in the
    third slot; 'raise' re-raises with the offending path attached.
    """

    def worker(record):
        try:
            return _extract_one(record, cfg), None
        except Exception as exc:
            if on_error == "raise":
                raise type(exc)(f"{record.path}: {exc}") from exc
            return None, f"{record.path}: {exc}"

    records = list(records)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, records))
    else:
        results = [worker(r) for r in records]

    feats, labels, skipped = [], [], []
    for record, (feat, err) in zip(records, results):
        if err is not None:
            skipped.append(err)
            continue
        feats.append(feat)
        labels.append(record.label)
    features = np.stack(feats) if feats else np.empty((0, 0))
    return features, np.asarray(labels, dtype=np.int64), skipped


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class HistReport:
    """Mean scale-1 entropy-level distribution per class."""

    class_means: dict  # label -> np.ndarray of 5 probabilities
    n_per_class: dict
    skipped: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["class", "level_value", "probability"])
        for label in sorted(self.class_means):
            for value, prob in zip(LEVEL_VALUES, self.class_means[label]):
                writer.writerow([label, f"{value:.6f}", f"{prob:.9f}"])
        return buf.getvalue()


def entropy_histogram_report(manifest: Manifest, cfg: MlepConfig,
                             jobs: int = 1, log=None) -> HistReport:
    """Fig-style class comparison of scale-1 level distributions."""
    records = list(manifest.records)
    features, labels, skipped = extract_features(records, cfg, jobs=jobs, on_error="skip")
    if log is not None:
        for line in skipped:
            print(f"warning: skipped {line}", file=log)
    sums = {0: np.zeros(5), 1: np.zeros(5)}
    counts = {0: 0, 1: 0}
    for feat, label in zip(features, labels):
        # scale-1 block = first C channel groups; C inferred from the
        # configured scale count
        k = len(cfg.scales)
        c = feat.size // (5 * k)
        block = feat[: 5 * c].reshape(c, 5)
        sums[int(label)] += block.mean(axis=0)
        counts[int(label)] += 1
    means = {
        label: (sums[label] / counts[label] if counts[label] else np.zeros(5))
        for label in (0, 1)
    }
    return HistReport(class_means=means, n_per_class=counts, skipped=skipped)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    average_precision: float
    n_samples: int
    threshold: float
    per_class: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "accuracy": self.accuracy,
                "average_precision": self.average_precision,
                "n_samples": self.n_samples,
                "threshold": self.threshold,
                "per_class": self.per_class,
            },
            indent=2,
        )


def evaluate(model: DetectorModel, manifest: Manifest, cfg: MlepConfig,
             jobs: int = 1, threshold: float = 0.5) -> EvalReport:
    """Run the detector over the manifest's test split."""
    records = manifest.split("test")
    if not records:
        raise ManifestError("manifest has no test records")
    features, labels, _ = extract_features(records, cfg, jobs=jobs, on_error="raise")
    preds = predict(model, features)
    return EvalReport(
        accuracy=accuracy(preds, labels, threshold=threshold),
        average_precision=average_precision(preds.tolist(), labels.tolist()),
        n_samples=len(records),
        threshold=threshold,
        per_class={
            "real": int((labels == 0).sum()),
            "fake": int((labels == 1).sum()),
        },
    )
