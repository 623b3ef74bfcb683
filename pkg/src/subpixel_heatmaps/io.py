"""File formats: ``.pts`` annotations, JSON manifests and CSV reports.

Manifest JSON is an array of records::

    [{"id": "img0", "points": [[x, y], ...],
      "visibility": [true, ...],        # optional, default all visible
      "bbox": [x, y, w, h],             # optional
      "ic_indices": [36, 45]}]          # optional

CSV floats are written with 9 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import BBox, LandmarkSet

REPORT_HEADER = (
    "run_id",
    "encoder",
    "decoder",
    "sigma",
    "window",
    "tau",
    "n",
    "nme_mean",
    "auc",
    "fr",
    "mean_px_err",
)
SAMPLE_HEADER = ("run_id", "sample_id", "nme", "mean_px_err")
PRED_HEADER = ("id", "point", "x", "y")


class PtsFormatError(ValueError):
    """Base class for ``.pts`` parse failures."""


class PtsHeaderError(PtsFormatError):
    pass


class PtsCountError(PtsFormatError):
    pass


class PtsValueError(PtsFormatError):
    pass


class ManifestError(ValueError):
    pass


# --------------------------------------------------------------------------
# .pts
# --------------------------------------------------------------------------


def parse_pts(text: str) -> LandmarkSet:
    """Parse a 300W-style ``.pts`` annotation; all points are visible."""
    lines = [ln.strip() for ln in text.replace("\r\n", "\n").replace("\r", "\n").split("\n")]
    lines = [ln for ln in lines if ln]
    n_points = None
    i = 0
    while i < len(lines) and lines[i] != "{":
        key, sep, value = lines[i].partition(":")
        if not sep:
            raise PtsHeaderError(f"line {i + 1}: expected 'key: value' header, got {lines[i]!r}")
        if key.strip() == "n_points":
            try:
                n_points = int(value.strip())
            except ValueError:
                raise PtsHeaderError(f"line {i + 1}: n_points is not an integer: {value.strip()!r}") from None
        i += 1
    if n_points is None:
        raise PtsHeaderError("missing n_points header")
    if n_points < 1:
        raise PtsHeaderError(f"n_points must be positive, got {n_points}")
    if i == len(lines):
        raise PtsHeaderError("missing '{' opening the point block")
    try:
        end = lines.index("}", i + 1)
    except ValueError:
        raise PtsHeaderError("missing '}' closing the point block") from None

    body = lines[i + 1 : end]
    if len(body) != n_points:
        raise PtsCountError(f"n_points is {n_points} but {len(body)} points were found")
    pts = []
    for j, ln in enumerate(body):
        tokens = ln.split()
        if len(tokens) != 2:
            raise PtsValueError(f"point {j}: expected 2 values, got {len(tokens)}: {ln!r}")
        try:
            x, y = float(tokens[0]), float(tokens[1])
        except ValueError:
            raise PtsValueError(f"point {j}: non-numeric coordinate in {ln!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise PtsValueError(f"point {j}: non-finite coordinate in {ln!r}")
        pts.append((x, y))
    return LandmarkSet(np.array(pts))


def format_pts(landmarks: LandmarkSet) -> str:
    rows = "\n".join(f"{x:.9g} {y:.9g}" for x, y in landmarks.points)
    return f"version: 1\nn_points: {len(landmarks)}\n{{\n{rows}\n}}\n"


# --------------------------------------------------------------------------
# manifest
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ManifestRecord:
    id: str
    landmarks: LandmarkSet
    bbox: BBox | None = None
    ic_indices: tuple[int, int] | None = None


@dataclass(eq=False)
class DatasetManifest:
    records: list[ManifestRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        k = None
        for rec in self.records:
            if rec.id in seen:
                raise ManifestError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if k is None:
                k = len(rec.landmarks)
            elif len(rec.landmarks) != k:
                raise ManifestError(
                    f"record {rec.id!r} has {len(rec.landmarks)} landmarks, expected {k}"
                )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def num_landmarks(self) -> int:
        return len(self.records[0].landmarks) if self.records else 0

    def to_json(self) -> list[dict]:
        out = []
        for rec in self.records:
            item: dict = {"id": rec.id, "points": rec.landmarks.points.tolist()}
            if not rec.landmarks.visibility.all():
                item["visibility"] = rec.landmarks.visibility.tolist()
            if rec.bbox is not None:
                item["bbox"] = [rec.bbox.x_min, rec.bbox.y_min, rec.bbox.width, rec.bbox.height]
            if rec.ic_indices is not None:
                item["ic_indices"] = list(rec.ic_indices)
            out.append(item)
        return out


def _record_from_json(i: int, item) -> ManifestRecord:
    where = f"record {i}"
    if not isinstance(item, dict):
        raise ManifestError(f"{where}: expected an object")
    unknown = set(item) - {"id", "points", "visibility", "bbox", "ic_indices"}
    if unknown:
        raise ManifestError(f"{where}: unknown field(s) {sorted(unknown)}")
    rid = item.get("id")
    if not isinstance(rid, str) or not rid:
        raise ManifestError(f"{where}: field 'id' must be a non-empty string")
    where = f"record {i} ({rid!r})"
    try:
        pts = np.asarray(item["points"], dtype=np.float64)
    except KeyError:
        raise ManifestError(f"{where}: missing field 'points'") from None
    except (TypeError, ValueError):
        raise ManifestError(f"{where}: field 'points' must be a list of [x, y] numbers") from None
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ManifestError(f"{where}: field 'points' must be a non-empty list of [x, y] pairs")
    vis = item.get("visibility")
    if vis is not None:
        if not isinstance(vis, list) or not all(isinstance(v, bool) for v in vis):
            raise ManifestError(f"{where}: field 'visibility' must be a list of booleans")
        if len(vis) != pts.shape[0]:
            raise ManifestError(f"{where}: field 'visibility' has {len(vis)} entries for {pts.shape[0]} points")
    bbox = item.get("bbox")
    if bbox is not None:
        if not (isinstance(bbox, list) and len(bbox) == 4 and all(isinstance(v, (int, float)) for v in bbox)):
            raise ManifestError(f"{where}: field 'bbox' must be [x, y, w, h]")
        bbox = BBox(*map(float, bbox))
        if not (bbox.width > 0 and bbox.height > 0):
            raise ManifestError(f"{where}: field 'bbox' must have positive width and height")
    ic = item.get("ic_indices")
    if ic is not None:
        if not (isinstance(ic, list) and len(ic) == 2 and all(isinstance(v, int) for v in ic)):
            raise ManifestError(f"{where}: field 'ic_indices' must be two integers")
        ic = (ic[0], ic[1])
    try:
        landmarks = LandmarkSet(pts, vis)
    except ValueError as exc:
        raise ManifestError(f"{where}: {exc}") from None
    return ManifestRecord(rid, landmarks, bbox, ic)


def manifest_from_json(data) -> DatasetManifest:
    if not isinstance(data, list):
        raise ManifestError("manifest must be a JSON array of records")
    return DatasetManifest([_record_from_json(i, item) for i, item in enumerate(data)])


def load_manifest(path: str | os.PathLike) -> DatasetManifest:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return manifest_from_json(data)


def save_manifest(manifest: DatasetManifest, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(manifest.to_json(), indent=1) + "\n", encoding="utf-8")


def manifest_from_pts_dir(path: str | os.PathLike) -> DatasetManifest:
    files = sorted(Path(path).glob("*.pts"))
    if not files:
        raise FileNotFoundError(f"no .pts files in {path}")
    records = []
    for f in files:
        try:
            records.append(ManifestRecord(f.stem, parse_pts(f.read_text(encoding="utf-8"))))
        except PtsFormatError as exc:
            raise type(exc)(f"{f.name}: {exc}") from None
    return DatasetManifest(records)


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def format_csv(rows: Iterable[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(rows: Iterable[Sequence], path: str | os.PathLike, header: Sequence[str] = REPORT_HEADER) -> None:
    text = format_csv(rows, header)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_csv(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def read_predictions(path: str | os.PathLike, manifest: DatasetManifest) -> dict[str, LandmarkSet]:
    """Read an ``id,point,x,y`` CSV into per-record landmark sets.

    Points absent from the file are reported as invisible (NaN) predictions.
    """
    k = manifest.num_landmarks
    ids = {rec.id for rec in manifest.records}
    coords = {rid: np.full((k, 2), np.nan) for rid in ids}
    rows = read_csv(path)
    for line, row in enumerate(rows, start=2):
        try:
            rid, point, x, y = row["id"], int(row["point"]), float(row["x"]), float(row["y"])
        except (KeyError, TypeError, ValueError):
            raise ManifestError(f"{path}: line {line}: expected columns {','.join(PRED_HEADER)}") from None
        if rid not in ids:
            raise ManifestError(f"{path}: line {line}: unknown id {rid!r}")
        if not 0 <= point < k:
            raise ManifestError(f"{path}: line {line}: point index {point} out of range 0..{k - 1}")
        coords[rid][point] = (x, y)
    return {rid: LandmarkSet(c, ~np.isnan(c).any(axis=1)) for rid, c in coords.items()}
