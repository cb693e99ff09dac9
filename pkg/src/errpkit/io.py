"""On-disk formats.

An epoch container is a directory holding ``manifest.json``, ``data.bin``
(raw little-endian float32, trial-major then channel then sample) and
``labels.bin`` (one byte per trial).  A continuous container holds a
channels-by-samples float32 block plus ``events.json``.  Reports are
canonical JSON: sorted keys, fixed separators, native floats.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ErrpkitError
from .labels import FAILURE, LABEL_NAMES, SUCCESS
from .preprocessing import ContinuousRecording, EpochSet

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
DATA_NAME = "data.bin"
LABELS_NAME = "labels.bin"
EVENTS_NAME = "events.json"

REPORT_VERSION = 1
_REPORT_KEYS = {
    "format_version", "meta", "config", "seed", "datasets", "permutation_test",
}


class ContainerError(ErrpkitError):
    """Container on disk violates the format."""


def _label_codes() -> dict[str, str]:
    return {str(code): name for code, name in LABEL_NAMES.items()}


def write_epoch_container(path, es: EpochSet, extra_manifest: dict | None = None) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "epochs",
        "n_trials": len(es),
        "n_channels": es.n_channels,
        "n_samples": es.n_samples,
        "fs_hz": float(es.fs_hz),
        "t0_offset_s": float(es.t0_offset_s),
        "channel_names": list(es.channels),
        "label_codes": _label_codes(),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    (path / MANIFEST_NAME).write_text(canonical_json(manifest))
    (path / DATA_NAME).write_bytes(np.ascontiguousarray(es.data, dtype="<f4").tobytes())
    (path / LABELS_NAME).write_bytes(es.labels.astype(np.uint8).tobytes())
    return path


def read_epoch_container(path) -> EpochSet:
    path = Path(path)
    problems = validate_epoch_container(path)
    if problems:
        raise ContainerError("; ".join(problems))
    manifest = json.loads((path / MANIFEST_NAME).read_text())
    n, c, s = manifest["n_trials"], manifest["n_channels"], manifest["n_samples"]
    data = np.frombuffer((path / DATA_NAME).read_bytes(), dtype="<f4").reshape(n, c, s)
    labels = np.frombuffer((path / LABELS_NAME).read_bytes(), dtype=np.uint8)
    return EpochSet(
        data.astype(np.float64),
        labels.astype(np.int64),
        manifest["fs_hz"],
        manifest["t0_offset_s"],
        list(manifest["channel_names"]),
    )


def validate_epoch_container(path) -> list[str]:
    """Check every container invariant; return a list of violations (empty = ok)."""
    path = Path(path)
    problems: list[str] = []
    mpath = path / MANIFEST_NAME
    if not mpath.is_file():
        return [f"missing {MANIFEST_NAME}"]
    try:
        manifest = json.loads(mpath.read_text())
    except json.JSONDecodeError as exc:
        return [f"unreadable manifest: {exc}"]

    required = ["format_version", "n_trials", "n_channels", "n_samples",
                "fs_hz", "t0_offset_s", "channel_names", "label_codes"]
    for key in required:
        if key not in manifest:
            problems.append(f"manifest missing field {key!r}")
    if problems:
        return problems
    if manifest["format_version"] > FORMAT_VERSION:
        problems.append(
            f"format_version {manifest['format_version']} is newer than supported {FORMAT_VERSION}"
        )
    n, c, s = manifest["n_trials"], manifest["n_channels"], manifest["n_samples"]
    if manifest["fs_hz"] <= 0:
        problems.append("fs_hz must be positive")
    if len(manifest["channel_names"]) != c:
        problems.append(
            f"channel_names has {len(manifest['channel_names'])} entries, expected {c}"
        )

    dpath = path / DATA_NAME
    if not dpath.is_file():
        problems.append(f"missing {DATA_NAME}")
    else:
        expected = 4 * n * c * s
        actual = dpath.stat().st_size
        if actual != expected:
            problems.append(f"data file is {actual} bytes, expected {expected}")

    lpath = path / LABELS_NAME
    if not lpath.is_file():
        problems.append(f"missing {LABELS_NAME}")
    else:
        raw = lpath.read_bytes()
        if len(raw) != n:
            problems.append(f"labels file has {len(raw)} bytes, expected {n}")
        declared = {int(k) for k in manifest["label_codes"]}
        bad = sorted({b for b in raw} - declared)
        if bad:
            problems.append(f"labels file contains undeclared codes {bad}")
    return problems


def write_continuous_container(path, rec: ContinuousRecording, event_labels) -> Path:
    """Continuous recording plus labelled events, for the preprocess command."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    event_labels = list(event_labels)
    if len(event_labels) != len(rec.events):
        raise ValueError("need one label per event")
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "continuous",
        "n_channels": rec.n_channels,
        "n_samples": rec.n_samples,
        "fs_hz": float(rec.fs_hz),
        "channel_names": list(rec.channels),
        "label_codes": _label_codes(),
    }
    (path / MANIFEST_NAME).write_text(canonical_json(manifest))
    (path / DATA_NAME).write_bytes(np.ascontiguousarray(rec.data, dtype="<f4").tobytes())
    events = [
        {"sample": int(s), "code": int(code), "label": int(lab)}
        for (s, code), lab in zip(rec.events, event_labels)
    ]
    (path / EVENTS_NAME).write_text(canonical_json(events))
    return path


def read_continuous_container(path) -> tuple[ContinuousRecording, list[int]]:
    path = Path(path)
    manifest = json.loads((path / MANIFEST_NAME).read_text())
    if manifest.get("kind") != "continuous":
        raise ContainerError(f"{path} is not a continuous container")
    c, s = manifest["n_channels"], manifest["n_samples"]
    data = np.frombuffer((path / DATA_NAME).read_bytes(), dtype="<f4").reshape(c, s)
    events_raw = json.loads((path / EVENTS_NAME).read_text())
    events = [(e["sample"], e["code"]) for e in events_raw]
    labels = [e["label"] for e in events_raw]
    rec = ContinuousRecording(manifest["fs_hz"], list(manifest["channel_names"]),
                              data.astype(np.float64), events)
    return rec, labels


def _to_native(obj):
    if isinstance(obj, dict):
        return {str(k): _to_native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_native(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(_to_native(obj), sort_keys=True, indent=2) + "\n"


def write_report(path, report: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    unknown = set(report) - _REPORT_KEYS
    if unknown:
        raise ValueError(f"refusing to write unknown report fields {sorted(unknown)}")
    path.write_text(canonical_json(report))
    return path


def read_report(path) -> dict:
    """Strict reader: unknown top-level fields or a newer version are errors."""
    report = json.loads(Path(path).read_text())
    if not isinstance(report, dict):
        raise ContainerError("report is not a JSON object")
    version = report.get("format_version")
    if version is None or version > REPORT_VERSION:
        raise ContainerError(
            f"report format_version {version!r} is not supported (max {REPORT_VERSION})"
        )
    unknown = sorted(set(report) - _REPORT_KEYS)
    if unknown:
        raise ContainerError(f"report contains unknown fields {unknown}")
    return report


def sha256_hex(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr, dtype=np.float64).tobytes()).hexdigest()
