"""JSON run reports, baseline sidecars and comparison tables."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional

from .dataset import TimeSeriesSet, load_timeseries_csv
from .modal import compare_modes
from .modes import ModalSet
from .pipeline import IdentificationResult, IdentifyConfig, identify

__all__ = [
    "SCHEMA_VERSION",
    "TOOL_NAME",
    "build_report",
    "dump_json",
    "write_json",
    "read_json",
    "sha256_file",
    "load_modal_set",
    "baseline_document",
    "reproduce",
    "comparison_document",
    "format_comparison",
]

SCHEMA_VERSION = 1
TOOL_NAME = "nextlf"

# Modes further apart than this (relative) are never paired in comparisons.
PAIR_MAX_DF = 0.05


def _version() -> str:
    from . import __version__

    return __version__


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_json(doc: dict, path) -> None:
    path = Path(path)
    try:
        path.write_text(dump_json(doc), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return doc


def baseline_document(modes: ModalSet, source: Optional[dict] = None) -> dict:
    """Sidecar holding the analytical modes of a simulated record."""
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "baseline",
        "tool": {"name": TOOL_NAME, "version": _version()},
        "source": source or {},
        "modal_set": modes.to_dict(),
    }


def load_modal_set(doc_or_path) -> ModalSet:
    """ModalSet from a baseline sidecar or a run report."""
    doc = read_json(doc_or_path) if not isinstance(doc_or_path, dict) else doc_or_path
    key = "modal_set" if "modal_set" in doc else "modes"
    if key not in doc:
        raise ValueError("document holds neither a baseline nor identified modes")
    try:
        return ModalSet.from_dict(doc[key])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed modal set: {exc}") from None


def build_report(
    result: IdentificationResult,
    config: IdentifyConfig,
    data_path=None,
    ts: Optional[TimeSeriesSet] = None,
    baseline: Optional[ModalSet] = None,
    include_timing: bool = False,
) -> dict:
    """Assemble the JSON report of one identification run.

    Timing is left out unless asked for, so that repeated runs produce
    byte-identical reports.
    """
    data = {}
    if data_path is not None:
        data["path"] = str(data_path)
        data["sha256"] = sha256_file(data_path)
    if ts is not None:
        data.update(fs=ts.fs, n_channels=ts.n_channels, n_samples=ts.n_samples)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "identification",
        "tool": {"name": TOOL_NAME, "version": _version()},
        "method": config.method,
        "config": config.to_dict(),
        "data": data,
        "modes": result.modes.to_dict(),
        "comparison": None,
        "diagram": result.diagram.to_dict(),
    }
    if baseline is not None:
        doc["comparison"] = compare_modes(baseline, result.modes, PAIR_MAX_DF)
    if include_timing:
        doc["timing"] = dict(result.timing)
    return doc


def reproduce(report: dict) -> IdentificationResult:
    """Re-run an identification from the configuration echoed in `report`."""
    data = report.get("data", {})
    if "path" not in data:
        raise ValueError("report does not record its input data path")
    digest = sha256_file(data["path"])
    if data.get("sha256") and digest != data["sha256"]:
        raise ValueError(f"{data['path']} changed since the report was written")
    ts = load_timeseries_csv(data["path"])
    return identify(ts, IdentifyConfig.from_dict(report["config"]))


def _label(doc: dict, fallback: str) -> str:
    return doc.get("method") or doc.get("kind") or fallback


def comparison_document(a: dict, b: dict) -> dict:
    ma, mb = load_modal_set(a), load_modal_set(b)
    cmp = compare_modes(ma, mb, PAIR_MAX_DF)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "comparison",
        "a": _label(a, "a"),
        "b": _label(b, "b"),
        "max_df": PAIR_MAX_DF,
        **cmp,
        "notice": "" if cmp["pairs"] else "no modes could be paired within the frequency tolerance",
    }


def format_comparison(doc: dict) -> str:
    """Aligned text table: frequency, damping and MAC for each paired mode."""
    a, b = doc["a"], doc["b"]
    header = [
        "Mode #",
        f"f_n {a} [Hz]",
        f"f_n {b} [Hz]",
        f"zeta_n {a} [%]",
        f"zeta_n {b} [%]",
        f"MAC {a} vs {b}",
    ]
    rows = [
        [
            str(r["mode"]),
            f"{r['f_ref']:.4f}",
            f"{r['f_test']:.4f}",
            f"{100 * r['zeta_ref']:.3f}",
            f"{100 * r['zeta_test']:.3f}",
            f"{r['mac']:.4f}",
        ]
        for r in doc["pairs"]
    ]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    if doc.get("notice"):
        lines.append(doc["notice"])
    return "\n".join(lines) + "\n"
