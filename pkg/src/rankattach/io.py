"""Versioned JSON and ``.npz`` serialization of :class:`ProcessResult`."""

from __future__ import annotations

import json
import zipfile
from pathlib import Path

import numpy as np

from .generator import ProcessParams, ProcessResult

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """File written by an incompatible version."""


def _check_schema(found) -> None:
    if found != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema {found!r}, this build reads schema {SCHEMA_VERSION}")


def result_to_dict(result: ProcessResult) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "params": result.params.to_dict(),
        "degrees": result.degrees.tolist(),
        "snapshots": [[t, {str(k): c for k, c in sorted(h.items())}] for t, h in result.snapshots],
        "trajectories": {str(v): rows.tolist() for v, rows in sorted(result.trajectories.items())},
        "edges": None if result.edges is None else result.edges.tolist(),
        "rng_draws": result.rng_draws,
    }


def result_from_dict(data: dict) -> ProcessResult:
    _check_schema(data.get("schema"))
    edges = data.get("edges")
    return ProcessResult(
        params=ProcessParams.from_dict(data["params"]),
        degrees=np.asarray(data["degrees"], dtype=np.int64),
        snapshots=[(int(t), {int(k): int(c) for k, c in h.items()}) for t, h in data.get("snapshots", [])],
        trajectories={
            int(v): np.asarray(rows, dtype=np.int64).reshape(-1, 3) for v, rows in data.get("trajectories", {}).items()
        },
        edges=None if edges is None else np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        rng_draws=int(data.get("rng_draws", 0)),
    )


def dumps(result: ProcessResult) -> str:
    return json.dumps(result_to_dict(result), sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> ProcessResult:
    return result_from_dict(json.loads(text))


def save_json(result: ProcessResult, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(result))
    return path


def load_json(path) -> ProcessResult:
    return loads(Path(path).read_text(encoding="utf-8"))


def save_npz(result: ProcessResult, path) -> Path:
    """Compact binary form: arrays stored natively, the rest as a JSON header."""
    path = Path(path)
    meta = {
        "schema": SCHEMA_VERSION,
        "params": result.params.to_dict(),
        "snapshots": [[t, {str(k): c for k, c in sorted(h.items())}] for t, h in result.snapshots],
        "tracked": sorted(result.trajectories),
        "rng_draws": result.rng_draws,
    }
    arrays = {"degrees": result.degrees, "meta": np.array(json.dumps(meta, sort_keys=True))}
    for v, rows in sorted(result.trajectories.items()):
        arrays[f"trajectory_{v}"] = rows
    if result.edges is not None:
        arrays["edges"] = result.edges
    # np.savez stamps members with the wall clock; a fixed date keeps reruns byte-identical
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, arr in arrays.items():
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            with zf.open(info, "w", force_zip64=True) as fh:
                np.lib.format.write_array(fh, np.asanyarray(arr), allow_pickle=False)
    return path


def load_npz(path) -> ProcessResult:
    with np.load(Path(path), allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        _check_schema(meta.get("schema"))
        return ProcessResult(
            params=ProcessParams.from_dict(meta["params"]),
            degrees=z["degrees"].astype(np.int64),
            snapshots=[(int(t), {int(k): int(c) for k, c in h.items()}) for t, h in meta["snapshots"]],
            trajectories={int(v): z[f"trajectory_{v}"].astype(np.int64) for v in meta["tracked"]},
            edges=z["edges"].astype(np.int64) if "edges" in z.files else None,
            rng_draws=int(meta["rng_draws"]),
        )


def load_result(path) -> ProcessResult:
    """Dispatch on suffix: ``.npz`` or JSON."""
    path = Path(path)
    return load_npz(path) if path.suffix == ".npz" else load_json(path)
