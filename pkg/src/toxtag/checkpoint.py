"""Versioned checkpoint container shared by the tagger and the filter.

Format: a UTF-8 JSON document with keys ``magic`` (fixed string), ``version``
(integer), ``kind`` ("tagger" or "filter"), ``payload`` (arbitrary JSON
metadata) and ``tensors`` (name -> {dtype, shape, data}) where ``data`` is
the base64 of the raw little-endian array bytes. Base64 round-trips the
exact bytes, so loading reproduces bit-identical parameters.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .errors import CheckpointError

MAGIC = "toxtag-checkpoint"
VERSION = 1


def write_container(
    path: str | Path,
    kind: str,
    payload: dict,
    tensors: dict[str, np.ndarray],
) -> None:
    doc = {
        "magic": MAGIC,
        "version": VERSION,
        "kind": kind,
        "payload": payload,
        "tensors": {
            name: {
                "dtype": str(arr.dtype),
                "shape": list(arr.shape),
                "data": base64.b64encode(
                    np.ascontiguousarray(arr).tobytes()
                ).decode("ascii"),
            }
            for name, arr in tensors.items()
        },
    }
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, ensure_ascii=False), encoding="utf-8"
    )


def read_container(
    path: str | Path, expected_kind: str | None = None
) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not a valid checkpoint file ({exc})") from exc
    try:
        if doc["magic"] != MAGIC:
            raise CheckpointError(f"{path}: bad magic {doc['magic']!r}")
        if doc["version"] != VERSION:
            raise CheckpointError(
                f"{path}: unsupported checkpoint version {doc['version']} "
                f"(expected {VERSION})"
            )
        if expected_kind is not None and doc["kind"] != expected_kind:
            raise CheckpointError(
                f"{path}: checkpoint kind {doc['kind']!r}, expected {expected_kind!r}"
            )
        tensors = {}
        for name, spec in doc["tensors"].items():
            data = base64.b64decode(spec["data"].encode("ascii"), validate=True)
            arr = np.frombuffer(data, dtype=np.dtype(spec["dtype"]))
            tensors[name] = arr.reshape(spec["shape"]).copy()
        return doc["payload"], tensors
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from exc
