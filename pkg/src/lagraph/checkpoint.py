"""Versioned parameter checkpoints.

Stored as ``.npz`` so float64 payloads round-trip bit-for-bit. Each file
records a format version and a ``kind`` tag; loading validates both.
"""

from __future__ import annotations

import json

import numpy as np

FORMAT = "lagraph-checkpoint-v1"


def save_checkpoint(path, kind: str, arrays: dict[str, np.ndarray], meta: dict | None = None) -> None:
    if any(key.startswith("__") for key in arrays):
        raise ValueError("array names must not start with '__'")
    payload = {key: np.asarray(val) for key, val in arrays.items()}
    payload["__format__"] = np.asarray(FORMAT)
    payload["__kind__"] = np.asarray(kind)
    payload["__meta__"] = np.asarray(json.dumps(meta or {}, sort_keys=True))
    np.savez(path, **payload)


def load_checkpoint(path, kind: str) -> tuple[dict[str, np.ndarray], dict]:
    with np.load(path, allow_pickle=False) as npz:
        fmt = str(npz["__format__"])
        if fmt != FORMAT:
            raise ValueError(f"{path}: unsupported checkpoint format {fmt!r}")
        found = str(npz["__kind__"])
        if found != kind:
            raise ValueError(f"{path}: checkpoint holds {found!r}, expected {kind!r}")
        meta = json.loads(str(npz["__meta__"]))
        arrays = {key: npz[key] for key in npz.files if not key.startswith("__")}
    return arrays, meta
