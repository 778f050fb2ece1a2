"""Parameter checkpoints: raw little-endian float32 blobs plus a JSON
manifest recording format version, layer names, shapes, and seeds.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["save_checkpoint", "load_checkpoint", "FORMAT_VERSION"]

FORMAT_VERSION = 1


def save_checkpoint(directory, arrays: dict, meta: dict | None = None) -> None:
    """Write ``weights.bin`` + ``manifest.json`` under ``directory``.

    Arrays are stored back to back as little-endian float32 in manifest
    order; the manifest records each layer's name, shape, and byte offset.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    layers = []
    blob = bytearray()
    for name in arrays:
        arr = np.ascontiguousarray(arrays[name], dtype="<f4")
        layers.append(
            {"name": name, "shape": list(arr.shape), "offset": len(blob)}
        )
        blob.extend(arr.tobytes())
    manifest = {
        "format_version": FORMAT_VERSION,
        "dtype": "float32-le",
        "layers": layers,
        "meta": meta or {},
    }
    (directory / "weights.bin").write_bytes(bytes(blob))
    (directory / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_checkpoint(directory) -> tuple[dict, dict]:
    """Read a checkpoint directory; returns (arrays, meta)."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError(
            f"unsupported checkpoint format version {manifest.get('format_version')}"
        )
    blob = (directory / "weights.bin").read_bytes()
    arrays = {}
    for layer in manifest["layers"]:
        shape = tuple(layer["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = layer["offset"]
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=start)
        arrays[layer["name"]] = arr.reshape(shape).copy()
    return arrays, manifest.get("meta", {})
