"""Run-directory files: checkpoints, metrics streams, results."""
import json
import math
import os
from dataclasses import fields
from pathlib import Path

import numpy as np

from .grad import ParamVector
from .hamiltonian import HeisenbergSpec
from .wavefunction import ModelConfig, WavefunctionModel

FORMAT_VERSION = 1
MANIFEST = "manifest.json"


class CheckpointError(ValueError):
    pass


def _clean(obj):
    """JSON-safe copy: inf/nan floats become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, obj):
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(_clean(obj), indent=2) + "\n")
    os.replace(tmp, path)


def read_json(path):
    return json.loads(Path(path).read_text())


class JsonLines:
    """Append-only JSON Lines file, flushed after every record."""

    def __init__(self, path):
        self.path = Path(path)
        self.fh = open(self.path, "a")

    def write(self, record):
        self.fh.write(json.dumps(_clean(record)) + "\n")
        self.fh.flush()

    def close(self):
        self.fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_jsonl(path):
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def model_config_dict(cfg):
    d = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    d["l_max"] = None if math.isinf(d["l_max"]) else d["l_max"]
    return d


def save_checkpoint(directory, model, spec, **meta):
    """Manifest plus one little-endian float64 file per parameter segment."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    segs = []
    for s in model.params.segments.values():
        fname = f"{s.name}.bin"
        model.params[s.name].astype("<f8").tofile(directory / fname)
        segs.append({"name": s.name, "shape": list(s.shape), "role": s.role,
                     "geometry": s.geometry, "file": fname})
    manifest = {
        "format": FORMAT_VERSION,
        "variant": model.config.variant,
        "model": model_config_dict(model.config),
        "system": {"n": spec.n, "j1": spec.j1, "j2": spec.j2, "j3": spec.j3},
        "segments": segs,
        **meta,
    }
    write_json(directory / MANIFEST, manifest)
    return directory


def load_checkpoint(directory):
    """Returns (model, spec, manifest)."""
    directory = Path(directory)
    mpath = directory / MANIFEST
    if not mpath.is_file():
        raise CheckpointError(f"no {MANIFEST} in {directory}")
    try:
        manifest = read_json(mpath)
        if manifest.get("format") != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint format {manifest.get('format')!r}")
        mc = dict(manifest["model"])
        mc["l_max"] = math.inf if mc["l_max"] is None else mc["l_max"]
        config = ModelConfig(**mc)
        spec = HeisenbergSpec(**manifest["system"])
        layout = [(s["name"], tuple(s["shape"]), s["role"], s["geometry"]) for s in manifest["segments"]]
        params = ParamVector(layout)
        for s in manifest["segments"]:
            arr = np.fromfile(directory / s["file"], dtype="<f8")
            if arr.size != int(np.prod(s["shape"])):
                raise CheckpointError(f"segment {s['name']} has {arr.size} values, expected shape {s['shape']}")
            params[s["name"]] = arr
    except (KeyError, TypeError, OSError) as exc:
        raise CheckpointError(f"malformed checkpoint in {directory}: {exc}") from None
    return WavefunctionModel(config, params), spec, manifest
