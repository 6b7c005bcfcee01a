"""Experiment configuration files: schema validation, defaults, presets."""
import copy
import json
import math
from dataclasses import dataclass, fields
from importlib import resources

import jsonschema

from .errors import ConfigError
from .hamiltonian import HeisenbergSpec
from .vmc import TrainConfig
from .wavefunction import ModelConfig

# Ground-state energies of the 100-site open chain (J1 = 1) quoted from DMRG
# in the literature; keys are (j2, j3).  Only used for reporting.
REFERENCE_ENERGIES_N100 = {
    (0.0, 0.0): -44.1277,
    (0.2, 0.0): -40.7388,
    (0.5, 0.0): -37.5000,
    (0.8, 0.0): -42.0701,
    (0.0, 0.5): -53.9914,
    (0.2, 0.2): -43.5860,
    (0.2, 0.5): -49.6287,
    (0.5, 0.2): -38.54733,
}


def load_schema():
    text = resources.files("hypnqs.schema").joinpath("config.schema.json").read_text()
    return json.loads(text)


def _defaults(schema_obj):
    return {k: v["default"] for k, v in schema_obj["properties"].items() if "default" in v}


@dataclass
class ExperimentConfig:
    model: ModelConfig
    system: HeisenbergSpec
    train: TrainConfig
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, raw):
        schema = load_schema()
        try:
            jsonschema.validate(raw, schema)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        props = schema["properties"]
        m = {**_defaults(props["model"]), **raw["model"]}
        s = {**_defaults(props["system"]), **raw["system"]}
        t = {**_defaults(props["train"]), **raw.get("train", {})}
        o = {**_defaults(props["output"]), **raw.get("output", {})}
        m["l_max"] = math.inf if m["l_max"] is None else float(m["l_max"])
        try:
            model = ModelConfig(n=s["n"], **m)
            system = HeisenbergSpec(**s)
            train = TrainConfig(**t)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cls(model, system, train, o["dir"])

    def to_dict(self):
        model = {f.name: getattr(self.model, f.name) for f in fields(self.model) if f.name != "n"}
        model["l_max"] = None if math.isinf(model["l_max"]) else model["l_max"]
        return {
            "model": model,
            "system": {"n": self.system.n, "j1": self.system.j1, "j2": self.system.j2,
                       "j3": self.system.j3},
            "train": {f.name: getattr(self.train, f.name) for f in fields(self.train)},
            "output": {"dir": self.output_dir},
        }

    def with_overrides(self, **kw):
        """Copy with dotted overrides such as ``{"model.r_max": 0.7}``."""
        raw = self.to_dict()
        for key, val in kw.items():
            section, _, name = key.partition(".")
            if section not in raw or not name:
                raise ConfigError(f"cannot override {key!r}")
            raw[section][name] = val
        return ExperimentConfig.from_dict(raw)

    def reference_energy(self):
        s = self.system
        if s.n == 100 and s.j1 == 1.0:
            return REFERENCE_ENERGIES_N100.get((s.j2, s.j3))
        return None


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return ExperimentConfig.from_dict(raw)


_PRESETS = {
    # 100-site J1J2 chain, 1000 epochs, hidden 70 for every variant
    "j1j2": {
        "model": {"variant": "euclidean_gru", "hidden": 70},
        "system": {"n": 100, "j2": 0.0},
        "train": {"epochs": 1000},
    },
    # 100-site J1J2J3 chain, 1200 epochs; hidden 80 for RNNs, 70 for GRUs
    "j1j2j3": {
        "model": {"variant": "euclidean_gru", "hidden": 70},
        "system": {"n": 100, "j2": 0.2, "j3": 0.2},
        "train": {"epochs": 1200},
    },
    # desk-scale run
    "smoke": {
        "model": {"variant": "euclidean_gru", "hidden": 16},
        "system": {"n": 10, "j2": 0.0},
        "train": {"epochs": 200},
    },
}

PRESETS = tuple(_PRESETS)


def preset(name, variant=None):
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    raw = copy.deepcopy(_PRESETS[name])
    if variant is not None:
        raw["model"]["variant"] = variant
        if name == "j1j2j3":
            raw["model"]["hidden"] = 80 if variant.endswith("_rnn") else 70
    return ExperimentConfig.from_dict(raw)
