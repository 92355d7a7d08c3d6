"""Run configuration and seeded random streams.

Config files are INI-style (``[section]`` headers, ``key = value`` lines) and
are read with :mod:`configparser`. Overrides use ``section.key=value``.
Unknown sections or keys are rejected.

Randomness: every consumer asks :func:`rng` for a named stream. A stream is a
``numpy`` generator seeded from ``SeedSequence(seed, spawn_key=(crc32(name),))``
so adding a new consumer never shifts the numbers another one sees.
"""

import configparser
import hashlib
import json
import os
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .loading import CycleDiscretization
from .material import MaterialParameters

CONFIG_ENV = "CONCRETE_FATIGUE_CONFIG"

DEFAULT_LEVELS = (0.65, 0.70, 0.75, 0.80, 0.85, 0.90)

# section -> key -> (type, default)
SCHEMA = {
    "material": {
        "lambda": (float, 12500.0), "mu": (float, 18750.0), "g": (float, -10.0),
        "K": (float, 0.00485), "C0": (float, 0.0), "C1": (float, 0.0019),
        "alpha": (float, 2237.5), "beta": (float, -2116.5), "n": (float, 10.0),
        "fc": (float, 100.0), "kappa_form": (str, "tangent"),
        "clamp_yield": (bool, False),
    },
    "simulation": {
        "substeps": (int, 20), "scheme": (str, "rk4"), "omega_crit": (float, 10.0),
        "max_cycles": (int, 10_000_000), "s_min": (float, 0.2),
        "levels": (tuple, DEFAULT_LEVELS),
    },
    "dataset": {
        "fractions": (tuple, (0.7, 0.15, 0.15)),
    },
    "training": {
        "learning_rate": (float, 1e-4), "batch_size": (int, 0), "max_epochs": (int, 20000),
        "patience": (int, 500), "loss_tolerance": (float, 0.0), "min_delta": (float, 0.0),
        "hidden_layers": (int, 10), "hidden_width": (int, 16),
    },
    "loss": {
        "w_const": (float, 0.5), "w_bound": (float, 1.0), "w_spars": (float, 2.0),
        "use_const": (bool, True), "use_bound": (bool, True), "use_spars": (bool, True),
    },
    "study": {
        "eta_min": (float, 0.05), "eta_max": (float, 0.40), "eta_step": (float, 0.05),
        "five_level_cap": (int, 1000), "jump_delta": (float, 0.2),
        "jump_eta_min": (float, 0.025), "jump_eta_max": (float, 0.2), "jump_eta_step": (float, 0.025),
        "jump_counts": (tuple, (50, 578, 3000)),
    },
    "run": {
        "seed": (int, 0), "threads": (int, 1),
    },
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse(kind, text, where):
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if kind is tuple:
            items = [t for t in text.replace(",", " ").split() if t]
            return tuple(float(t) if ("." in t or "e" in t.lower()) else int(t) for t in items)
        if kind is int:
            return int(float(text)) if float(text).is_integer() else int(text)
        return kind(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {text!r} as {kind.__name__}") from None


def _unparse(v):
    if isinstance(v, tuple):
        return ", ".join(repr(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {s: {k: d for k, (_, d) in keys.items()}
                                                  for s, keys in SCHEMA.items()})

    def get(self, dotted):
        sec, key = dotted.split(".", 1)
        return self.values[sec][key]

    def set(self, dotted, text):
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must look like section.key")
        sec, key = dotted.split(".", 1)
        if sec not in SCHEMA or key not in SCHEMA[sec]:
            raise ConfigError(f"unknown config key {dotted!r}")
        kind = SCHEMA[sec][key][0]
        self.values[sec][key] = _parse(kind, text, dotted) if isinstance(text, str) else text

    def material(self):
        m = self.values["material"]
        try:
            return MaterialParameters(
                lam=m["lambda"], mu=m["mu"], g=m["g"], K=m["K"], C0=m["C0"], C1=m["C1"],
                alpha=m["alpha"], beta=m["beta"], n=m["n"], fc=m["fc"],
                kappa_form=m["kappa_form"], clamp_yield=m["clamp_yield"])
        except ValueError as exc:
            raise ConfigError(f"material: {exc}") from None

    def discretization(self):
        s = self.values["simulation"]
        try:
            return CycleDiscretization(substeps=s["substeps"], scheme=s["scheme"],
                                       omega_crit=s["omega_crit"], max_cycles=s["max_cycles"])
        except ValueError as exc:
            raise ConfigError(f"simulation: {exc}") from None

    @property
    def seed(self):
        return self.values["run"]["seed"]

    @property
    def threads(self):
        return self.values["run"]["threads"]

    def to_text(self):
        lines = []
        for sec, keys in self.values.items():
            lines.append(f"[{sec}]")
            lines += [f"{k} = {_unparse(v)}" for k, v in keys.items()]
            lines.append("")
        return "\n".join(lines)

    def fingerprint(self, sections=None):
        """Hash of the settings that affect results (thread count excluded)."""
        chosen = {s: dict(v) for s, v in self.values.items() if sections is None or s in sections}
        chosen.get("run", {}).pop("threads", None)
        blob = json.dumps(chosen, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path=None, overrides=()):
    """Defaults, then the file (explicit path or ``$CONCRETE_FATIGUE_CONFIG``), then overrides."""
    cfg = RunConfig()
    path = path or os.environ.get(CONFIG_ENV) or None
    if path:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for sec in parser.sections():
            for key, text in parser.items(sec):
                cfg.set(f"{sec}.{key}", text)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must be key=value")
        key, text = item.split("=", 1)
        cfg.set(key.strip(), text)
    return cfg


def rng(seed, name):
    """Independent generator for the stream ``name`` under top-level ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(name.encode()),))
    return np.random.default_rng(ss)
