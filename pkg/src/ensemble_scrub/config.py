"""Pipeline configuration: dataclass, ``key = value`` config files, bias option parsing."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from .ensemble_filter import DEFAULT_BIAS, BiasVector
from .errors import ConfigurationError, InputError
from .models import Hyperparameters

SEED_ENV = "ENSEMBLE_SCRUB_SEED"


@dataclass(frozen=True)
class SynthConfig:
    classes: int = 4
    docs_per_class: int = 500
    class_vocab: int = 50
    shared_vocab: int = 200
    doc_len: int = 30
    noise_word_fraction: float = 0.3


@dataclass(frozen=True)
class PipelineConfig:
    input: Optional[str] = None
    text_col: str = "transcription"
    label_col: str = "medical_specialty"
    min_class_count: int = 355
    test_fraction: float = 0.2
    stratified: bool = False
    seed: int = 42
    bias_mode: str = "fixed"
    bias: tuple = DEFAULT_BIAS
    oof: bool = False
    oof_folds: int = 5
    min_df: int = 2
    max_features: int = 20000
    smote_k: int = 5
    stemming: bool = True
    strip_markup: bool = True
    noise_rate: float = 0.15
    out_dir: str = "out"
    hp: Hyperparameters = field(default_factory=Hyperparameters)
    synth: SynthConfig = field(default_factory=SynthConfig)

    def __post_init__(self):
        if not self.text_col or not self.label_col:
            raise ConfigurationError("text_col and label_col must be non-empty")
        if self.bias_mode not in ("fixed", "ranked"):
            raise ConfigurationError(f"bias mode must be 'fixed' or 'ranked', got {self.bias_mode!r}")
        if self.bias_mode == "fixed":
            BiasVector(self.bias)
        if self.oof_folds < 2:
            raise ConfigurationError("oof_folds must be >= 2")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ConfigurationError(f"noise_rate must lie in [0, 1), got {self.noise_rate}")
        if self.hp.seed != self.seed:
            object.__setattr__(self, "hp", dataclasses.replace(self.hp, seed=self.seed))

    @property
    def bias_vector(self) -> BiasVector:
        return BiasVector(self.bias)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["bias"] = list(self.bias)
        return d


def parse_bias(text: str) -> tuple[str, tuple]:
    """``ranked`` | ``fixed`` | ``fixed:w1,...,w6`` -> (mode, weights)."""
    text = text.strip()
    if text == "ranked":
        return "ranked", DEFAULT_BIAS
    if text == "fixed":
        return "fixed", DEFAULT_BIAS
    if text.startswith("fixed:"):
        try:
            weights = tuple(float(v) for v in text[len("fixed:"):].split(","))
        except ValueError:
            raise ConfigurationError(f"cannot parse bias weights in {text!r}") from None
        BiasVector(weights)
        return "fixed", weights
    raise ConfigurationError(f"bias must be 'ranked' or 'fixed:<w1,...,w6>', got {text!r}")


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Keys are normalized to snake_case."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _coerce(value: Any, target: Any, key: str):
    if not isinstance(value, str):
        return value
    try:
        if isinstance(target, bool):
            return _BOOL[value.lower()]
        if isinstance(target, int):
            return int(value)
        if isinstance(target, float):
            return float(value)
    except (KeyError, ValueError):
        raise ConfigurationError(f"bad value for {key}: {value!r}") from None
    if target is None and key == "rf_feature_fraction":
        return None if value.lower() in ("", "none", "sqrt") else float(value)
    return value


def build_config(values: Mapping[str, Any]) -> PipelineConfig:
    """Build a config from flat snake_case keys (CLI dests / config-file keys)."""
    values = {k: v for k, v in values.items() if v is not None}
    top, hp_kw, synth_kw = {}, {}, {}
    hp_fields = {f.name: f.default for f in dataclasses.fields(Hyperparameters)}
    synth_fields = {f.name: f.default for f in dataclasses.fields(SynthConfig)}
    top_fields = {f.name: f.default for f in dataclasses.fields(PipelineConfig)}
    for key, value in values.items():
        if key == "bias":
            mode, weights = parse_bias(value) if isinstance(value, str) else ("fixed", tuple(value))
            top["bias_mode"], top["bias"] = mode, weights
        elif key in hp_fields and key != "seed":
            hp_kw[key] = _coerce(value, hp_fields[key], key)
        elif key.startswith("synth_") and key[6:] in synth_fields:
            synth_kw[key[6:]] = _coerce(value, synth_fields[key[6:]], key)
        elif key in top_fields and key not in ("hp", "synth"):
            top[key] = _coerce(value, top_fields[key], key)
        else:
            raise ConfigurationError(f"unknown configuration key {key!r}")
    seed = top.get("seed", top_fields["seed"])
    return PipelineConfig(**top, hp=Hyperparameters(seed=seed, **hp_kw), synth=SynthConfig(**synth_kw))
