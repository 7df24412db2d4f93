"""
Run configuration: defaults, a JSON file, then command-line overrides.

The file holds top-level keys (``seed``, ``output_dir``, ``checkpoint``)
and one object per section. Section keys mirror the fields of the
section's dataclass; unknown keys and wrong types are rejected. The
top-level seed is the only seed and is copied into the seeded sections.
"""

import hashlib
import json
import logging
import types
import typing
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Sequence

from zitd_gnn.constants import DEFAULT_SEED, PATIENCE
from zitd_gnn.data.synth import SynthConfig
from zitd_gnn.data.windows import WindowConfig
from zitd_gnn.distributions.tweedie import SeriesConfig
from zitd_gnn.errors import ConfigError, ContractError
from zitd_gnn.evaluation.metrics import MetricsConfig
from zitd_gnn.evaluation.predict import IntervalConfig
from zitd_gnn.model.decoder import EpsilonConfig
from zitd_gnn.model.encoder import EncoderConfig
from zitd_gnn.training.loss import LossConfig
from zitd_gnn.training.trainer import TrainConfig

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.json"


@dataclass(frozen=True)
class DataPaths:
    """Input CSVs; see ``zitd_gnn.data.io`` for the schemas."""

    edges: str | None = None
    crashes: str | None = None
    features: str | None = None


SECTIONS: dict[str, type] = {
    "data": DataPaths,
    "synth": SynthConfig,
    "window": WindowConfig,
    "encoder": EncoderConfig,
    "epsilon": EpsilonConfig,
    "loss": LossConfig,
    "train": TrainConfig,
    "series": SeriesConfig,
    "interval": IntervalConfig,
    "metrics": MetricsConfig,
}
SEEDED_SECTIONS = ("synth", "train", "interval")
TOP_LEVEL = ("seed", "output_dir", "checkpoint")
# sections that change the trained model; they alone enter the hash
MODEL_SECTIONS = ("window", "encoder", "epsilon", "loss", "train")


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    output_dir: str = "runs"
    checkpoint: str | None = None
    data: DataPaths = field(default_factory=DataPaths)
    synth: SynthConfig = field(default_factory=SynthConfig)
    window: WindowConfig = field(default_factory=WindowConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    epsilon: EpsilonConfig = field(default_factory=EpsilonConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    series: SeriesConfig = field(default_factory=SeriesConfig)
    interval: IntervalConfig = field(default_factory=IntervalConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)

    def to_dict(self) -> dict[str, Any]:
        """Canonical form; parsing it again yields an equal RunConfig."""
        out: dict[str, Any] = {key: getattr(self, key) for key in TOP_LEVEL}
        for name in SECTIONS:
            section = asdict(getattr(self, name))
            if name in SEEDED_SECTIONS:
                section.pop("seed")
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in section.items()}
        return out

    def model_hash(self) -> str:
        """SHA-256 over the seed and the sections that shape training."""
        full = self.to_dict()
        payload = {"seed": self.seed, **{name: full[name] for name in MODEL_SECTIONS}}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def require_data(self) -> DataPaths:
        """
        Raises:
            ConfigError: If any input path is unset.
        """
        missing = [f.name for f in fields(DataPaths) if getattr(self.data, f.name) is None]
        if missing:
            raise ConfigError(f"missing required data paths: {', '.join(missing)}")
        return self.data

    def output_path(self, name: str) -> Path:
        return Path(self.output_dir) / name


def _type_name(annotation: Any) -> str:
    return getattr(annotation, "__name__", str(annotation))


def _coerce(value: Any, annotation: Any, where: str) -> Any:
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)
    if origin is typing.Literal:
        if value not in args:
            raise ConfigError(f"{where}: expected one of {list(args)}, got {value!r}")
        return value
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        errors = []
        for option in (a for a in args if a is not type(None)):
            try:
                return _coerce(value, option, where)
            except ConfigError as exc:
                errors.append(str(exc))
        raise ConfigError(errors[0] if errors else f"{where}: bad value {value!r}")
    if origin is tuple:
        if not isinstance(value, (list, tuple)) or len(value) != len(args):
            raise ConfigError(f"{where}: expected a list of {len(args)} values, got {value!r}")
        return tuple(_coerce(v, a, f"{where}[{i}]") for i, (v, a) in enumerate(zip(value, args)))
    if annotation is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean, got {value!r}")
        return value
    if annotation is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if annotation is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if annotation is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{where}: unsupported setting type {_type_name(annotation)}")


def _build_section(name: str, values: Mapping[str, Any], seed: int) -> Any:
    cls = SECTIONS[name]
    known = {f.name: f for f in fields(cls)}
    if name in SEEDED_SECTIONS:
        known.pop("seed")
    unknown = sorted(set(values) - set(known))
    if unknown:
        hint = " (use the top-level seed)" if "seed" in unknown else ""
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}{hint}")
    kwargs = {k: _coerce(v, known[k].type, f"{name}.{k}") for k, v in values.items()}
    if name in SEEDED_SECTIONS:
        kwargs["seed"] = seed
    try:
        return cls(**kwargs)
    except ContractError as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def _parse_override(item: str) -> tuple[str, str, Any]:
    key, sep, raw = item.partition("=")
    section, _, name = key.strip().partition(".")
    if not sep or not name and section not in TOP_LEVEL:
        raise ConfigError(f"override {item!r} must look like section.key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return section, name, value


def _merge(target: dict[str, Any], section: str, key: str, value: Any) -> None:
    if not key:
        target[section] = value
        return
    if section not in SECTIONS:
        raise ConfigError(f"unknown section {section!r}")
    bucket = target.setdefault(section, {})
    if not isinstance(bucket, dict):
        raise ConfigError(f"[{section}] must be an object")
    bucket[key] = value


def parse_config(
    path: str | Path | None = None,
    overrides: Sequence[str] = (),
    **flags: Any,
) -> RunConfig:
    """
    Resolve a RunConfig: flags over overrides over the file over defaults.

    Args:
        path: Optional JSON file; an empty object yields the defaults.
        overrides: ``section.key=value`` strings; values parse as JSON and
            fall back to plain strings.
        flags: Dedicated options: seed, output_dir, checkpoint, epochs,
            edges, crashes, features. None means "not given". A given
            epochs also caps patience unless patience is set.

    Raises:
        ConfigError: Unreadable file, unknown key or wrong type.
    """
    raw: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            text = path.read_text().strip()
            raw = json.loads(text) if text else {}
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must hold a JSON object")

    for item in overrides:
        _merge(raw, *_parse_override(item))

    flag_targets = {
        "seed": ("seed", ""),
        "output_dir": ("output_dir", ""),
        "checkpoint": ("checkpoint", ""),
        "epochs": ("train", "epochs"),
        "edges": ("data", "edges"),
        "crashes": ("data", "crashes"),
        "features": ("data", "features"),
    }
    for flag, value in flags.items():
        if flag not in flag_targets:
            raise ConfigError(f"unknown flag {flag!r}")
        if value is not None:
            _merge(raw, *flag_targets[flag], value)
    # --epochs alone must not trip patience <= epochs
    if flags.get("epochs") is not None and "patience" not in raw.get("train", {}):
        raw["train"]["patience"] = min(PATIENCE, flags["epochs"])

    unknown = sorted(set(raw) - set(TOP_LEVEL) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    top = {f.name: f for f in fields(RunConfig) if f.name in TOP_LEVEL}
    kwargs: dict[str, Any] = {
        key: _coerce(raw[key], top[key].type, key) for key in TOP_LEVEL if key in raw
    }
    seed = kwargs.get("seed", DEFAULT_SEED)
    for name in SECTIONS:
        section = raw.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"[{name}] must be an object")
        kwargs[name] = _build_section(name, section, seed)
    return RunConfig(**kwargs)


def write_resolved(cfg: RunConfig, out_dir: str | Path | None = None) -> Path:
    """Echo the resolved configuration as JSON into the output directory."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / RESOLVED_CONFIG_NAME
    path.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
    logger.info("resolved config written to %s (hash %s)", path, cfg.model_hash()[:12])
    return path
