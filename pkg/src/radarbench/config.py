"""Run configuration: UTF-8 key/value files, presets, CLI overrides.

Config files share the manifest's line format, ``key = value`` with #
comments. Every key can be overridden on the command line; command line
wins. Presets ship in-repo under radarbench/presets/.
"""

from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Optional

from . import waveforms
from .dataset import DatasetManifest
from .optim import TrainConfig


class ConfigError(Exception):
    """Invalid or unknown configuration input."""


DATASETS = ("deepradar2022", "eightclass", "imported")
INPUT_DOMAINS = ("time", "autocorrelation")
CELL_VARIANTS = ("standard", "printed")

_DATASET_CLASSES = {
    "deepradar2022": waveforms.DEEPRADAR_CLASSES,
    "eightclass": waveforms.EIGHTCLASS_CLASSES,
}
_DATASET_GRIDS = {
    "deepradar2022": tuple(range(-12, 21, 2)),
    "eightclass": tuple(range(-20, 21, 2)),
}


@dataclass
class RunConfig:
    dataset: str = "deepradar2022"
    class_names: Optional[tuple] = None     # None = all classes of the dataset
    snr_grid_db: Optional[tuple] = None     # None = dataset default grid
    train_count: int = 1200
    val_count: int = 400
    test_count: int = 400
    master_seed: int = 2022
    signal_length: int = 1024
    sample_rate_hz: float = 100e6
    layers: int = 3
    hidden: int = 128
    input_domain: str = "time"
    cell_variant: str = "standard"
    batch_size: int = 256
    epochs: int = 300
    lr_min: float = 1e-7
    lr_max: float = 1e-3
    cycle_epochs: int = 8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    train_seed: int = 0
    train_snr_min: Optional[int] = None
    train_snr_max: Optional[int] = None
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.dataset not in DATASETS:
            raise ConfigError(f"config key 'dataset': unknown value {self.dataset!r}")
        if self.input_domain not in INPUT_DOMAINS:
            raise ConfigError(f"config key 'input_domain': unknown value {self.input_domain!r}")
        if self.cell_variant not in CELL_VARIANTS:
            raise ConfigError(f"config key 'cell_variant': unknown value {self.cell_variant!r}")
        if self.layers not in (1, 2, 3):
            raise ConfigError("config key 'layers': must be 1, 2 or 3")
        if self.class_names is not None and self.dataset in _DATASET_CLASSES:
            known = set(_DATASET_CLASSES[self.dataset])
            bad = [c for c in self.class_names if c not in known]
            if bad:
                raise ConfigError(f"config key 'class_names': unknown class {bad[0]!r}")
        for key in ("train_count", "val_count", "test_count", "hidden", "threads",
                    "signal_length", "batch_size", "epochs", "cycle_epochs"):
            if getattr(self, key) < 1:
                raise ConfigError(f"config key {key!r}: must be positive")
        return self

    def manifest(self) -> DatasetManifest:
        if self.dataset == "imported":
            raise ConfigError("config key 'dataset': cannot generate an imported dataset")
        classes = self.class_names or _DATASET_CLASSES[self.dataset]
        grid = self.snr_grid_db or _DATASET_GRIDS[self.dataset]
        return DatasetManifest(
            dataset_name=self.dataset,
            class_names=classes,
            snr_grid_db=grid,
            per_cell_counts=(self.train_count, self.val_count, self.test_count),
            master_seed=self.master_seed,
            sample_rate_hz=self.sample_rate_hz,
            signal_length=self.signal_length,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            epochs=self.epochs,
            lr_min=self.lr_min,
            lr_max=self.lr_max,
            cycle_epochs=self.cycle_epochs,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
            seed=self.train_seed,
        )

    def layer_sizes(self) -> tuple:
        return (self.hidden,) * self.layers


def parse_kv_text(text: str, origin: str = "<config>") -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{origin}:{lineno}: empty key")
        out[key] = value
    return out


def _parse_grid(value: str) -> tuple:
    """Either 'lo:step:hi' (inclusive) or a comma list of integers."""
    if ":" in value:
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigError(f"config key 'snr_grid_db': bad range {value!r}")
        lo, step, hi = (int(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ConfigError(f"config key 'snr_grid_db': bad range {value!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(v) for v in value.split(","))


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def config_from_mapping(mapping: dict, base: Optional[RunConfig] = None) -> RunConfig:
    """Apply string key/value pairs onto a RunConfig, with validation.

    Unknown keys and unparseable values raise ConfigError naming the key.
    """
    cfg = RunConfig() if base is None else base
    for key, value in mapping.items():
        if key == "per_cell_counts":
            try:
                t, v, s = (int(c) for c in value.split(","))
            except ValueError:
                raise ConfigError(f"config key 'per_cell_counts': expected three integers") from None
            cfg.train_count, cfg.val_count, cfg.test_count = t, v, s
            continue
        if key == "train_snr_range":
            try:
                lo, hi = (int(p) for p in value.split(":"))
            except ValueError:
                raise ConfigError(f"config key 'train_snr_range': expected 'lo:hi'") from None
            cfg.train_snr_min, cfg.train_snr_max = lo, hi
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key == "class_names":
                cfg.class_names = tuple(c.strip() for c in value.split(",") if c.strip())
            elif key == "snr_grid_db":
                cfg.snr_grid_db = _parse_grid(value)
            elif key in ("train_snr_min", "train_snr_max"):
                setattr(cfg, key, int(value))
            elif key in ("sample_rate_hz", "lr_min", "lr_max",
                         "adam_beta1", "adam_beta2", "adam_eps"):
                setattr(cfg, key, float(value))
            elif key in ("dataset", "input_domain", "cell_variant"):
                setattr(cfg, key, value)
            else:
                setattr(cfg, key, int(value))
        except ValueError:
            raise ConfigError(f"config key {key!r}: cannot parse value {value!r}") from None
    return cfg.validate()


def load_config_file(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return config_from_mapping(parse_kv_text(path.read_text(encoding="utf-8"), str(path)))


def preset_names() -> tuple:
    root = resources.files("radarbench").joinpath("presets")
    return tuple(sorted(p.name[: -len(".cfg")] for p in root.iterdir() if p.name.endswith(".cfg")))


def load_preset(name: str) -> RunConfig:
    root = resources.files("radarbench").joinpath("presets")
    ref = root.joinpath(f"{name}.cfg")
    if not ref.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return config_from_mapping(parse_kv_text(ref.read_text(encoding="utf-8"), f"preset:{name}"))
