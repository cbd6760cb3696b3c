import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
import yaml

from core_model.enums import LossNormalizer
from experiments.serializers import RunConfigSerializer
from federation.entities import AblationFlags, FederationConfig
from federation.enums import Mode, PriorsSource
from synthdata.entities import SyntheticSpec
from utils.exceptions import InvalidConfigurationException

logger = logging.getLogger(__name__)

DEFAULTS_SOURCE = "<defaults>"
OVERRIDE_SOURCE = "<--set>"

# Desk profile: paper hyper-parameters except T=200 and a larger step size.
DEFAULT_CONFIG: Dict[str, Any] = {
    "seed": 0,
    "federation": {
        "mode": Mode.FEDMLP.value,
        "clients": 5,
        "rounds": 200,
        "warmup_rounds": 50,
        "local_epochs": 1,
        "batch_size": 32,
        "learning_rate": 1e-3,
        "weight_decay": 1e-4,
        "hidden_dim": 64,
        "band_low": 0.3,
        "band_high": 0.7,
        "base_negative_ratio": 0.005,
        "base_positive_ratio": 0.01,
        "cr_weight": 1.0,
        "loss_normalizer": LossNormalizer.CLASSES.value,
        "la_tau": 1.0,
        "priors_source": PriorsSource.LOCAL.value,
        "weak_noise": 0.05,
        "strong_noise": 0.2,
        "threads": 1,
    },
    "ablation": {"mld": True, "wpc": True, "cr": True, "st": True},
    "data": {
        "classes": 5,
        "input_dim": 32,
        "train_samples": 5000,
        "test_samples": 2000,
        "positive_rates": [0.30, 0.20, 0.10, 0.05, 0.03],
        "label_correlation": 0.1,
        "noise_scale": 0.5,
        "signal_scale": 2.0,
    },
    "partition": {"missing_classes": 4},
    "evaluation": {"interval": 5, "threshold": 0.5, "adjusted": False},
    "output": {"dir": "results", "snapshots": False},
}


def flatten(mapping: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for key, value in mapping.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def unflatten(flat: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for dotted, value in flat.items():
        *sections, leaf = dotted.split(".")
        node = nested
        for section in sections:
            node = node.setdefault(section, {})
        node[leaf] = value
    return nested


DEFAULT_KEYS = frozenset(flatten(DEFAULT_CONFIG))


@dataclass
class ConfigSource:
    """Flat dotted values with the file position each one came from."""
    values: Dict[str, Any] = field(default_factory=dict)
    origins: Dict[str, Tuple[str, int]] = field(default_factory=dict)

    def origin_of(self, dotted: str) -> Tuple[str, int]:
        parts = dotted.split(".")
        while parts:
            key = ".".join(parts)
            if key in self.origins:
                return self.origins[key]
            parts.pop()
        return DEFAULTS_SOURCE, 0


def _node_lines(node, path: str, prefix: str = "") -> Dict[str, int]:
    lines = {}
    if not isinstance(node, yaml.MappingNode):
        return lines
    for key_node, value_node in node.value:
        dotted = f"{prefix}{key_node.value}"
        if isinstance(value_node, yaml.MappingNode):
            lines.update(_node_lines(value_node, path, f"{dotted}."))
        else:
            lines[dotted] = key_node.start_mark.line + 1
    return lines


def load_config_file(path: Union[str, Path]) -> ConfigSource:
    path = str(path)
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise InvalidConfigurationException(f"{path}:0: cannot read config file: {e.strerror}", path=path)

    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 0
        raise InvalidConfigurationException(f"{path}:{line}: malformed YAML: {getattr(e, 'problem', e)}", path=path)

    if data is None:
        return ConfigSource()
    if not isinstance(data, Mapping):
        raise InvalidConfigurationException(f"{path}:1: the config must be a key-value mapping.", path=path)

    values = flatten(data)
    lines = _node_lines(root, path)
    return ConfigSource(values=values, origins={key: (path, lines.get(key, 0)) for key in values})


def parse_override(raw: str) -> Tuple[str, Any]:
    key, separator, value = raw.partition("=")
    if not separator or not key.strip():
        raise InvalidConfigurationException(f"{OVERRIDE_SOURCE}:0: {raw}: expected key=value.")
    try:
        parsed = yaml.safe_load(value) if value.strip() else ""
    except yaml.YAMLError:
        raise InvalidConfigurationException(f"{OVERRIDE_SOURCE}:0: {key}: value {value!r} is not valid YAML.")
    return key.strip(), parsed


def _flatten_errors(errors, prefix: str = "") -> List[Tuple[str, str]]:
    flat = []
    if isinstance(errors, Mapping):
        for key, value in errors.items():
            key = str(key)
            if key == "non_field_errors":
                flat.extend(_flatten_errors(value, prefix))
            else:
                flat.extend(_flatten_errors(value, f"{prefix}.{key}" if prefix else key))
    elif isinstance(errors, list):
        for item in errors:
            flat.extend(_flatten_errors(item, prefix))
    else:
        flat.append((prefix or "config", str(errors)))
    return flat


@dataclass(frozen=True)
class ResolvedRunConfig:
    """Validated configuration with every default materialized."""
    values: Dict[str, Any]

    def as_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.values)

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def missing_classes(self) -> int:
        return self.values["partition"]["missing_classes"]

    @property
    def output_dir(self) -> str:
        return self.values["output"]["dir"]

    @property
    def snapshots(self) -> bool:
        return self.values["output"]["snapshots"]

    @property
    def mode(self) -> Mode:
        return Mode(self.values["federation"]["mode"])

    def with_overrides(self, overrides: Mapping[str, Any]) -> "ResolvedRunConfig":
        flat = flatten(self.values)
        flat.update(overrides)
        return ConfigService.from_mapping(unflatten(flat))

    def federation_config(self) -> FederationConfig:
        fed = self.values["federation"]
        evaluation = self.values["evaluation"]
        return FederationConfig(
            num_clients=fed["clients"],
            num_classes=self.values["data"]["classes"],
            warmup_rounds=fed["warmup_rounds"],
            total_rounds=fed["rounds"],
            local_epochs=fed["local_epochs"],
            band_low=fed["band_low"],
            band_high=fed["band_high"],
            base_negative_ratio=fed["base_negative_ratio"],
            base_positive_ratio=fed["base_positive_ratio"],
            learning_rate=fed["learning_rate"],
            weight_decay=fed["weight_decay"],
            batch_size=fed["batch_size"],
            seed=self.seed,
            mode=Mode(fed["mode"]),
            ablation=AblationFlags(**self.values["ablation"]),
            hidden_dim=fed["hidden_dim"],
            weak_noise=fed["weak_noise"],
            strong_noise=fed["strong_noise"],
            cr_weight=fed["cr_weight"],
            loss_normalizer=LossNormalizer(fed["loss_normalizer"]),
            la_tau=fed["la_tau"],
            priors_source=PriorsSource(fed["priors_source"]),
            eval_interval=evaluation["interval"],
            eval_threshold=evaluation["threshold"],
            eval_adjusted=evaluation["adjusted"],
            threads=fed["threads"],
        )

    def synthetic_spec(self) -> SyntheticSpec:
        data = self.values["data"]
        correlation = data["label_correlation"]
        if isinstance(correlation, list):
            matrix = np.asarray(correlation, dtype=np.float64)
        else:
            matrix = SyntheticSpec.uniform_correlation(data["classes"], correlation)
        return SyntheticSpec(
            num_classes=data["classes"],
            input_dim=data["input_dim"],
            n_train=data["train_samples"],
            n_test=data["test_samples"],
            positive_rates=tuple(data["positive_rates"]),
            correlation=matrix,
            noise_scale=data["noise_scale"],
            signal_scale=data["signal_scale"],
            seed=self.seed,
        )


def _plain(value):
    if isinstance(value, Mapping):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_plain(item) for item in value]
    return value


class ConfigService:

    @staticmethod
    def resolve(
            config_path: Optional[Union[str, Path]] = None,
            overrides: Iterable[str] = (),
            extra: Optional[Mapping[str, Any]] = None
    ) -> ResolvedRunConfig:
        """
        Defaults, then the config file, then `--set` overrides, then flags such as
        `--seed`. Unknown keys and invalid values become `path:line: key: message`
        diagnostics.
        """
        source = load_config_file(config_path) if config_path else ConfigSource()
        for position, raw in enumerate(overrides, start=1):
            key, value = parse_override(raw)
            source.values[key] = value
            source.origins[key] = (OVERRIDE_SOURCE, position)
        for key, value in (extra or {}).items():
            if value is not None:
                source.values[key] = value
                source.origins[key] = (OVERRIDE_SOURCE, 0)

        return ConfigService._validate(source)

    @staticmethod
    def from_mapping(mapping: Mapping[str, Any]) -> ResolvedRunConfig:
        source = ConfigSource(values=flatten(mapping))
        return ConfigService._validate(source)

    @staticmethod
    def _validate(source: ConfigSource) -> ResolvedRunConfig:
        diagnostics = []
        for key in sorted(set(source.values) - DEFAULT_KEYS):
            path, line = source.origin_of(key)
            diagnostics.append(f"{path}:{line}: {key}: unknown key")
        if diagnostics:
            raise InvalidConfigurationException("\n".join(diagnostics), diagnostics=diagnostics)

        merged = flatten(DEFAULT_CONFIG)
        merged.update(source.values)
        serializer = RunConfigSerializer(data=unflatten(merged))
        if not serializer.is_valid():
            for key, message in _flatten_errors(serializer.errors):
                path, line = source.origin_of(key)
                diagnostics.append(f"{path}:{line}: {key}: {message}")
            for diagnostic in diagnostics:
                logger.error(diagnostic)
            raise InvalidConfigurationException("\n".join(diagnostics), diagnostics=diagnostics)

        return ResolvedRunConfig(values=_plain(serializer.validated_data))
