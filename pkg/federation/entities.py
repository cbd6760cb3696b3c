from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from core_model.entities import ClassPriors, ModelParams, OptimizerState
from core_model.enums import LossNormalizer
from federation.enums import Mode, PriorsSource, Stage
from prototypes.entities import DifficultyReport, DualPrototype, SelectionRatios
from prototypes.ledger import PseudoLabelLedger
from utils.exceptions import InvalidConfigurationException


@dataclass(frozen=True)
class AblationFlags:
    mld: bool = True
    wpc: bool = True
    cr: bool = True
    st: bool = True

    @classmethod
    def none(cls) -> "AblationFlags":
        return cls(mld=False, wpc=False, cr=False, st=False)


@dataclass(frozen=True)
class FederationConfig:
    num_clients: int = 5
    num_classes: int = 5
    warmup_rounds: int = 50
    total_rounds: int = 500
    local_epochs: int = 1
    band_low: float = 0.3
    band_high: float = 0.7
    base_negative_ratio: float = 0.005
    base_positive_ratio: float = 0.01
    learning_rate: float = 3e-5
    weight_decay: float = 1e-4
    batch_size: int = 32
    seed: int = 0
    mode: Mode = Mode.FEDMLP
    ablation: AblationFlags = field(default_factory=AblationFlags)
    hidden_dim: int = 64
    weak_noise: float = 0.05
    strong_noise: float = 0.2
    cr_weight: float = 1.0
    loss_normalizer: LossNormalizer = LossNormalizer.CLASSES
    la_tau: float = 1.0
    priors_source: PriorsSource = PriorsSource.LOCAL
    eval_interval: int = 5
    eval_threshold: float = 0.5
    eval_adjusted: bool = False
    threads: int = 1

    def __post_init__(self):
        errors = []
        if self.num_clients < 1:
            errors.append("num_clients must be at least 1")
        if self.num_classes < 2:
            errors.append("num_classes must be at least 2")
        if not 1 <= self.warmup_rounds <= self.total_rounds:
            errors.append("warmup_rounds must satisfy 1 <= t1 <= T")
        if self.local_epochs < 1:
            errors.append("local_epochs must be at least 1")
        if not 0.0 <= self.band_low < self.band_high <= 1.0:
            errors.append("difficulty band must satisfy 0 <= L < R <= 1")
        if self.base_negative_ratio < 0 or self.base_positive_ratio < 0:
            errors.append("base selection ratios must be non-negative")
        if self.learning_rate < 0 or self.weight_decay < 0:
            errors.append("learning_rate and weight_decay must be non-negative")
        if self.batch_size < 1 or self.hidden_dim < 1:
            errors.append("batch_size and hidden_dim must be positive")
        if not 0 <= self.weak_noise <= self.strong_noise:
            errors.append("augmentation scales must satisfy 0 <= weak <= strong")
        if self.eval_interval < 1:
            errors.append("eval_interval must be at least 1")
        if not 0.0 < self.eval_threshold < 1.0:
            errors.append("eval_threshold must lie in (0, 1)")
        if self.threads < 1:
            errors.append("threads must be at least 1")
        if errors:
            raise InvalidConfigurationException("; ".join(errors), errors=errors)

    @property
    def plan(self) -> "LossPlan":
        return LossPlan.from_config(self)

    def stage_of(self, round_index: int) -> Stage:
        if self.mode is not Mode.FEDMLP:
            return Stage.BASELINE
        return Stage.WARMUP if round_index <= self.warmup_rounds else Stage.DETECTION

    def is_eval_round(self, round_index: int) -> bool:
        return (round_index - 1) % self.eval_interval == 0 or round_index == self.total_rounds


@dataclass(frozen=True)
class LossPlan:
    """
    Which training components a run uses, derived from the mode and ablation flags.
    FEDAVG trains plain BCE with missing-as-negative labels; FEDAVG_PL trains the
    partial loss without adjustment; FEDMLP switches components per flag.
    """
    partial: bool = False
    logit_adjust: bool = False
    tagging: bool = False
    consistency: bool = False
    adaptive: bool = False
    detection_stage: bool = False

    @classmethod
    def from_config(cls, cfg: FederationConfig) -> "LossPlan":
        if cfg.mode is Mode.FEDAVG:
            return cls()
        if cfg.mode is Mode.FEDAVG_PL:
            return cls(partial=True)
        flags = cfg.ablation
        return cls(
            partial=flags.mld or flags.wpc,
            logit_adjust=flags.wpc,
            tagging=flags.mld,
            consistency=flags.cr,
            adaptive=flags.st,
            detection_stage=True,
        )


@dataclass(frozen=True)
class ClientState:
    client_id: int
    inputs: np.ndarray
    labels: np.ndarray
    active_mask: np.ndarray
    active_classes: Tuple[int, ...]
    negative_classes: Tuple[int, ...]
    params: ModelParams
    optimizer: OptimizerState
    ledger: PseudoLabelLedger
    priors: ClassPriors

    def __post_init__(self):
        active, negative = set(self.active_classes), set(self.negative_classes)
        if active & negative or len(active | negative) != self.labels.shape[1]:
            raise InvalidConfigurationException(
                f"Client {self.client_id}: active and negative classes must partition the class set.")
        if self.ledger.negative_classes != tuple(sorted(negative)) or self.ledger.num_samples != self.num_samples:
            raise InvalidConfigurationException(f"Client {self.client_id}: ledger does not cover its missing classes.")

    @property
    def num_samples(self) -> int:
        return self.inputs.shape[0]


@dataclass(frozen=True)
class ClientReport:
    client_id: int
    params: ModelParams
    num_samples: int
    prototypes: Dict[int, DualPrototype] = field(default_factory=dict)
    difficulty: Optional[DifficultyReport] = None


@dataclass(frozen=True)
class ServerState:
    global_params: ModelParams
    annotation: Tuple[FrozenSet[int], ...]
    global_prototypes: Dict[int, DualPrototype] = field(default_factory=dict)
    d_global: Optional[np.ndarray] = None
    ratios: Optional[SelectionRatios] = None
    round_index: int = 0

    def __post_init__(self):
        empty = [c for c, labelers in enumerate(self.annotation) if not labelers]
        if empty:
            raise InvalidConfigurationException(f"Classes {empty} are labeled by no client.", classes=empty)


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    stage: Stage
    bacc: float
    auc: float
    map: float
    per_class_auc: Tuple[float, ...]
    coverage: float
    d_global: Tuple[float, ...]
    tag_precision: float
    client_updates: int
    wall_time: float = 0.0


@dataclass
class ExperimentOutcome:
    records: List[RoundRecord]
    server: ServerState
    clients: List[ClientState]
