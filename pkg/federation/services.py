import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from core_model.entities import ClassPriors, ModelParams, OptimizerState
from core_model.losses import adjust_probs, bce_loss, mse_consistency_loss, wpc_loss
from core_model.network import backward, forward, init_params
from core_model.optimizer import optimizer_step
from federation.aggregation import fedavg_aggregate
from federation.entities import (
    ClientReport, ClientState, ExperimentOutcome, FederationConfig, RoundRecord, ServerState
)
from federation.enums import PriorsSource, Stage
from metrics.services import evaluate, pseudo_label_audit
from prototypes.engine import (
    aggregate_global_difficulty, aggregate_global_prototypes, compute_local_difficulty,
    compute_local_prototypes, confidence_scores, select_pseudo_labels, selection_ratios
)
from prototypes.entities import SelectionRatios
from prototypes.ledger import PseudoLabelLedger
from synthdata.augmentation import augment_two_views
from synthdata.entities import ClientShard, FederatedDataset
from synthdata.priors import compute_class_priors
from utils.exceptions import (
    ExceptionMessageBuilder, InvalidConfigurationException, ProtocolViolationException, TrainingDivergedException
)
from utils.streams import client_rng, init_rng

logger = logging.getLogger(__name__)

RoundObserver = Callable[[int, Stage, ServerState, List[ClientState]], None]


class ClientService:

    def __init__(self, cfg: FederationConfig):
        self.cfg = cfg
        self.plan = cfg.plan

    def build_client(
            self,
            shard: ClientShard,
            negative_classes: Sequence[int],
            global_params: ModelParams,
            oracle_priors: Optional[ClassPriors] = None
    ) -> ClientState:
        negative = tuple(sorted(int(c) for c in negative_classes))
        active = tuple(c for c in range(self.cfg.num_classes) if c not in negative)
        if self.cfg.priors_source is PriorsSource.GLOBAL_ORACLE and oracle_priors is not None:
            priors = oracle_priors
        else:
            priors = compute_class_priors(shard.observed_labels, shard.active_mask, la_tau=self.cfg.la_tau)
        params = global_params.copy()
        return ClientState(
            client_id=shard.client_id,
            inputs=shard.inputs,
            labels=shard.observed_labels,
            active_mask=shard.active_mask,
            active_classes=active,
            negative_classes=negative,
            params=params,
            optimizer=OptimizerState.fresh(params, self.cfg.learning_rate, self.cfg.weight_decay),
            ledger=PseudoLabelLedger.empty(shard.num_samples, negative),
            priors=priors,
        )

    def _training_priors(self, priors: ClassPriors) -> ClassPriors:
        if self.plan.logit_adjust:
            return priors
        return ClassPriors.balanced(self.cfg.num_classes, self.cfg.la_tau)

    def _train(
            self,
            client: ClientState,
            params: ModelParams,
            labels: np.ndarray,
            supervised: Optional[np.ndarray],
            priors: ClassPriors,
            rng: np.random.Generator,
            round_index: int,
            teacher: Optional[ModelParams] = None,
            uncertain: Optional[np.ndarray] = None
    ) -> Tuple[ModelParams, OptimizerState]:
        """
        Minibatch training over the union of both augmented views. `supervised=None`
        means plain BCE on every class; otherwise the partial loss on the masked entries.
        """
        cfg = self.cfg
        optimizer = client.optimizer
        n = client.num_samples
        sample_ids = np.concatenate([np.arange(n), np.arange(n)])

        for _ in range(cfg.local_epochs):
            view1, view2 = augment_two_views(client.inputs, cfg.weak_noise, cfg.strong_noise, rng)
            inputs = np.vstack([view1, view2])
            teacher_probs = forward(teacher, view1).probs if teacher is not None else None
            order = rng.permutation(2 * n)

            for start in range(0, 2 * n, cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                ids = sample_ids[batch]
                result = forward(params, inputs[batch])
                if supervised is None:
                    loss, grad = bce_loss(result.probs, labels[ids])
                else:
                    loss, grad = wpc_loss(result.probs, labels[ids], supervised[ids], priors, cfg.loss_normalizer)
                if teacher_probs is not None:
                    cr_loss, cr_grad = mse_consistency_loss(result.probs, teacher_probs[ids], uncertain[ids])
                    loss += cfg.cr_weight * cr_loss
                    grad = grad + cfg.cr_weight * cr_grad

                if not np.isfinite(loss):
                    raise TrainingDivergedException(round_index, client.client_id)
                try:
                    params, optimizer = optimizer_step(params, backward(params, result, grad), optimizer)
                except TrainingDivergedException as e:
                    raise TrainingDivergedException(round_index, client.client_id, what=e.detail.get("what", "update"))
        return params, optimizer

    def local_train_warmup(
            self,
            client: ClientState,
            global_params: ModelParams,
            round_index: int,
            rng: np.random.Generator
    ) -> ClientState:
        supervised = client.active_mask if self.plan.partial else None
        params, optimizer = self._train(
            client, global_params.copy(), client.labels, supervised,
            self._training_priors(client.priors), rng, round_index,
        )
        return replace(client, params=params, optimizer=optimizer)

    def detect_missing_labels(
            self,
            client: ClientState,
            server: ServerState,
            round_index: int
    ) -> PseudoLabelLedger:
        """
        Scores every residual entry against the global dual prototypes using the
        downloaded model's features and tags the most confident ones permanently.
        """
        ledger = client.ledger
        if not server.global_prototypes or server.ratios is None:
            logger.debug(f"Client {client.client_id}: no global prototypes yet, tagging skipped")
            return ledger

        features = forward(server.global_params, client.inputs).features
        scores = confidence_scores(features, server.global_prototypes, ledger.negative_classes)
        for col, class_id in enumerate(ledger.negative_classes):
            prototype = server.global_prototypes.get(class_id)
            residual = ledger.residual(class_id)
            if prototype is None or not prototype.is_complete or residual.size == 0:
                continue
            tagged_0, tagged_1 = select_pseudo_labels(
                scores[residual, col], server.ratios.tau0[class_id], server.ratios.tau1[class_id])
            ledger = ledger.tag(class_id, residual[tagged_0], 0, round_index)
            ledger = ledger.tag(class_id, residual[tagged_1], 1, round_index)
            if tagged_0.size or tagged_1.size:
                logger.debug(
                    f"Client {client.client_id}, round {round_index}, class {class_id}: "
                    f"tagged {tagged_0.size} negative / {tagged_1.size} positive"
                )
        return ledger

    def local_train_detection(
            self,
            client: ClientState,
            server: ServerState,
            round_index: int,
            rng: np.random.Generator
    ) -> ClientState:
        cfg, plan = self.cfg, self.plan
        ledger = self.detect_missing_labels(client, server, round_index) if plan.tagging else client.ledger

        priors = client.priors
        if plan.logit_adjust and cfg.priors_source is PriorsSource.LOCAL:
            priors = compute_class_priors(
                client.labels, client.active_mask, ledger, la_tau=cfg.la_tau, warn_defaulted=False)

        labels, supervised = client.labels, None
        if plan.partial:
            pseudo_labels, pseudo_mask = ledger.hard_labels(cfg.num_classes)
            labels = np.where(pseudo_mask, pseudo_labels, client.labels)
            supervised = client.active_mask | pseudo_mask

        teacher, uncertain = None, None
        if plan.consistency:
            teacher, uncertain = server.global_params, ledger.untagged_mask(cfg.num_classes)

        params, optimizer = self._train(
            replace(client, ledger=ledger), server.global_params.copy(), labels, supervised,
            self._training_priors(priors), rng, round_index, teacher=teacher, uncertain=uncertain,
        )
        return replace(client, params=params, optimizer=optimizer, ledger=ledger, priors=priors)

    def local_calculation(self, client: ClientState) -> ClientReport:
        """Local dual prototypes and difficulty of the freshly trained model."""
        result = forward(client.params, client.inputs)
        return ClientReport(
            client_id=client.client_id,
            params=client.params,
            num_samples=client.num_samples,
            prototypes=compute_local_prototypes(result.features, client.labels, client.active_classes),
            difficulty=compute_local_difficulty(
                result.probs, client.active_classes, self.cfg.band_low, self.cfg.band_high),
        )

    @staticmethod
    def report_params(client: ClientState) -> ClientReport:
        return ClientReport(client_id=client.client_id, params=client.params, num_samples=client.num_samples)


class ServerService:

    def __init__(self, cfg: FederationConfig):
        self.cfg = cfg
        self.plan = cfg.plan

    def server_round(
            self,
            server: ServerState,
            reports: Sequence[ClientReport],
            round_index: int,
            full_aggregation: bool = False
    ) -> ServerState:
        """
        Aggregates the client models; with full aggregation it also rebuilds the
        global prototypes, difficulty and selection ratios.
        """
        reports = sorted(reports, key=lambda report: report.client_id)
        reported = [report.client_id for report in reports]
        if reported != list(range(self.cfg.num_clients)):
            raise ProtocolViolationException(
                f"Round {round_index}: expected reports from clients 0..{self.cfg.num_clients - 1}, got {reported}.",
                round=round_index,
            )

        global_params = fedavg_aggregate([r.params for r in reports], [r.num_samples for r in reports])
        if not full_aggregation:
            return replace(server, global_params=global_params, round_index=round_index)

        missing = [r.client_id for r in reports if r.difficulty is None]
        if missing:
            raise ProtocolViolationException(
                f"Round {round_index}: clients {missing} sent no local calculation.", round=round_index)

        local_prototypes = {
            (r.client_id, class_id): prototype
            for r in reports for class_id, prototype in r.prototypes.items()
        }
        local_difficulty = {
            (r.client_id, class_id): value
            for r in reports for class_id, value in r.difficulty.local.items()
        }
        sizes = {r.client_id: r.num_samples for r in reports}

        global_prototypes = aggregate_global_prototypes(local_prototypes, server.annotation)
        d_global = aggregate_global_difficulty(local_difficulty, sizes, server.annotation)
        ratios = selection_ratios(
            d_global, self.cfg.num_classes, self.cfg.base_negative_ratio, self.cfg.base_positive_ratio,
            self.plan.adaptive,
        )
        logger.debug(f"Round {round_index}: d_global={np.round(d_global, 4).tolist()}")
        return replace(
            server,
            global_params=global_params,
            global_prototypes=global_prototypes,
            d_global=d_global,
            ratios=ratios,
            round_index=round_index,
        )


class FederationService:

    def __init__(
            self,
            cfg: FederationConfig,
            client_service: Optional[ClientService] = None,
            server_service: Optional[ServerService] = None
    ):
        self.cfg = cfg
        self.plan = cfg.plan
        self.client_service = client_service or ClientService(cfg)
        self.server_service = server_service or ServerService(cfg)

    def _check_dataset(self, dataset: FederatedDataset) -> None:
        if dataset.num_clients != self.cfg.num_clients:
            raise InvalidConfigurationException(
                f"Dataset has {dataset.num_clients} shards but {self.cfg.num_clients} clients are configured.")
        if dataset.test_labels.shape[1] != self.cfg.num_classes:
            raise InvalidConfigurationException(
                f"Dataset has {dataset.test_labels.shape[1]} classes but {self.cfg.num_classes} are configured.")

    def initial_state(
            self,
            dataset: FederatedDataset
    ) -> Tuple[ServerState, List[ClientState], ClassPriors]:
        self._check_dataset(dataset)
        cfg = self.cfg
        oracle_priors = compute_class_priors(
            dataset.train_truth(), np.ones((dataset.train_size, cfg.num_classes), dtype=bool), la_tau=cfg.la_tau)
        global_params = init_params(dataset.test_inputs.shape[1], cfg.hidden_dim, cfg.num_classes, init_rng(cfg.seed))
        clients = [
            self.client_service.build_client(
                shard, dataset.plan.negative_classes(shard.client_id), global_params, oracle_priors)
            for shard in dataset.shards
        ]
        server = ServerState(
            global_params=global_params,
            annotation=dataset.plan.annotation,
            ratios=SelectionRatios.constant(cfg.num_classes, cfg.base_negative_ratio, cfg.base_positive_ratio),
        )
        return server, clients, oracle_priors

    def client_round(
            self,
            client: ClientState,
            server: ServerState,
            round_index: int,
            full_aggregation: bool
    ) -> Tuple[ClientState, ClientReport]:
        rng = client_rng(self.cfg.seed, client.client_id, round_index)
        if self.cfg.stage_of(round_index) is Stage.DETECTION:
            client = self.client_service.local_train_detection(client, server, round_index, rng)
        else:
            client = self.client_service.local_train_warmup(client, server.global_params, round_index, rng)
        if full_aggregation:
            return client, self.client_service.local_calculation(client)
        return client, self.client_service.report_params(client)

    def evaluate_round(
            self,
            round_index: int,
            server: ServerState,
            clients: Sequence[ClientState],
            dataset: FederatedDataset,
            oracle_priors: ClassPriors,
            wall_time: float
    ) -> RoundRecord:
        probs = forward(server.global_params, dataset.test_inputs).probs
        if self.cfg.eval_adjusted:
            probs = adjust_probs(probs, oracle_priors)
        report = evaluate(probs, dataset.test_labels, self.cfg.eval_threshold)

        audit = pseudo_label_audit([c.ledger for c in clients], [s.truth_labels for s in dataset.shards])
        d_global = tuple(float(v) for v in server.d_global) if server.d_global is not None else ()
        return RoundRecord(
            round_index=round_index,
            stage=self.cfg.stage_of(round_index),
            bacc=report.bacc,
            auc=report.auc,
            map=report.map,
            per_class_auc=tuple(float(v) for v in report.per_class_auc),
            coverage=100.0 * audit.coverage,
            d_global=d_global,
            tag_precision=audit.precision,
            client_updates=len(clients),
            wall_time=wall_time,
        )

    def execute(
            self,
            dataset: FederatedDataset,
            observers: Sequence[RoundObserver] = (),
            on_record: Optional[Callable[[RoundRecord], None]] = None
    ) -> ExperimentOutcome:
        cfg = self.cfg
        server, clients, oracle_priors = self.initial_state(dataset)
        records = []
        logger.info(
            f"Starting {cfg.mode.value} run: K={cfg.num_clients}, C={cfg.num_classes}, "
            f"T={cfg.total_rounds}, t1={cfg.warmup_rounds}, seed={cfg.seed}, threads={cfg.threads}"
        )

        pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
        started = time.perf_counter()
        try:
            for round_index in range(1, cfg.total_rounds + 1):
                stage = cfg.stage_of(round_index)
                full = self.plan.detection_stage and round_index >= cfg.warmup_rounds

                def work(client, server=server, round_index=round_index, full=full):
                    return self.client_round(client, server, round_index, full)

                try:
                    results = list(pool.map(work, clients)) if pool else [work(c) for c in clients]
                    clients = [client for client, _ in results]
                    server = self.server_service.server_round(server, [r for _, r in results], round_index, full)
                except ExceptionMessageBuilder as e:
                    logger.error(f"Round {round_index} ({stage.value}) failed: {e.message}")
                    raise

                for observer in observers:
                    observer(round_index, stage, server, clients)

                if cfg.is_eval_round(round_index):
                    record = self.evaluate_round(
                        round_index, server, clients, dataset, oracle_priors, time.perf_counter() - started)
                    records.append(record)
                    logger.info(
                        f"Round {round_index} [{stage.value}]: BACC={record.bacc:.4f} AUC={record.auc:.4f} "
                        f"mAP={record.map:.4f} coverage={record.coverage:.2f}%"
                    )
                    if on_record is not None:
                        on_record(record)
        finally:
            if pool is not None:
                pool.shutdown()

        return ExperimentOutcome(records=records, server=server, clients=clients)


def run_experiment(cfg: FederationConfig, dataset: FederatedDataset) -> List[RoundRecord]:
    return FederationService(cfg).execute(dataset).records
