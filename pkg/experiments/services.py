import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from django.conf import settings
from django.utils import timezone

from experiments.config import ResolvedRunConfig
from experiments.enums import RunCommand
from experiments.repository import ExperimentRunRepository, ResultRepository, finite_or_none
from federation.entities import ExperimentOutcome, RoundRecord
from federation.enums import Mode
from federation.services import FederationService
from synthdata.services import DatasetService
from utils.exceptions import ExceptionMessageBuilder
from utils.files import ensure_directory

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.yaml"
MANIFEST_FILE = "manifest.yaml"
SNAPSHOT_DIR = "snapshots"
ABLATION_FILE = "ablation.csv"
MASKSWEEP_FILE = "masksweep.csv"

# cumulative component rows: label, mode, (mld, wpc, cr, st)
ABLATION_SCHEDULE = (
    ("FedAvg", Mode.FEDAVG, (False, False, False, False)),
    ("+MLD", Mode.FEDMLP, (True, False, False, False)),
    ("+WPC", Mode.FEDMLP, (True, True, False, False)),
    ("+CR", Mode.FEDMLP, (True, True, True, False)),
    ("+ST", Mode.FEDMLP, (True, True, True, True)),
)

SWEEP_MODES = (("FedAvg", Mode.FEDAVG), ("FedMLP", Mode.FEDMLP))


def resolve_output_dir(out: Optional[str], resolved: ResolvedRunConfig) -> Path:
    """`--out`, then the FEDMLP_OUTPUT_DIR setting, then `output.dir`."""
    return Path(out or settings.FEDMLP_OUTPUT_DIR or resolved.output_dir or ".")


def build_summary(
        resolved: ResolvedRunConfig,
        records: Sequence[RoundRecord],
        label: str
) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        "label": label,
        "mode": resolved.mode.value,
        "seed": resolved.seed,
        "rounds": resolved.values["federation"]["rounds"],
        "evaluations": len(records),
    }
    if records:
        final = records[-1]
        summary["final"] = {
            "round": final.round_index,
            "bacc": finite_or_none(final.bacc),
            "auc": finite_or_none(final.auc),
            "map": finite_or_none(final.map),
            "per_class_auc": [finite_or_none(v) for v in final.per_class_auc],
        }
        if resolved.mode is Mode.FEDMLP:
            summary["detection"] = {
                "warmup_rounds": resolved.values["federation"]["warmup_rounds"],
                "coverage": final.coverage,
                "tag_precision": finite_or_none(final.tag_precision),
                "d_global": [float(v) for v in final.d_global],
            }
    return summary


class ExperimentService:

    def __init__(
            self,
            run_repository: Optional[ExperimentRunRepository] = None,
            result_repository: Optional[ResultRepository] = None,
            dataset_service: Optional[DatasetService] = None
    ):
        self.run_repository = run_repository or ExperimentRunRepository()
        self.result_repository = result_repository or ResultRepository()
        self.dataset_service = dataset_service or DatasetService()

    def _snapshot_observer(self, out_dir: Path, cfg):
        def observe(round_index, stage, server, clients):
            if cfg.is_eval_round(round_index):
                self.result_repository.write_snapshot(
                    out_dir / SNAPSHOT_DIR / f"round_{round_index:04d}.npz", server.global_params)
        return observe

    def run(
            self,
            resolved: ResolvedRunConfig,
            out_dir: Union[str, Path],
            command: RunCommand = RunCommand.RUN,
            label: str = "run"
    ) -> Dict[str, Any]:
        """
        Executes one federated run and writes metrics.csv, summary.yaml and
        manifest.yaml (plus snapshots when enabled) into `out_dir`.
        """
        out_dir = ensure_directory(out_dir)
        started_at = timezone.now()
        cfg = resolved.federation_config()
        run = self.run_repository.create_run(
            command, label, cfg.mode.value, resolved.seed, resolved.as_dict(), str(out_dir))
        try:
            logger.info(f"Run {run.id} ({label}) started, writing to {out_dir}")
            self.run_repository.mark_running(run)
            dataset = self.dataset_service.prepare(
                resolved.synthetic_spec(), cfg.num_clients, resolved.missing_classes)
            observers = [self._snapshot_observer(out_dir, cfg)] if resolved.snapshots else []
            outcome: ExperimentOutcome = FederationService(cfg).execute(dataset, observers=observers)

            summary = build_summary(resolved, outcome.records, label)
            outputs = [METRICS_FILE, SUMMARY_FILE, MANIFEST_FILE] + ([SNAPSHOT_DIR] if resolved.snapshots else [])
            self.result_repository.write_metrics(out_dir / METRICS_FILE, outcome.records, cfg.num_classes)
            self.result_repository.write_yaml(out_dir / SUMMARY_FILE, summary)
            self.result_repository.write_yaml(out_dir / MANIFEST_FILE, {
                "command": command.value,
                "label": label,
                "version": settings.FEDMLP_VERSION,
                "seed": resolved.seed,
                "started_at": started_at.isoformat(),
                "finished_at": timezone.now().isoformat(),
                "outputs": [str(out_dir / name) for name in outputs],
                "config": resolved.as_dict(),
            })
            self.run_repository.complete_run(run, outcome.records)
            logger.info(f"Run {run.id} ({label}) completed: BACC={summary.get('final', {}).get('bacc')}")
            return summary
        except ExceptionMessageBuilder as e:
            logger.error(f"Run {run.id} ({label}) failed: {e.title}: {e.message}")
            self.run_repository.fail_run(run, e)
            raise
        except Exception as e:
            logger.error(f"Run {run.id} ({label}) failed unexpectedly: {e}")
            self.run_repository.fail_run(run, e)
            raise


class SweepService:

    def __init__(self, result_repository: Optional[ResultRepository] = None):
        self.result_repository = result_repository or ResultRepository()

    @staticmethod
    def _dispatch(resolved: ResolvedRunConfig, out_dir: Path, command: RunCommand, label: str) -> Dict[str, Any]:
        from experiments.tasks import execute_run

        return execute_run.delay(resolved.as_dict(), str(out_dir), command.value, label).get()

    def ablate(self, resolved: ResolvedRunConfig, out_dir: Union[str, Path]) -> List[List[Any]]:
        """
        Five cumulative component rows on shared data and seed. The table is
        rewritten after every row so finished rows survive a later failure.
        """
        out_dir = ensure_directory(out_dir)
        header = ["row", "label", "mode", "mld", "wpc", "cr", "st", "bacc", "auc", "map"]
        rows = []
        for position, (label, mode, (mld, wpc, cr, st)) in enumerate(ABLATION_SCHEDULE, start=1):
            row_config = resolved.with_overrides({
                "federation.mode": mode.value,
                "ablation.mld": mld, "ablation.wpc": wpc, "ablation.cr": cr, "ablation.st": st,
            })
            logger.info(f"Ablation row {position}/{len(ABLATION_SCHEDULE)}: {label}")
            summary = self._dispatch(row_config, out_dir / f"row{position}", RunCommand.ABLATE, label)
            final = summary.get("final", {})
            rows.append([position, label, mode.value, mld, wpc, cr, st,
                         final.get("bacc"), final.get("auc"), final.get("map")])
            self.result_repository.write_table(out_dir / ABLATION_FILE, header, rows)
        return rows

    def masksweep(
            self,
            resolved: ResolvedRunConfig,
            out_dir: Union[str, Path],
            missing_values: Sequence[int]
    ) -> List[List[Any]]:
        """
        FedAvg and FedMLP for every feasible number of hidden classes, laid out as
        one row per method and one column group per missing-m setting.
        """
        out_dir = ensure_directory(out_dir)
        classes = resolved.values["data"]["classes"]
        clients = resolved.values["federation"]["clients"]
        unique = sorted(set(int(m) for m in missing_values))

        feasible, warnings = [], []
        for m in unique:
            if 1 <= m <= classes - 1 and clients * (classes - m) >= classes:
                feasible.append(m)
            else:
                message = f"missing-{m} skipped: infeasible for K={clients}, C={classes}"
                logger.warning(message)
                warnings.append(message)

        header = ["method"] + [f"missing{m}_{metric}" for m in feasible for metric in ("bacc", "auc", "map")]
        cells = {label: {} for label, _ in SWEEP_MODES}

        def table():
            rows = [
                [label] + [cells[label].get(m, {}).get(metric) for m in feasible for metric in ("bacc", "auc", "map")]
                for label, _ in SWEEP_MODES
            ]
            rows.extend([["warning", message] for message in warnings])
            return rows

        self.result_repository.write_table(out_dir / MASKSWEEP_FILE, header, table())
        for m in feasible:
            for label, mode in SWEEP_MODES:
                row_config = resolved.with_overrides({"federation.mode": mode.value, "partition.missing_classes": m})
                summary = self._dispatch(
                    row_config, out_dir / f"missing{m}_{mode.value.lower()}", RunCommand.MASKSWEEP, f"{label} m={m}")
                cells[label][m] = summary.get("final", {})
                self.result_repository.write_table(out_dir / MASKSWEEP_FILE, header, table())
        return table()


