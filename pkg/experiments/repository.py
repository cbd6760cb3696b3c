import csv
import io
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import yaml
from django.db import transaction
from django.utils import timezone

from core_model.entities import ModelParams
from experiments.enums import RunCommand, RunStatus
from experiments.models import ExperimentRun, RoundMetric
from federation.entities import RoundRecord
from utils.files import atomic_write, atomic_write_text

CSV_PRECISION = "{:.6g}"


def finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else CSV_PRECISION.format(float(value))
    return str(value)


class ExperimentRunRepository:
    @staticmethod
    def create_run(
            command: RunCommand,
            label: str,
            mode: str,
            seed: int,
            config: Dict[str, Any],
            output_dir: str
    ) -> ExperimentRun:
        return ExperimentRun.objects.create(
            command=command.value,
            label=label,
            mode=mode,
            seed=seed,
            config=config,
            output_dir=output_dir,
            status=RunStatus.PENDING.value,
        )

    @staticmethod
    def mark_running(run: ExperimentRun) -> None:
        run.status = RunStatus.RUNNING.value
        run.started_at = timezone.now()
        run.save()

    @staticmethod
    @transaction.atomic
    def complete_run(run: ExperimentRun, records: Sequence[RoundRecord]) -> ExperimentRun:
        RoundMetric.objects.bulk_create([
            RoundMetric(
                run=run,
                round_index=record.round_index,
                stage=record.stage.value,
                bacc=finite_or_none(record.bacc),
                auc=finite_or_none(record.auc),
                map=finite_or_none(record.map),
                coverage=record.coverage,
                tag_precision=finite_or_none(record.tag_precision),
            )
            for record in records
        ])
        final = records[-1] if records else None
        run.final_bacc = finite_or_none(final.bacc) if final else None
        run.final_auc = finite_or_none(final.auc) if final else None
        run.final_map = finite_or_none(final.map) if final else None
        run.status = RunStatus.COMPLETED.value
        run.finished_at = timezone.now()
        run.save()
        return run

    @staticmethod
    def fail_run(run: ExperimentRun, error: Exception) -> None:
        run.status = RunStatus.FAILED.value
        run.error_message = str(error)
        run.finished_at = timezone.now()
        run.save()

    @staticmethod
    def get_runs(command: Optional[RunCommand] = None):
        queryset = ExperimentRun.objects.all().order_by('id')
        if command:
            queryset = queryset.filter(command=command.value)
        return queryset


class ResultRepository:
    """Deterministic, atomically written result files."""

    @staticmethod
    def metrics_header(num_classes: int) -> List[str]:
        return (
            ["round", "stage", "bacc", "auc", "map", "coverage", "tag_precision"]
            + [f"auc_c{c}" for c in range(num_classes)]
            + [f"dg_c{c}" for c in range(num_classes)]
        )

    def render_metrics(self, records: Sequence[RoundRecord], num_classes: int) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.metrics_header(num_classes))
        for record in records:
            d_global = list(record.d_global) or [None] * num_classes
            writer.writerow([format_value(value) for value in (
                [record.round_index, record.stage.value, record.bacc, record.auc, record.map,
                 record.coverage, record.tag_precision]
                + list(record.per_class_auc)
                + d_global
            )])
        return buffer.getvalue()

    def write_metrics(self, path: Union[str, Path], records: Sequence[RoundRecord], num_classes: int) -> Path:
        return atomic_write_text(path, self.render_metrics(records, num_classes))

    @staticmethod
    def write_table(path: Union[str, Path], header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
        return atomic_write_text(path, buffer.getvalue())

    @staticmethod
    def write_yaml(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
        return atomic_write_text(path, yaml.safe_dump(payload, sort_keys=False, default_flow_style=False))

    @staticmethod
    def write_snapshot(path: Union[str, Path], params: ModelParams) -> Path:
        return atomic_write(path, lambda handle: np.savez(handle, **params.as_dict()), binary=True)
