import csv
from unittest.mock import patch

import pytest
import yaml
from django.core.management import call_command
from django.core.management.base import CommandError

from experiments.enums import RunCommand, RunStatus
from experiments.models import ExperimentRun
from experiments.services import (
    ABLATION_FILE, MANIFEST_FILE, MASKSWEEP_FILE, METRICS_FILE, SNAPSHOT_DIR, SUMMARY_FILE
)
from unit_tests.helpers import TINY_OVERRIDES
from utils.exceptions import TrainingDivergedException


def _set_args(*extra):
    args = []
    for override in TINY_OVERRIDES + list(extra):
        args.extend(['--set', override])
    return args


def _read_csv(path):
    with open(path, encoding="utf-8", newline="") as handle:
        return list(csv.reader(handle))


def _read_yaml(path):
    with open(path, encoding="utf-8") as handle:
        return yaml.safe_load(handle)


@pytest.mark.django_db
def test_run_writes_result_files(tmp_path):
    call_command('run', *_set_args(), '--out', str(tmp_path), '--seed', '3')

    rows = _read_csv(tmp_path / METRICS_FILE)
    assert rows[0][:7] == ["round", "stage", "bacc", "auc", "map", "coverage", "tag_precision"]
    assert [row[0] for row in rows[1:]] == ["1", "3", "5", "6"]

    summary = _read_yaml(tmp_path / SUMMARY_FILE)
    assert summary["mode"] == "FEDMLP"
    assert summary["final"]["round"] == 6
    assert "detection" in summary

    manifest = _read_yaml(tmp_path / MANIFEST_FILE)
    assert manifest["seed"] == 3
    assert manifest["config"]["seed"] == 3
    assert manifest["command"] == RunCommand.RUN.value

    run = ExperimentRun.objects.get()
    assert run.status == RunStatus.COMPLETED.value
    assert run.round_metrics.count() == 4
    assert run.final_auc == pytest.approx(summary["final"]["auc"])


@pytest.mark.django_db
def test_repeated_runs_produce_identical_metrics(tmp_path):
    call_command('run', *_set_args(), '--out', str(tmp_path / "first"))
    call_command('run', *_set_args(), '--out', str(tmp_path / "second"), '--threads', '3')

    first = (tmp_path / "first" / METRICS_FILE).read_bytes()
    second = (tmp_path / "second" / METRICS_FILE).read_bytes()
    assert first == second


@pytest.mark.django_db
def test_baseline_summary_has_no_detection_section(tmp_path):
    call_command('run', *_set_args('federation.mode=FEDAVG'), '--out', str(tmp_path))

    summary = _read_yaml(tmp_path / SUMMARY_FILE)
    assert summary["mode"] == "FEDAVG"
    assert "detection" not in summary
    assert {row[1] for row in _read_csv(tmp_path / METRICS_FILE)[1:]} == {"baseline"}


@pytest.mark.django_db
def test_snapshots_are_saved_at_evaluation_rounds(tmp_path):
    call_command('run', *_set_args(), '--out', str(tmp_path), '--snapshots')

    names = sorted(path.name for path in (tmp_path / SNAPSHOT_DIR).iterdir())
    assert names == [f"round_{t:04d}.npz" for t in (1, 3, 5, 6)]


@pytest.mark.django_db
def test_invalid_configuration_exits_with_code_2(tmp_path):
    with pytest.raises(CommandError) as error:
        call_command('run', *_set_args('federation.rounds=0'), '--out', str(tmp_path))

    assert error.value.returncode == 2
    assert not ExperimentRun.objects.exists()


@pytest.mark.django_db
def test_diverged_training_exits_with_code_3_and_marks_the_run(tmp_path):
    with patch("federation.services.ClientService._train", side_effect=TrainingDivergedException(1, 0)):
        with pytest.raises(CommandError) as error:
            call_command('run', *_set_args(), '--out', str(tmp_path))

    assert error.value.returncode == 3
    run = ExperimentRun.objects.get()
    assert run.status == RunStatus.FAILED.value
    assert "Non-finite" in run.error_message
    assert not (tmp_path / METRICS_FILE).exists()


@pytest.mark.django_db
def test_output_directory_setting_is_used_without_out_flag(tmp_path, settings):
    settings.FEDMLP_OUTPUT_DIR = str(tmp_path / "env")

    call_command('run', *_set_args('federation.rounds=3', 'federation.warmup_rounds=2'))

    assert (tmp_path / "env" / METRICS_FILE).exists()


@pytest.mark.django_db
def test_ablate_runs_five_cumulative_rows(tmp_path):
    call_command('ablate', *_set_args(), '--out', str(tmp_path / "ablation"))
    call_command('run', *_set_args('federation.mode=FEDAVG'), '--out', str(tmp_path / "fedavg"))

    rows = _read_csv(tmp_path / "ablation" / ABLATION_FILE)
    assert rows[0] == ["row", "label", "mode", "mld", "wpc", "cr", "st", "bacc", "auc", "map"]
    assert [row[1] for row in rows[1:]] == ["FedAvg", "+MLD", "+WPC", "+CR", "+ST"]
    assert [row[3:7] for row in rows[1:]] == [
        ["0", "0", "0", "0"], ["1", "0", "0", "0"], ["1", "1", "0", "0"], ["1", "1", "1", "0"], ["1", "1", "1", "1"],
    ]
    assert (tmp_path / "ablation" / "row1" / METRICS_FILE).read_bytes() == (
        tmp_path / "fedavg" / METRICS_FILE).read_bytes()
    assert ExperimentRun.objects.filter(
        command=RunCommand.ABLATE.value, status=RunStatus.COMPLETED.value).count() == 5


@pytest.mark.django_db
def test_masksweep_builds_the_method_by_setting_grid(tmp_path):
    call_command('masksweep', *_set_args(), '--out', str(tmp_path), '--missing', '2', '1', '2', '5')

    rows = _read_csv(tmp_path / MASKSWEEP_FILE)
    assert rows[0] == [
        "method",
        "missing1_bacc", "missing1_auc", "missing1_map",
        "missing2_bacc", "missing2_auc", "missing2_map",
    ]
    assert [row[0] for row in rows[1:]] == ["FedAvg", "FedMLP", "warning"]
    assert all(cell != "" for row in rows[1:3] for cell in row)
    assert "missing-5" in rows[3][1]
    assert ExperimentRun.objects.filter(command=RunCommand.MASKSWEEP.value).count() == 4


@pytest.mark.django_db
def test_masksweep_requires_missing_values(tmp_path):
    with pytest.raises(CommandError):
        call_command('masksweep', *_set_args(), '--out', str(tmp_path))
