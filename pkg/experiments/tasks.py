import logging
from typing import Any, Dict

from celery import shared_task

from experiments.config import ConfigService
from experiments.enums import RunCommand
from experiments.services import ExperimentService

logger = logging.getLogger(__name__)


@shared_task
def execute_run(config: Dict[str, Any], out_dir: str, command: str = RunCommand.RUN.value, label: str = "run"):
    resolved = ConfigService.from_mapping(config)
    logger.info(f"Executing {command} run '{label}' into {out_dir}")
    return ExperimentService().run(resolved, out_dir, RunCommand(command), label)
