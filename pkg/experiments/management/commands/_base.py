import logging

from django.core.management.base import BaseCommand

from experiments.config import ConfigService, ResolvedRunConfig
from utils.handler import command_exception_handler

logger = logging.getLogger(__name__)


class ExperimentCommand(BaseCommand):
    """Shared flags and error mapping of the experiment commands."""

    def add_arguments(self, parser):
        parser.add_argument('--config', help='YAML config file (dotted or nested keys).')
        parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                            help='Override one config key; repeatable.')
        parser.add_argument('--out', help='Output directory; overrides FEDMLP_OUTPUT_DIR and output.dir.')
        parser.add_argument('--seed', type=int, help='Experiment seed.')
        parser.add_argument('--threads', type=int, help='Worker threads for client training within a run.')

    def resolve_config(self, options) -> ResolvedRunConfig:
        return ConfigService.resolve(
            options.get('config'),
            options.get('overrides') or [],
            extra={'seed': options.get('seed'), 'federation.threads': options.get('threads')},
        )

    def execute_safely(self, action, options):
        try:
            return action()
        except Exception as e:
            raise command_exception_handler(e, {'command': self.__class__.__module__, 'options': {
                key: options.get(key) for key in ('config', 'overrides', 'out', 'seed', 'threads')
            }})
