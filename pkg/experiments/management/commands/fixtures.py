from django.conf import settings
from django.core.management.base import BaseCommand

from experiments.fixtures import FixtureService
from utils.handler import command_exception_handler


class Command(BaseCommand):
    help = 'Writes hand-checkable operation fixtures with their expected values as YAML files.'

    def add_arguments(self, parser):
        parser.add_argument('--out', help='Fixture directory; defaults to FEDMLP_OUTPUT_DIR/fixtures.')

    def handle(self, *args, **options):
        out_dir = options.get('out') or f"{settings.FEDMLP_OUTPUT_DIR or 'results'}/fixtures"
        try:
            written = FixtureService().emit(out_dir)
        except Exception as e:
            raise command_exception_handler(e, {'command': 'fixtures', 'out': out_dir})
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(written)} fixtures to {out_dir}"))
