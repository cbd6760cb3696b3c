from experiments.management.commands._base import ExperimentCommand
from experiments.services import MASKSWEEP_FILE, SweepService, resolve_output_dir


class Command(ExperimentCommand):
    help = 'Compares FedAvg and FedMLP for each number of hidden classes per client.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--missing', type=int, nargs='+', required=True,
                            help='Missing classes per client to sweep, e.g. --missing 1 4.')

    def handle(self, *args, **options):
        def action():
            resolved = self.resolve_config(options)
            out_dir = resolve_output_dir(options.get('out'), resolved)
            SweepService().masksweep(resolved, out_dir, options['missing'])
            self.stdout.write(self.style.SUCCESS(f"Mask sweep finished -> {out_dir / MASKSWEEP_FILE}"))

        self.execute_safely(action, options)
