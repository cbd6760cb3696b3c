from experiments.management.commands._base import ExperimentCommand
from experiments.services import ABLATION_FILE, SweepService, resolve_output_dir


class Command(ExperimentCommand):
    help = 'Runs the five cumulative component rows (FedAvg, +MLD, +WPC, +CR, +ST) on shared data.'

    def handle(self, *args, **options):
        def action():
            resolved = self.resolve_config(options)
            out_dir = resolve_output_dir(options.get('out'), resolved)
            rows = SweepService().ablate(resolved, out_dir)
            self.stdout.write(self.style.SUCCESS(f"Ablation finished: {len(rows)} rows -> {out_dir / ABLATION_FILE}"))

        self.execute_safely(action, options)
