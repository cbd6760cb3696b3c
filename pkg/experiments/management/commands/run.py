from experiments.management.commands._base import ExperimentCommand
from experiments.services import ExperimentService, resolve_output_dir


class Command(ExperimentCommand):
    help = 'Runs one federated experiment and writes manifest, metrics and summary files.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--snapshots', action='store_true', help='Save the global model at every evaluation.')

    def handle(self, *args, **options):
        def action():
            resolved = self.resolve_config(options)
            if options.get('snapshots'):
                resolved = resolved.with_overrides({'output.snapshots': True})
            out_dir = resolve_output_dir(options.get('out'), resolved)
            summary = ExperimentService().run(resolved, out_dir)
            final = summary.get('final', {})
            self.stdout.write(self.style.SUCCESS(
                f"Run finished: BACC={final.get('bacc')} AUC={final.get('auc')} mAP={final.get('map')} -> {out_dir}"
            ))

        self.execute_safely(action, options)
