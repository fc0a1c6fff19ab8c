from django.core.management.base import BaseCommand, CommandError

from slicing.acceptance import run_all


class Command(BaseCommand):
    help = 'Check the slicer against its brute-force oracles; prints PASS/FAIL per property'

    def add_arguments(self, parser):
        parser.add_argument('--trials', type=int, default=50, help='Random maps for the oracle checks')
        parser.add_argument('--dominance-maps', type=int, default=100)
        parser.add_argument('--seed', type=int, default=2024)
        parser.add_argument('--max-nu', type=int, default=8, help='Largest resolution for the scaling checks')

    def handle(self, *args, **options):
        if options['max_nu'] < 6:
            raise CommandError('--max-nu must be at least 6', returncode=1)
        failed = []
        for result in run_all(options['trials'], options['seed'], options['max_nu'], options['dominance_maps']):
            style = self.style.SUCCESS if result.ok else self.style.ERROR
            self.stdout.write(style(str(result)))
            if not result.ok:
                failed.append(result.name)
        if failed:
            raise CommandError(f'{len(failed)} properties failed: {", ".join(failed)}', returncode=1)
