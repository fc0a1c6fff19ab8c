from django.core.management.base import BaseCommand, CommandError

from meshes.demo import demo_stack
from meshes.loader import write_mesh


class Command(BaseCommand):
    help = 'Write the synthetic demo stack of cubic maps as a mesh file'

    def add_arguments(self, parser):
        parser.add_argument('path', help='Output mesh JSON')
        parser.add_argument('--count', type=int, default=20, help='Number of maps in the stack')

    def handle(self, *args, **options):
        if options['count'] < 1:
            raise CommandError('--count must be at least 1', returncode=1)
        maps = demo_stack(options['count'])
        try:
            write_mesh(maps, options['path'])
        except OSError as exc:
            raise CommandError(f'Cannot write {options["path"]}: {exc}', returncode=2)
        self.stdout.write(self.style.SUCCESS(f'Wrote {len(maps)} maps to {options["path"]}'))
