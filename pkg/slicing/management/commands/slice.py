import io
import logging

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from meshes.loader import load_mesh
from microstructure.lattice import TEMPLATES
from utils.excel_generator import SliceStatsExcel
from utils.pdf_generator import SliceRunPDF
from utils.svg_generator import COLOR_MODES
from slicing.exports import write_plane_stats, write_stats
from slicing.forms import SliceRunForm
from slicing.runner import SliceJob
from slicing.traversal import LOOP_MODES

logger = logging.getLogger(__name__)

INPUT_ERROR = 1
IO_ERROR = 2


class Command(BaseCommand):
    help = 'Slice a mesh file against a stack of planes and write the requested outputs'

    def add_arguments(self, parser):
        parser.add_argument('--mesh', help='Mesh JSON file')
        parser.add_argument('--nu', type=int, help='Resolution exponent, n = 2**nu')
        parser.add_argument('--z-start', type=float)
        parser.add_argument('--z-step', type=float)
        parser.add_argument('--count', type=int)
        parser.add_argument('--planes', help='File of ascending plane heights')
        parser.add_argument('--loop-mode', choices=LOOP_MODES)
        parser.add_argument('--template', choices=list(TEMPLATES))
        parser.add_argument('--slab', type=float, help='Half-width of the microstructure slab')
        parser.add_argument('--svg-dir', help='Directory for plane_<index>.svg')
        parser.add_argument('--color-mode', choices=COLOR_MODES, default='order')
        parser.add_argument('--log', help='Activation log (JSON)')
        parser.add_argument('--stats', help='Per map-plane statistics (CSV)')
        parser.add_argument('--plane-stats', help='Per-plane statistics (CSV)')
        parser.add_argument('--report', help='Run report (PDF)')
        parser.add_argument('--workbook', help='Statistics workbook (XLSX)')
        parser.add_argument('--cache-active', action='store_true')
        parser.add_argument('--jobs', type=int)

    def handle(self, *args, **options):
        if not options['mesh']:
            self.stderr.write(self.create_parser('manage.py', 'slice').format_usage())
            raise CommandError('--mesh is required', returncode=INPUT_ERROR)

        form = SliceRunForm(self.form_data(options))
        if not form.is_valid():
            problems = '; '.join(
                f'{field}: {" ".join(errors)}' if field != '__all__' else ' '.join(errors)
                for field, errors in form.errors.items()
            )
            raise CommandError(f'Invalid options: {problems}', returncode=INPUT_ERROR)
        data = form.cleaned_data

        try:
            document = load_mesh(options['mesh'])
        except OSError as exc:
            raise CommandError(f'Cannot read {options["mesh"]}: {exc}', returncode=IO_ERROR)
        except ValidationError as exc:
            raise CommandError(f'Invalid mesh: {"; ".join(exc.messages)}', returncode=INPUT_ERROR)

        try:
            job = SliceJob(
                document.maps, data['plane_stack'],
                nu=data['nu'],
                loop_mode=data['loop_mode'],
                template=data['template'],
                slab=data['slab'],
                cache_active=data['cache_active'],
                jobs=data['jobs'],
            )
        except ValueError as exc:
            raise CommandError(str(exc), returncode=INPUT_ERROR)
        stats = job.run()

        try:
            self.write_outputs(job, options)
        except OSError as exc:
            raise CommandError(f'Cannot write output: {exc}', returncode=IO_ERROR)

        for label, value in job.summary().items():
            self.stdout.write(f'{label}: {value}')
        if stats.partial:
            raise CommandError(f'Sweep aborted, outputs are partial: {stats.error}', returncode=IO_ERROR)
        self.stdout.write(self.style.SUCCESS(f'Sliced {job}'))

    def form_data(self, options):
        data = {
            'nu': options['nu'],
            'loop_mode': options['loop_mode'] or '',
            'template': options['template'] or '',
            'slab': options['slab'],
            'z_start': options['z_start'],
            'z_step': options['z_step'],
            'count': options['count'],
            'cache_active': options['cache_active'],
            'jobs': options['jobs'],
        }
        if options['planes']:
            try:
                with open(options['planes'], encoding='utf-8') as handle:
                    data['planes'] = handle.read()
            except OSError as exc:
                raise CommandError(f'Cannot read {options["planes"]}: {exc}', returncode=IO_ERROR)
            except UnicodeDecodeError:
                raise CommandError(f'Plane file {options["planes"]} must be UTF-8 text', returncode=INPUT_ERROR)
        return {key: value for key, value in data.items() if value is not None}

    def write_outputs(self, job, options):
        stats = job.stats
        if options['log']:
            job.log.write(options['log'])
        if options['stats']:
            write_stats(stats, options['stats'])
        if options['plane_stats']:
            write_plane_stats(stats, options['plane_stats'])
        if options['svg_dir']:
            job.write_svgs(options['svg_dir'], options['color_mode'])

        title = f'Slice run: {options["mesh"]}'
        if options['report']:
            buffer = io.BytesIO()
            SliceRunPDF(title, job.summary(), stats.planes).build().generate(buffer)
            with open(options['report'], 'wb') as handle:
                handle.write(buffer.getvalue())
        if options['workbook']:
            SliceStatsExcel(title, job.summary(), stats.planes, stats.pairs).build().save(options['workbook'])
