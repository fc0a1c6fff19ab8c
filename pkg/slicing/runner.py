'''One slicing run: maps, planes and settings wired to the sweep and its outputs'''
import logging
import os
from time import perf_counter

from django.conf import settings

from microstructure.lattice import CellTemplate
from microstructure.tiles import TileBuilder
from utils.svg_generator import write_svg
from .exports import ActivationLog
from .paving import Paving
from .sweep import sweep

logger = logging.getLogger(__name__)


class SliceJob:
    def __init__(self, maps, planes, nu=None, loop_mode=None, template=None, slab=None,
                 cache_active=False, jobs=None):
        slicer = settings.SLICER
        self.maps = list(maps)
        self.planes = planes
        self.paving = Paving.at_resolution(slicer['DEFAULT_NU'] if nu is None else nu)
        self.loop_mode = loop_mode or slicer['LOOP_MODE']
        self.template = CellTemplate(
            template or slicer['TEMPLATE'], slicer['RADIUS_FRACTION'], slicer['SAMPLES_PER_BEAM'],
        )
        self.tiles = TileBuilder(self.paving, self.template, slab, cache_active)
        self.jobs = slicer['JOBS'] if jobs is None else jobs
        self.log = ActivationLog()
        self.log.set_planes(planes.planes())
        self.stats = None
        self.elapsed = 0.0

    def __str__(self):
        return f'{len(self.maps)} maps x {len(self.planes)} planes at n={self.paving.n}'

    def run(self, sink=None):
        '''Sweep every plane; tiles go to the activation log unless another sink is given'''
        logger.info('Slicing %s (%s loops, %s cells)', self, self.loop_mode, self.template)
        started = perf_counter()
        self.stats = sweep(
            self.maps, self.planes, self.paving, sink or self.log,
            mode=self.loop_mode, tiles=self.tiles, jobs=self.jobs,
        )
        self.elapsed = perf_counter() - started
        return self.stats

    def summary(self):
        stats = self.stats
        return {
            'Maps': len(self.maps),
            'Planes': len(self.planes),
            'Resolution n': self.paving.n,
            'Total boxes per map': self.paving.total,
            'Loop mode': self.loop_mode,
            'Cell template': str(self.template),
            'Activations': stats.activations if stats else 0,
            'Cuboid tests': stats.cuboid_tests if stats else 0,
            'Cells generated': self.tiles.cells_generated,
            'Samples evaluated': self.tiles.samples_evaluated,
            'Cache hits': self.tiles.cache_hits,
            'Wall time (s)': round(self.elapsed, 4),
            'Complete': not stats.partial if stats else False,
        }

    def write_svgs(self, directory, color_mode='order'):
        '''plane_<index>.svg for every plane of the stack'''
        os.makedirs(directory, exist_ok=True)
        paths = []
        for plane in self.planes.planes():
            path = os.path.join(directory, f'plane_{plane.index}.svg')
            paths.append(write_svg(self.log.tiles_for(plane.index), path, color_mode, title=str(plane)))
        logger.info('Wrote %d SVG files to %s', len(paths), directory)
        return paths
