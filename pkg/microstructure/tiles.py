'''Mapped microstructure and its cross-section with a slice plane'''
import logging
import threading
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from meshes.bbform import evaluate
from .lattice import CellTemplate, generate_cell

logger = logging.getLogger(__name__)


@dataclass
class SliceTile:
    '''Cross-section of one active box: cuboid polygon plus microstructure segments'''
    map_id: int
    box: tuple
    order: int
    plane_index: int
    polygon: np.ndarray
    center: np.ndarray = None
    parent: tuple = None
    segments: list = field(default_factory=list)

    @classmethod
    def from_activation(cls, activation, segments=()):
        return cls(
            map_id=activation.map_id,
            box=activation.box,
            order=activation.order,
            plane_index=activation.plane_index,
            polygon=activation.polygon,
            center=activation.center,
            parent=activation.parent,
            segments=list(segments),
        )


def map_polyline(bb_map, segment, samples):
    '''g evaluated at equally spaced points of a barycentric segment, shape (samples, 3)'''
    if samples < 2:
        raise ValueError('A polyline needs at least 2 samples')
    start, end = np.asarray(segment, dtype=float)
    t = np.linspace(0.0, 1.0, samples)[:, None]
    return evaluate(bb_map, (1.0 - t) * start + t * end)


def clip_to_slab(start, end, low, high):
    '''Portion of a 3D segment with low <= z <= high, or None'''
    za, zb = start[2], end[2]
    if za == zb:
        return (start, end) if low <= za <= high else None
    t_low = (low - za) / (zb - za)
    t_high = (high - za) / (zb - za)
    t0 = max(min(t_low, t_high), 0.0)
    t1 = min(max(t_low, t_high), 1.0)
    if t0 > t1:
        return None
    return start + t0 * (end - start), start + t1 * (end - start)


def slice_and_emit(polylines, plane, slab_halfwidth):
    '''2D pieces of polylines within |z - z0| <= slab_halfwidth, each shape (2, 2)'''
    if slab_halfwidth < 0:
        raise ValueError('Slab half-width must be non-negative')
    low, high = plane.z0 - slab_halfwidth, plane.z0 + slab_halfwidth
    pieces = []
    for polyline in polylines:
        for start, end in zip(polyline[:-1], polyline[1:]):
            clipped = clip_to_slab(start, end, low, high)
            if clipped is not None:
                pieces.append(np.array([clipped[0][:2], clipped[1][:2]]))
    return pieces


class MapTiler:
    '''Builds the tiles of one map; optionally keeps geometry of the boxes active on the last plane'''

    def __init__(self, bb_map, paving, template, slab, cache_active=False):
        self.map = bb_map
        self.paving = paving
        self.template = template
        self.slab = slab
        self.cache_active = cache_active
        self.cells_generated = 0
        self.beams_considered = 0
        self.samples_evaluated = 0
        self.cache_hits = 0
        self._cache = {}
        self._touched = set()

    def polylines(self, box):
        if self.cache_active and box in self._cache:
            self.cache_hits += 1
            self._touched.add(box)
            return self._cache[box]

        segments = generate_cell(self.paving, box, self.template)
        self.cells_generated += 1
        self.beams_considered += len(self.template.beams)
        lines = [map_polyline(self.map, segment, self.template.samples_per_beam) for segment in segments]
        self.samples_evaluated += len(lines) * self.template.samples_per_beam

        if self.cache_active:
            self._cache[box] = lines
            self._touched.add(box)
        return lines

    def build(self, activation, plane):
        segments = slice_and_emit(self.polylines(activation.box), plane, self.slab)
        return SliceTile.from_activation(activation, segments)

    def end_plane(self):
        '''Forget boxes that were not active on the plane just finished'''
        if self.cache_active:
            for box in set(self._cache) - self._touched:
                del self._cache[box]
        self._touched = set()


class TileBuilder:
    '''Per-run microstructure settings and counters across all maps'''

    def __init__(self, paving, template=None, slab=None, cache_active=False):
        slicer = settings.SLICER
        self.paving = paving
        self.template = template or CellTemplate(
            slicer['TEMPLATE'], slicer['RADIUS_FRACTION'], slicer['SAMPLES_PER_BEAM'],
        )
        self.slab = slicer['SLAB'] if slab is None else slab
        if self.slab < 0:
            raise ValueError('Slab half-width must be non-negative')
        self.cache_active = cache_active
        self._tilers = {}
        self._lock = threading.Lock()

    def tiler(self, bb_map):
        with self._lock:
            if bb_map.id not in self._tilers:
                self._tilers[bb_map.id] = MapTiler(bb_map, self.paving, self.template, self.slab, self.cache_active)
            return self._tilers[bb_map.id]

    def end_plane(self):
        for tiler in self._tilers.values():
            tiler.end_plane()

    def _total(self, name):
        return sum(getattr(tiler, name) for tiler in self._tilers.values())

    @property
    def cells_generated(self):
        return self._total('cells_generated')

    @property
    def samples_evaluated(self):
        return self._total('samples_evaluated')

    @property
    def beams_considered(self):
        return self._total('beams_considered')

    @property
    def cache_hits(self):
        return self._total('cache_hits')
