'''Depth-first iterator over the active boxes of one map-plane pair.

Boxes are seeded from the edges of the domain (and from faces where the slice
may close up into a loop), then grown through the 12-neighborhood. Walking
back and restarting are loops rather than recursion so deep components do not
exhaust the interpreter stack.
'''
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from meshes.bbform import TriPatch, bb_product, evaluate, face_patch, patch_direction_derivative
from .cuboid import Cuboid, intersection_center, intersection_polygon, plane_hits
from .paving import FACES

logger = logging.getLogger(__name__)

LOOP_MODES = ('sound', 'paper-det', 'always-scan')


@dataclass
class SliceActivation:
    '''One active box, in the order the iterator reached it'''
    map_id: int
    box: tuple
    order: int
    parent: tuple = None
    plane_index: int = 0
    center: np.ndarray = None
    polygon: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))


def face_may_have_loop(bb_map, face, mode):
    '''False only when the slice provably cannot close up inside the face'''
    if mode not in LOOP_MODES:
        raise ValueError(f'Unknown loop mode {mode!r}')
    if mode == 'always-scan':
        return True

    patch = face_patch(bb_map, face)
    if mode == 'sound':
        height = patch.component(2)
        return not any(
            patch_direction_derivative(height, direction).is_strictly_one_signed()
            for direction in (1, 2)
        )

    # det(n, d/dt1, d/dt2) with n = (0, 0, 1)
    first = patch_direction_derivative(patch, 1)
    second = patch_direction_derivative(patch, 2)
    xy = bb_product(first.component(0), second.component(1))
    yx = bb_product(first.component(1), second.component(0))
    det = TriPatch(xy.degree, xy.coeffs - yx.coeffs)
    return not det.is_strictly_one_signed()


class TraversalState:
    '''Iterator state for one map and one plane.

    Cuboid tests are cached per box; `tests` counts boxes actually mapped.
    '''

    def __init__(self, bb_map, plane, paving, mode=None, tolerance=None):
        self.map = bb_map
        self.plane = plane
        self.paving = paving
        self.mode = mode or settings.SLICER['LOOP_MODE']
        if self.mode not in LOOP_MODES:
            raise ValueError(f'Unknown loop mode {self.mode!r}')
        self.tolerance = tolerance if tolerance is not None else bb_map.tolerance(paving.nu)

        self.curr = None
        self.prev = None
        self.to_revisit = []
        self.visited = set()
        self.parents = {}
        self.boundary = []
        self.is_valid = False
        self.tests = 0
        self.emitted = 0
        self.scanned = 0

        self._hits = {}
        self._cuboids = {}
        self._centers = {}

    def __str__(self):
        return f'Traversal of map {getattr(self.map, "id", "?")} at {self.plane}'

    @property
    def band(self):
        return float(self.tolerance.band[2])

    # Cuboid tests

    def probe_many(self, boxes):
        missing = [box for box in dict.fromkeys(boxes) if box not in self._hits]
        if missing:
            verts = self._map_corners(missing)
            hits = plane_hits(verts, self.band, self.plane.z0)
            self.tests += len(missing)
            for box, hit, box_verts in zip(missing, hits, verts):
                self._hits[box] = bool(hit)
                if hit:
                    self._cuboids[box] = Cuboid(box_verts, self.tolerance)
        return [self._hits[box] for box in boxes]

    def probe(self, box):
        return self.probe_many([box])[0]

    def _map_corners(self, boxes):
        return evaluate(self.map, self.paving.corners_of(boxes))

    def cuboid(self, box):
        self.probe(box)
        return self._cuboids.get(box)

    def center(self, box):
        if box not in self._centers:
            self._centers[box] = intersection_center(self.cuboid(box), self.plane)
        return self._centers[box]

    def intersecting_neighbors(self, box):
        candidates = self.paving.neighbors(box)
        return [candidate for candidate, hit in zip(candidates, self.probe_many(candidates)) if hit]

    # Seeding

    def plane_misses_map(self):
        z_min, z_max = self.map.z_range
        return self.plane.z0 < z_min - self.band or self.plane.z0 > z_max + self.band

    def find_boundary_boxes(self):
        if self.plane_misses_map():
            return []
        edge = self.paving.edge_boxes()
        seeds = [box for box, hit in zip(edge, self.probe_many(edge)) if hit]
        self.scanned = len(edge)
        for face in FACES:
            if face_may_have_loop(self.map, face, self.mode):
                boxes = self.paving.face_boxes(face)
                self.scanned += len(boxes)
                seeds.extend(box for box, hit in zip(boxes, self.probe_many(boxes)) if hit)
        return list(dict.fromkeys(seeds))

    def initialize(self):
        self.to_revisit = []
        self.visited = set()
        self.parents = {}
        self.prev = None
        self.boundary = self.find_boundary_boxes()
        if not self.boundary:
            self.curr = None
            self.is_valid = False
            return self
        self.is_valid = True
        self._land(self.boundary[0], parent=None)
        logger.debug('%s seeded with %d boundary boxes', self, len(self.boundary))
        return self

    # Movement

    def _land(self, box, parent):
        self.curr = box
        if box not in self.parents:
            self.parents[box] = parent
        self.visited.add(box)
        self.to_revisit.append(box)

    def sort_ccw(self, candidates):
        '''Counterclockwise from the direction back to the previous box (or +x)'''
        here = self.center(self.curr)
        if self.prev is None:
            reference = np.array([1.0, 0.0])
        else:
            reference = self.center(self.prev) - here

        def key(box):
            offset = self.center(box) - here
            cross = reference[0] * offset[1] - reference[1] * offset[0]
            dot = reference[0] * offset[0] + reference[1] * offset[1]
            return math.atan2(cross, dot) % (2.0 * math.pi), tuple(box)

        return sorted(candidates, key=key)

    def _step_forward(self):
        '''Move to the first unvisited intersecting neighbor, if any'''
        candidates = [box for box in self.intersecting_neighbors(self.curr) if box not in self.visited]
        if not candidates:
            return False
        candidates = self.sort_ccw(candidates)
        parent = self.curr
        self.prev = self.curr
        self._land(candidates[0], parent)
        return True

    def _step_back(self):
        '''Pop back to the nearest earlier box; False when the stack ran dry'''
        while self.to_revisit and self.to_revisit[-1] == self.curr:
            self.to_revisit.pop()
        if not self.to_revisit:
            self.restart_on_boundary()
            return False
        self.prev = self.curr
        self.curr = self.to_revisit.pop()
        self.visited.add(self.curr)
        self.to_revisit.append(self.curr)
        return True

    def find_next_box(self):
        while not self._step_forward():
            if not self._step_back():
                return

    def walk_back(self):
        if self._step_back():
            self.find_next_box()

    def restart_on_boundary(self):
        self.boundary = [box for box in self.boundary if box not in self.visited]
        if self.boundary:
            self.prev = None
            self._land(self.boundary[0], parent=None)
        else:
            self.is_valid = False

    def increment(self):
        if not self.is_valid:
            raise RuntimeError('increment called on an exhausted traversal')
        if self.intersecting_neighbors(self.curr):
            self.find_next_box()
        else:
            self.restart_on_boundary()

    # Output

    def activation(self):
        box = self.curr
        cuboid = self.cuboid(box)
        return SliceActivation(
            map_id=getattr(self.map, 'id', 0),
            box=box,
            order=self.emitted,
            parent=self.parents.get(box),
            plane_index=self.plane.index,
            center=self.center(box),
            polygon=intersection_polygon(cuboid, self.plane) if cuboid is not None else np.empty((0, 2)),
        )

    def activations(self):
        '''Yield every active box once, in traversal order'''
        while self.is_valid:
            record = self.activation()
            self.emitted += 1
            yield record
            self.increment()
        logger.debug('%s finished: %d boxes, %d tests', self, self.emitted, self.tests)


def initialize(bb_map, plane, paving, mode=None, tolerance=None):
    return TraversalState(bb_map, plane, paving, mode, tolerance).initialize()


def traverse(bb_map, plane, paving, mode=None, tolerance=None):
    '''All activations of one map-plane pair plus the finished state'''
    state = initialize(bb_map, plane, paving, mode, tolerance)
    return list(state.activations()), state
