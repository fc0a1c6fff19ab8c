'''Brute-force references for the traversal, the bounds and the bucketing.

Everything here enumerates all boxes (O(n^3)) and is meant for tests and the
verify command only.
'''
import logging
from collections import deque
from dataclasses import dataclass
from itertools import product

import numpy as np
from django.conf import settings

from meshes.bbform import evaluate, jacobian_samples
from .cuboid import plane_hits
from .paving import CORNER_OFFSETS
from .traversal import traverse

logger = logging.getLogger(__name__)

BOX_CHUNK = 2048


@dataclass(frozen=True)
class ActiveSet:
    boxes: frozenset
    source: str

    def __len__(self):
        return len(self.boxes)

    def __contains__(self, box):
        return box in self.boxes


def _check_size(paving, limit=None):
    limit = settings.SLICER['ORACLE_MAX_N'] if limit is None else limit
    if paving.n > limit:
        raise ValueError(f'Brute-force oracles are capped at n={limit}, got n={paving.n}')


def trilinear_weights(per_axis):
    '''Weights of the 8 box corners at a per_axis**3 parameter grid, shape (s, 8)'''
    t = np.linspace(0.0, 1.0, per_axis)
    grid = np.array(list(product(t, repeat=3)))
    return np.prod(np.where(CORNER_OFFSETS[None, :, :] == 1.0, grid[:, None, :], 1.0 - grid[:, None, :]), axis=-1)


def _chunks(items, size=BOX_CHUNK):
    for start in range(0, len(items), size):
        yield items[start:start + size]


def brute_force_active(bb_map, paving, plane, tolerance=None, limit=None):
    '''Every box whose inflated cuboid meets the plane'''
    _check_size(paving, limit)
    tolerance = tolerance if tolerance is not None else bb_map.tolerance(paving.nu)
    band = float(tolerance.band[2])
    boxes = list(paving.boxes())
    active = set()
    for chunk in _chunks(boxes):
        verts = evaluate(bb_map, paving.corners_of(chunk))
        active.update(box for box, hit in zip(chunk, plane_hits(verts, band, plane.z0)) if hit)
    return ActiveSet(frozenset(active), 'inflated-test')


def dense_sample_active(bb_map, paving, plane, samples_per_box=64, limit=None):
    '''Boxes where sampled heights of g straddle the plane'''
    if samples_per_box < 8:
        raise ValueError('Need at least 8 samples per box')
    _check_size(paving, limit)
    per_axis = max(2, int(round(samples_per_box ** (1.0 / 3.0))))
    weights = trilinear_weights(per_axis)
    boxes = list(paving.boxes())
    active = set()
    for chunk in _chunks(boxes, max(1, BOX_CHUNK // per_axis)):
        points = np.einsum('sc,mcd->msd', weights, paving.corners_of(chunk))
        z = evaluate(bb_map, points)[..., 2]
        straddles = (z.min(axis=1) <= plane.z0) & (plane.z0 <= z.max(axis=1))
        active.update(box for box, hit in zip(chunk, straddles) if hit)
    return ActiveSet(frozenset(active), 'dense-sample')


def traversal_active(bb_map, paving, plane, mode=None):
    activations, _ = traverse(bb_map, plane, paving, mode)
    return ActiveSet(frozenset(activation.box for activation in activations), 'traversal')


def connected_components(active, paving):
    '''Components under the neighbor relation, ordered by smallest member'''
    boxes = active.boxes if isinstance(active, ActiveSet) else frozenset(active)
    source = active.source if isinstance(active, ActiveSet) else 'inflated-test'
    seen = set()
    components = []
    for seed in sorted(boxes):
        if seed in seen:
            continue
        seen.add(seed)
        members = {seed}
        queue = deque([seed])
        while queue:
            box = queue.popleft()
            for neighbor in paving.neighbors(box):
                if neighbor in boxes and neighbor not in seen:
                    seen.add(neighbor)
                    members.add(neighbor)
                    queue.append(neighbor)
        components.append(ActiveSet(frozenset(members), source))
    return components


def seeded_union(components, seeds):
    '''Union of the components holding at least one seed box'''
    seeds = set(seeds)
    boxes = set()
    for component in components:
        if component.boxes & seeds:
            boxes |= component.boxes
    return frozenset(boxes)


def edge_touching_boxes(paving, per_box=4):
    '''Boxes whose region meets an edge of the tetrahedron along a segment'''
    vertices = np.eye(4)
    touching = set()
    t = (np.arange(paving.n * per_box) + 0.5) / (paving.n * per_box)
    for a, b in product(range(4), repeat=2):
        if a < b:
            for point in (1.0 - t)[:, None] * vertices[a] + t[:, None] * vertices[b]:
                touching.add(paving.locate_box(point))
    return touching


def vertex_interpolant(bb_map, u):
    '''The affine map through the images of the four domain vertices'''
    vertices = np.array([bb_map.coefficient((3, 0, 0, 0)), bb_map.coefficient((0, 3, 0, 0)),
                         bb_map.coefficient((0, 0, 3, 0)), bb_map.coefficient((0, 0, 0, 3))])
    return np.asarray(u, dtype=float) @ vertices


def linear_deviation(bb_map, samples=10000):
    '''Per-axis sup of |g - l| over deterministic sample points'''
    u = jacobian_samples(samples)
    return np.abs(evaluate(bb_map, u) - vertex_interpolant(bb_map, u)).max(axis=0)


def box_deviation(bb_map, paving, boxes, per_axis=5):
    '''Per-axis sup over the given boxes of |g - trilinear interpolant of the mapped corners|'''
    weights = trilinear_weights(per_axis)
    worst = np.zeros(3)
    for chunk in _chunks(list(boxes)):
        corners = paving.corners_of(chunk)
        mapped = evaluate(bb_map, corners)
        points = np.einsum('sc,mcd->msd', weights, corners)
        interpolant = np.einsum('sc,mcd->msd', weights, mapped)
        deviation = np.abs(evaluate(bb_map, points) - interpolant)
        worst = np.maximum(worst, deviation.reshape(-1, 3).max(axis=0))
    return worst


def buckets_by_scan(maps, planes):
    '''Bucket index per map id by scanning planes from the bottom'''
    result = {}
    for bb_map in maps:
        z_min = bb_map.z_range[0]
        index = 0
        while index < len(planes.z) and planes.z[index] < z_min:
            index += 1
        result[bb_map.id] = index
    return result
