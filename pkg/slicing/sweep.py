'''Multi-map, multi-plane driver.

Maps are bucketed by the lowest z of their control points; the sweep adds
each bucket when its plane is reached, drops maps lying wholly below the
plane and traverses the rest, lowest map id first.
'''
import logging
import math
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from time import perf_counter

from django.conf import settings

from microstructure.tiles import SliceTile
from .cuboid import SlicePlane
from .traversal import initialize

logger = logging.getLogger(__name__)


class SweepAborted(Exception):
    '''The sink refused a tile; output written so far is partial'''


@dataclass(frozen=True)
class PlaneStack:
    '''Strictly increasing plane heights; `step` is set for uniform stacks'''
    z: tuple
    step: float = None

    def __post_init__(self):
        z = tuple(float(value) for value in self.z)
        if any(not math.isfinite(value) for value in z):
            raise ValueError('Plane heights must be finite')
        if any(b <= a for a, b in zip(z, z[1:])):
            raise ValueError('Plane heights must be strictly increasing')
        if self.step is not None and self.step <= 0:
            raise ValueError('Plane step must be positive')
        object.__setattr__(self, 'z', z)

    @classmethod
    def uniform(cls, start, step, count):
        if count < 0:
            raise ValueError('Plane count must be non-negative')
        return cls(tuple(start + index * step for index in range(count)), step=step)

    def __len__(self):
        return len(self.z)

    def planes(self):
        return [SlicePlane(z0, index) for index, z0 in enumerate(self.z)]

    def bucket_index(self, z_min):
        '''Index of the first plane at or above z_min; len(self) when there is none'''
        count = len(self.z)
        if count == 0:
            return 0
        if self.step is None:
            return bisect_left(self.z, z_min)
        guess = min(max(math.ceil((z_min - self.z[0]) / self.step), 0), count)
        while guess > 0 and self.z[guess - 1] >= z_min:
            guess -= 1
        while guess < count and self.z[guess] < z_min:
            guess += 1
        return guess


@dataclass
class MapBuckets:
    '''buckets[i] holds the ids of maps first met by plane i; the last bucket is never met'''
    buckets: list

    def bucket_of(self, map_id):
        for index, bucket in enumerate(self.buckets):
            if map_id in bucket:
                return index
        raise KeyError(map_id)


def build_tetrahedron_list(maps, planes):
    buckets = [[] for _ in range(len(planes) + 1)]
    for bb_map in sorted(maps, key=lambda m: m.id):
        buckets[planes.bucket_index(bb_map.z_range[0])].append(bb_map.id)
    logger.info(
        'Bucketed %d maps over %d planes (%d above the stack)',
        len(maps), len(planes), len(buckets[-1]),
    )
    return MapBuckets(buckets)


@dataclass
class PairSummary:
    '''One traversal: the columns of the per-pair stats table'''
    plane: int
    map_id: int
    n: int
    time_s: float
    boxes_in_intersection: int
    total_boxes: int
    cuboid_tests: int

    @property
    def ratio(self):
        return self.boxes_in_intersection / self.total_boxes


@dataclass
class PlaneSummary:
    index: int
    z: float
    active_maps: int
    activations: int
    cuboid_tests: int
    wall_time: float


@dataclass
class SweepStats:
    n: int
    nu: int
    planes: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    partial: bool = False
    error: str = ''

    @property
    def activations(self):
        return sum(plane.activations for plane in self.planes)

    @property
    def cuboid_tests(self):
        return sum(plane.cuboid_tests for plane in self.planes)

    @property
    def wall_time(self):
        return sum(plane.wall_time for plane in self.planes)


@dataclass
class _PairResult:
    map_id: int
    tiles: list
    tests: int
    time_s: float


def slice_pair(bb_map, plane, paving, mode=None, tiler=None):
    '''Tiles of one map-plane pair in traversal order'''
    started = perf_counter()
    state = initialize(bb_map, plane, paving, mode)
    tiles = []
    for activation in state.activations():
        if tiler is None:
            tiles.append(SliceTile.from_activation(activation))
        else:
            tiles.append(tiler.build(activation, plane))
    return _PairResult(bb_map.id, tiles, state.tests, perf_counter() - started)


def sweep(maps, planes, paving, sink, mode=None, tiles=None, jobs=None):
    '''Slice every map against every plane it can reach; tiles go to `sink` in order.

    A failing sink stops the sweep and the returned stats are marked partial.
    '''
    jobs = settings.SLICER['JOBS'] if jobs is None else jobs
    if jobs < 1:
        raise ValueError('jobs must be at least 1')
    by_id = {bb_map.id: bb_map for bb_map in maps}
    buckets = build_tetrahedron_list(maps, planes)
    stats = SweepStats(paving.n, paving.nu)
    active = {}

    executor = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for plane in planes.planes():
            started = perf_counter()
            for map_id in buckets.buckets[plane.index]:
                active[map_id] = by_id[map_id]
            for map_id in [i for i, bb_map in active.items() if bb_map.z_range[1] < plane.z0]:
                del active[map_id]

            current = [active[map_id] for map_id in sorted(active)]
            work = [(bb_map, plane, paving, mode, tiles.tiler(bb_map) if tiles is not None else None) for bb_map in current]
            if executor is None:
                results = [slice_pair(*args) for args in work]
            else:
                results = list(executor.map(lambda args: slice_pair(*args), work))

            activations = 0
            for result in results:
                stats.pairs.append(PairSummary(
                    plane=plane.index,
                    map_id=result.map_id,
                    n=paving.n,
                    time_s=result.time_s,
                    boxes_in_intersection=len(result.tiles),
                    total_boxes=paving.total,
                    cuboid_tests=result.tests,
                ))
                for tile in result.tiles:
                    try:
                        sink(tile)
                    except Exception as exc:
                        raise SweepAborted(f'Sink failed at {plane}, map {result.map_id}: {exc}') from exc
                    activations += 1

            if tiles is not None:
                tiles.end_plane()
            summary = PlaneSummary(
                index=plane.index,
                z=plane.z0,
                active_maps=len(current),
                activations=activations,
                cuboid_tests=sum(result.tests for result in results),
                wall_time=perf_counter() - started,
            )
            stats.planes.append(summary)
            logger.info(
                'Plane %d (z=%g): %d active maps, %d activations, %d cuboid tests',
                summary.index, summary.z, summary.active_maps, summary.activations, summary.cuboid_tests,
            )
    except SweepAborted as exc:
        logger.error('%s', exc)
        stats.partial = True
        stats.error = str(exc)
    finally:
        if executor is not None:
            executor.shutdown()
    return stats
