'''Property checks behind the verify command.

Each check returns a CheckResult with pass counts so the command can print
one line per property. Sizes are arguments so tests can run cheap versions.
'''
import logging
from dataclasses import dataclass
from functools import lru_cache
from time import perf_counter

import numpy as np

from meshes.bbform import embed_face_point, face_patch
from meshes.demo import bump_map, demo_stack, identity_map, random_valid_map
from microstructure.tiles import TileBuilder
from .cuboid import SlicePlane
from .exports import ActivationLog
from .oracle import (
    box_deviation, brute_force_active, buckets_by_scan, dense_sample_active, linear_deviation,
    traversal_active,
)
from .paving import Paving, total_boxes
from .sweep import PlaneStack, build_tetrahedron_list, sweep
from .traversal import face_may_have_loop, traverse

logger = logging.getLogger(__name__)

KNOWN_BOX_TOTALS = {
    4: 20, 8: 120, 16: 816, 32: 5984, 64: 45760, 128: 357760, 256: 2829056, 512: 22500864,
}


@dataclass
class CheckResult:
    name: str
    passed: int
    total: int
    detail: str = ''

    @property
    def ok(self):
        return self.passed == self.total

    def __str__(self):
        verdict = 'PASS' if self.ok else 'FAIL'
        line = f'{verdict} {self.name}: {self.passed}/{self.total}'
        return f'{line} ({self.detail})' if self.detail else line


def check_combinatorics():
    good = sum(total_boxes(n) == expected for n, expected in KNOWN_BOX_TOTALS.items())
    return CheckResult('box counts', good, len(KNOWN_BOX_TOTALS))


@lru_cache(maxsize=8)
def _identity_runs(nus, z0=0.5):
    bb_map = identity_map()
    plane = SlicePlane(z0)
    runs = []
    for nu in nus:
        paving = Paving.at_resolution(nu)
        started = perf_counter()
        activations, state = traverse(bb_map, plane, paving)
        runs.append((paving, len(activations), state.tests, perf_counter() - started))
    return tuple(runs)


def check_active_fraction(nus=(5, 6, 7, 8), low=0.40, high=0.65):
    '''Identity map, z0 = 0.5: the active fraction roughly halves per doubling'''
    runs = _identity_runs(nus)
    ratios = [count / paving.total for paving, count, _, _ in runs]
    steps = [b / a for a, b in zip(ratios, ratios[1:])]
    good = sum(low <= step <= high for step in steps)
    detail = ', '.join(f'{step:.3f}' for step in steps)
    return CheckResult('active fraction scaling', good, len(steps), detail)


def check_work_bound(nus=(5, 6, 7, 8), limit=5.0, time_limit=60.0):
    '''Cuboid tests grow like n^2 and every traversal finishes within time_limit'''
    runs = _identity_runs(nus)
    growth = [b[2] / a[2] for a, b in zip(runs, runs[1:])]
    good = sum(step <= limit for step in growth)
    good += sum(seconds <= time_limit for _, _, _, seconds in runs)
    detail = 'growth ' + ', '.join(f'{step:.2f}' for step in growth)
    detail += f'; slowest {max(seconds for *_, seconds in runs):.2f}s at n={runs[-1][0].n}'
    return CheckResult('work bound', good, len(growth) + len(runs), detail)


def random_trials(seed, count, nus=(2, 3, 4, 5), amplitude=0.15):
    '''(map, paving, plane) triples with z0 drawn from the control range'''
    rng = np.random.default_rng(seed)
    trials = []
    for trial in range(count):
        bb_map = random_valid_map(rng, amplitude, map_id=trial)
        z_min, z_max = bb_map.z_range
        for nu in nus:
            trials.append((bb_map, Paving.at_resolution(nu), SlicePlane(float(rng.uniform(z_min, z_max)))))
    return trials


def check_oracle_equivalence(trials, modes=('always-scan', 'sound')):
    good = 0
    total = 0
    for bb_map, paving, plane in trials:
        reference = brute_force_active(bb_map, paving, plane)
        for mode in modes:
            total += 1
            found = traversal_active(bb_map, paving, plane, mode)
            if found.boxes == reference.boxes:
                good += 1
            else:
                logger.warning(
                    '%s at n=%d, %s, %s: traversal %d boxes, brute force %d',
                    bb_map, paving.n, plane, mode, len(found), len(reference),
                )
    return CheckResult('oracle equivalence', good, total, ', '.join(modes))


def check_conservativeness(trials, samples_per_box=64):
    good = 0
    for bb_map, paving, plane in trials:
        sampled = dense_sample_active(bb_map, paving, plane, samples_per_box)
        found = traversal_active(bb_map, paving, plane, 'sound')
        if sampled.boxes <= found.boxes:
            good += 1
        else:
            logger.warning('%s at n=%d, %s: %d sampled boxes missed',
                           bb_map, paving.n, plane, len(sampled.boxes - found.boxes))
    return CheckResult('conservativeness', good, len(trials))


def check_bound_dominance(seed, count, nu=3, samples=10000, amplitude=0.15):
    '''Global and per-box deviation never exceed the offsets'''
    rng = np.random.default_rng(seed)
    paving = Paving.at_resolution(nu)
    boxes = list(paving.boxes())
    good = 0
    worst = 0.0
    for trial in range(count):
        bb_map = random_valid_map(rng, amplitude, map_id=trial)
        mu = bb_map.offset.mu
        scaled = mu / 4 ** nu
        whole = linear_deviation(bb_map, samples)
        local = box_deviation(bb_map, paving, boxes)
        if np.all(whole <= mu + 1e-12) and np.all(local <= scaled + 1e-12):
            good += 1
        with np.errstate(divide='ignore', invalid='ignore'):
            worst = max(worst, float(np.nanmax(np.where(mu > 0, whole / mu, 0.0))))
    return CheckResult('bound dominance', good, count, f'largest global deviation/mu {worst:.3f}')


def check_closed_loop(height=0.3, nu=4, z0=-0.05, per_axis=41):
    '''The bump map meets z0 only in a loop inside face 3'''
    bb_map = bump_map(height)
    paving = Paving.at_resolution(nu)
    plane = SlicePlane(z0)

    # Boxes of face 3 where sampled face heights straddle the plane
    t = np.linspace(0.0, 1.0, per_axis)
    grid = np.array([(a, b) for a in t for b in t if a + b <= 1.0])
    face = np.column_stack([1.0 - grid.sum(axis=1), grid])
    heights = face_patch(bb_map, 3).evaluate(face)[:, 2]
    points = embed_face_point(3, face)
    below = {paving.locate_box(u) for u, z in zip(points, heights) if z <= z0}
    above = {paving.locate_box(u) for u, z in zip(points, heights) if z >= z0}
    expected = below & above

    good = 0
    verdicts = []
    for mode in ('sound', 'always-scan'):
        found = traversal_active(bb_map, paving, plane, mode).boxes
        if expected and expected <= found:
            good += 1
        verdicts.append(f'{mode} {len(found)} boxes')
    by_determinant = traversal_active(bb_map, paving, plane, 'paper-det').boxes
    loop_flag = face_may_have_loop(bb_map, 3, 'paper-det')
    verdicts.append(f'paper-det {len(by_determinant)} boxes (face scan {"on" if loop_flag else "off"})')
    return CheckResult('closed-loop detection', good, 2, '; '.join(verdicts))


def _emissions(log):
    return {
        (index, tile.map_id, tuple(tile.box))
        for index, maps in log.planes.items()
        for tiles in maps.values()
        for tile in tiles
    }


def check_sweep_equivalence(count=20, plane_count=16, nu=3):
    maps = demo_stack(count)
    z_low = min(bb_map.z_range[0] for bb_map in maps)
    z_high = max(bb_map.z_range[1] for bb_map in maps)
    step = (z_high - z_low) / plane_count
    planes = PlaneStack.uniform(z_low + 0.37 * step, step, plane_count)
    paving = Paving.at_resolution(nu)

    log = ActivationLog()
    stats = sweep(maps, planes, paving, log)
    swept = _emissions(log)

    expected = set()
    for plane in planes.planes():
        for bb_map in maps:
            z_min, z_max = bb_map.z_range
            if z_min <= plane.z0 <= z_max:
                activations, _ = traverse(bb_map, plane, paving)
                expected.update((plane.index, bb_map.id, tuple(a.box)) for a in activations)

    buckets = build_tetrahedron_list(maps, planes)
    scanned = buckets_by_scan(maps, planes)
    bucket_ok = all(buckets.bucket_of(map_id) == index for map_id, index in scanned.items())

    good = int(swept == expected and not stats.partial) + int(bucket_ok)
    return CheckResult('sweep equivalence', good, 2, f'{len(swept)} emissions, {len(planes)} planes')


def check_determinism(count=20, plane_count=16, nu=3, repeats=3):
    maps = demo_stack(count)
    planes = PlaneStack.uniform(0.05, (0.4 * count + 1.0) / plane_count, plane_count)
    paving = Paving.at_resolution(nu)
    dumps = []
    for _ in range(repeats):
        log = ActivationLog()
        log.set_planes(planes.planes())
        sweep(maps, planes, paving, log, tiles=TileBuilder(paving))
        dumps.append(log.dumps())
    good = sum(dump == dumps[0] for dump in dumps)
    return CheckResult('deterministic logs', good, repeats)


def check_microstructure_slope(nus=(4, 5, 6, 7), limit=2.5, z0=0.5):
    '''Sample evaluations over one slice grow slower than n^2.5'''
    bb_map = identity_map()
    sizes = []
    counts = []
    for nu in nus:
        paving = Paving.at_resolution(nu)
        builder = TileBuilder(paving)
        planes = PlaneStack((z0,))
        sweep([bb_map], planes, paving, lambda tile: None, tiles=builder)
        sizes.append(paving.n)
        counts.append(builder.samples_evaluated)
    slope = float(np.polyfit(np.log(sizes), np.log(counts), 1)[0])
    return CheckResult('microstructure trade-off', int(slope < limit), 1, f'log-log slope {slope:.2f}')


def run_all(trials=50, seed=2024, max_nu=8, dominance_maps=100):
    '''Every acceptance property at full size; yields results as they finish'''
    scaling = tuple(range(5, max_nu + 1))
    yield check_combinatorics()
    yield check_active_fraction(scaling)
    sample = random_trials(seed, trials)
    yield check_oracle_equivalence(sample)
    yield check_conservativeness(sample)
    yield check_bound_dominance(seed + 1, dominance_maps)
    yield check_work_bound(scaling)
    yield check_closed_loop()
    yield check_sweep_equivalence()
    yield check_determinism()
    yield check_microstructure_slope()
