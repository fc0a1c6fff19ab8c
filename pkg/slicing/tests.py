import csv
import io
import json
import os
import re
import tempfile

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from django.urls import reverse
from openpyxl import load_workbook

from meshes.bounds import Tolerance
from meshes.demo import affine_map, bump_map, identity_map, two_component_map
from meshes.loader import dump_mesh, write_mesh
from meshes.models import Mesh
from microstructure.tiles import TileBuilder
from utils.excel_generator import SliceStatsExcel
from utils.pdf_generator import SliceRunPDF
from utils.svg_generator import SliceSVG
from .acceptance import (
    check_active_fraction, check_bound_dominance, check_closed_loop, check_combinatorics,
    check_conservativeness, check_determinism, check_microstructure_slope, check_oracle_equivalence,
    check_sweep_equivalence, check_work_bound, random_trials,
)
from .cuboid import Cuboid, SlicePlane, edge_crossings, intersection_center, intersection_polygon, intersects_plane, map_box
from .exports import STATS_COLUMNS, ActivationLog, parse_planes, write_stats
from .forms import SliceRunForm
from .models import PlaneStat, SliceRun
from .oracle import (
    brute_force_active, connected_components, dense_sample_active, edge_touching_boxes, seeded_union,
    traversal_active,
)
from .paving import BoxId, Paving, total_boxes
from .runner import SliceJob
from .sweep import PlaneStack, SweepAborted, build_tetrahedron_list, sweep
from .traversal import TraversalState, face_may_have_loop, initialize, traverse

DEMO_MESH = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'meshes', 'data', 'demo_mesh.json')


def polygon_area(points):
    x, y = np.asarray(points, dtype=float).T
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


class GraphTraversal(TraversalState):
    '''Traversal over a hand-made adjacency with fixed slice centers'''

    def __init__(self, points, links, seeds):
        super().__init__(identity_map(), SlicePlane(0.5), Paving.at_resolution(3), mode='always-scan')
        self.points = {box: np.array(point) for box, point in points.items()}
        self.graph = {box: [] for box in points}
        for a, b in links:
            self.graph[a].append(b)
            self.graph[b].append(a)
        self.seeds = list(seeds)
        self.initialize()

    def find_boundary_boxes(self):
        return list(self.seeds)

    def intersecting_neighbors(self, box):
        return list(self.graph[box])

    def center(self, box):
        return self.points[box]


def walk(state):
    '''Boxes in the order the iterator lands on them'''
    order = []
    while state.is_valid:
        order.append(state.curr)
        state.increment()
    return order


class PavingTests(SimpleTestCase):
    def test_total_boxes(self):
        self.assertEqual([total_boxes(n) for n in (1, 2, 4, 8, 16)], [1, 4, 20, 120, 816])
        self.assertEqual(len(list(Paving.at_resolution(3).boxes())), 120)
        with self.assertRaises(ValueError):
            total_boxes(0)

    def test_resolution_must_be_power_of_two(self):
        with self.assertRaises(ValueError):
            Paving(3, 1)
        with self.assertRaises(ValueError):
            Paving.at_resolution(-1)

    def test_valid_boxes(self):
        paving = Paving.at_resolution(2)
        self.assertTrue(paving.is_valid_box((0, 0, 3)))
        self.assertFalse(paving.is_valid_box((1, 1, 2)))
        self.assertFalse(paving.is_valid_box((-1, 0, 0)))
        with self.assertRaises(ValueError):
            paving.box_corners((4, 0, 0))

    def test_box_id_text(self):
        self.assertEqual(str(BoxId(1, 2, 3)), '1,2,3')
        self.assertEqual(BoxId.parse('1,2,3'), (1, 2, 3))

    def test_single_box_is_clamped_to_the_tetrahedron(self):
        corners = Paving.at_resolution(0).box_corners((0, 0, 0))
        np.testing.assert_allclose(corners[0], [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(corners[1], [0.0, 0.0, 0.0, 1.0])
        np.testing.assert_allclose(corners[3], [0.0, 0.0, 0.5, 0.5])
        np.testing.assert_allclose(corners[7], [0.0, 1 / 3, 1 / 3, 1 / 3], atol=1e-15)

    def test_clamping_at_two(self):
        corners = Paving.at_resolution(1).box_corners((0, 0, 0))
        np.testing.assert_allclose(corners[6], [0.0, 0.5, 0.5, 0.0])
        np.testing.assert_allclose(corners[7], [0.0, 1 / 3, 1 / 3, 1 / 3], atol=1e-15)

    def test_interior_box_is_not_clamped(self):
        corners = Paving.at_resolution(2).box_corners((0, 0, 0))
        np.testing.assert_allclose(corners[7], [0.25, 0.25, 0.25, 0.25])
        np.testing.assert_allclose(corners.sum(axis=1), 1.0)

    def test_neighbors(self):
        self.assertEqual(len(Paving.at_resolution(3).neighbors((2, 2, 2))), 12)
        self.assertEqual(sorted(Paving.at_resolution(3).neighbors((0, 0, 0))), [(0, 0, 1), (0, 1, 0), (1, 0, 0)])
        self.assertEqual(len(Paving.at_resolution(2).neighbors((1, 1, 1))), 9)

    def test_neighbor_relation_is_symmetric(self):
        paving = Paving.at_resolution(2)
        for box in paving.boxes():
            for neighbor in paving.neighbors(box):
                self.assertIn(box, paving.neighbors(neighbor))

    def test_edge_boxes(self):
        self.assertEqual(Paving.at_resolution(0).edge_boxes(), [(0, 0, 0)])
        self.assertEqual(set(Paving.at_resolution(1).edge_boxes()), set(Paving.at_resolution(1).boxes()))
        self.assertEqual(len(Paving.at_resolution(1).edge_boxes()), 4)
        edge = Paving.at_resolution(2).edge_boxes()
        self.assertEqual(len(edge), 16)
        self.assertEqual(len(set(edge)), 16)

    def test_face_boxes(self):
        paving = Paving.at_resolution(2)
        for face in range(4):
            boxes = paving.face_boxes(face)
            self.assertEqual(len(boxes), 10)
            self.assertTrue(all(paving.is_valid_box(box) for box in boxes))
        self.assertTrue(all(box.col == 0 for box in paving.face_boxes(3)))
        self.assertTrue(all(sum(box) == 3 for box in paving.face_boxes(0)))
        with self.assertRaises(ValueError):
            paving.face_boxes(4)

    def test_edge_boxes_touch_the_tetrahedron_edges(self):
        for nu in range(4):
            paving = Paving.at_resolution(nu)
            self.assertEqual(set(paving.edge_boxes()), edge_touching_boxes(paving), paving)

    def test_edge_boxes_lie_on_faces(self):
        for nu in range(4):
            paving = Paving.at_resolution(nu)
            on_faces = set().union(*(paving.face_boxes(face) for face in range(4)))
            self.assertLessEqual(set(paving.edge_boxes()), on_faces)

    def test_boxes_cover_the_domain_without_overlap(self):
        rng = np.random.default_rng(61)
        for nu in range(4):
            paving = Paving.at_resolution(nu)
            boxes = list(paving.boxes())
            for u in rng.dirichlet(np.ones(4), size=150):
                holding = [box for box in boxes if paving.contains(box, u)]
                self.assertIn(paving.locate_box(u), holding)
                self.assertLessEqual(sum(paving.contains(box, u, strict=True) for box in holding), 1)

    def test_locate_box(self):
        paving = Paving.at_resolution(2)
        self.assertEqual(paving.locate_box([0.25] * 4), (1, 1, 1))
        self.assertEqual(paving.locate_box([0.0, 1.0, 0.0, 0.0]), (3, 0, 0))
        self.assertTrue(paving.contains((1, 1, 1), [0.25] * 4))
        self.assertFalse(paving.contains((0, 0, 0), [0.25] * 4, strict=True))


class CuboidTests(SimpleTestCase):
    def setUp(self):
        self.paving = Paving.at_resolution(2)
        self.corners = self.paving.box_corners((0, 0, 0))

    def test_plane_test(self):
        cuboid = map_box(identity_map(), self.corners)
        np.testing.assert_allclose(cuboid.z_span, (0.0, 0.25), atol=1e-15)
        self.assertTrue(intersects_plane(cuboid, SlicePlane(0.1)))
        self.assertFalse(intersects_plane(cuboid, SlicePlane(0.3)))

    def test_tolerance_inflates_the_test(self):
        tol = Tolerance(np.array([0.0, 0.0, 0.06]), 2, np.zeros(3))
        cuboid = map_box(identity_map(), self.corners, tol)
        self.assertAlmostEqual(cuboid.band, 0.06)
        self.assertTrue(intersects_plane(cuboid, SlicePlane(0.3)))
        self.assertFalse(intersects_plane(cuboid, SlicePlane(0.32)))

    def test_crossings_and_center(self):
        cuboid = map_box(identity_map(), self.corners)
        plane = SlicePlane(0.125)
        crossings = edge_crossings(cuboid, plane)
        self.assertEqual(len(crossings), 4)
        np.testing.assert_allclose(intersection_center(cuboid, plane), [0.125, 0.125])
        polygon = intersection_polygon(cuboid, plane)
        self.assertAlmostEqual(polygon_area(polygon), 0.0625)

    def test_face_in_the_plane(self):
        cuboid = map_box(identity_map(), self.corners)
        polygon = intersection_polygon(cuboid, SlicePlane(0.0))
        self.assertEqual(len(polygon), 4)
        self.assertAlmostEqual(polygon_area(polygon), 0.0625)

    def test_center_of_missed_cuboid(self):
        with self.assertRaises(ValueError):
            intersection_center(Cuboid(map_box(identity_map(), self.corners).verts), SlicePlane(0.5))


class TraversalTests(SimpleTestCase):
    def test_identity_matches_brute_force(self):
        paving = Paving.at_resolution(2)
        plane = SlicePlane(0.5)
        activations, state = traverse(identity_map(), plane, paving)
        boxes = [activation.box for activation in activations]
        self.assertEqual(len(boxes), len(set(boxes)))
        self.assertEqual(set(boxes), brute_force_active(identity_map(), paving, plane).boxes)
        self.assertEqual([activation.order for activation in activations], list(range(len(activations))))
        self.assertIsNone(activations[0].parent)
        self.assertFalse(state.is_valid)

    def test_parents_are_neighbors(self):
        paving = Paving.at_resolution(3)
        activations, _ = traverse(two_component_map(), SlicePlane(0.1), paving)
        for activation in activations:
            if activation.parent is not None:
                self.assertIn(activation.box, paving.neighbors(activation.parent))

    def test_exhausted_traversal(self):
        state = initialize(identity_map(), SlicePlane(2.0), Paving.at_resolution(2))
        self.assertFalse(state.is_valid)
        self.assertEqual(list(state.activations()), [])
        with self.assertRaises(RuntimeError):
            state.increment()

    def test_unknown_loop_mode(self):
        with self.assertRaises(ValueError):
            TraversalState(identity_map(), SlicePlane(0.5), Paving.at_resolution(1), mode='guess')

    def test_two_components(self):
        paving = Paving.at_resolution(3)
        plane = SlicePlane(0.1)
        reference = brute_force_active(two_component_map(), paving, plane)
        self.assertEqual(len(connected_components(reference, paving)), 2)
        for mode in ('sound', 'paper-det', 'always-scan'):
            self.assertEqual(traversal_active(two_component_map(), paving, plane, mode).boxes, reference.boxes)

    def test_closed_loop_inside_a_face(self):
        bb_map = bump_map(0.3)
        paving = Paving.at_resolution(4)
        plane = SlicePlane(-0.05)
        self.assertTrue(face_may_have_loop(bb_map, 3, 'sound'))
        self.assertFalse(face_may_have_loop(bb_map, 3, 'paper-det'))

        reference = brute_force_active(bb_map, paving, plane)
        sound = traversal_active(bb_map, paving, plane, 'sound')
        by_determinant = traversal_active(bb_map, paving, plane, 'paper-det')
        self.assertTrue(sound.boxes)
        self.assertEqual(sound.boxes, reference.boxes)
        self.assertLess(len(by_determinant), len(sound))

    def test_affine_faces_never_need_a_scan(self):
        bb_map = affine_map([[1.0, 0.2, 0.1], [0.1, 1.0, 0.3], [0.2, 0.1, 1.0]])
        for face in range(4):
            self.assertFalse(face_may_have_loop(bb_map, face, 'paper-det'))
        self.assertTrue(face_may_have_loop(bb_map, 0, 'always-scan'))

    def test_counterclockwise_order(self):
        # z0 = 0.05 at n = 8 activates exactly the bottom layer of boxes
        state = initialize(identity_map(), SlicePlane(0.05), Paving.at_resolution(3))
        star = [BoxId(3, 2, 0), BoxId(2, 3, 0), BoxId(1, 3, 0), BoxId(1, 2, 0), BoxId(2, 1, 0), BoxId(3, 1, 0)]
        state.curr = BoxId(2, 2, 0)
        state.prev = None
        self.assertEqual(sorted(state.intersecting_neighbors(state.curr)), sorted(star))
        self.assertEqual(state.sort_ccw(list(reversed(star[1:]))), star[1:])

        state.prev = BoxId(1, 2, 0)
        others = [box for box in star if box != state.prev]
        self.assertEqual(
            state.sort_ccw(others),
            [BoxId(2, 1, 0), BoxId(3, 1, 0), BoxId(3, 2, 0), BoxId(2, 3, 0), BoxId(1, 3, 0)],
        )

    def test_reaches_the_components_of_its_seeds(self):
        paving = Paving.at_resolution(3)
        plane = SlicePlane(0.1)
        reference = brute_force_active(two_component_map(), paving, plane)
        components = connected_components(reference, paving)
        seeds = TraversalState(two_component_map(), plane, paving, 'sound').find_boundary_boxes()
        self.assertEqual(len(components), 2)
        self.assertLessEqual(set(seeds), reference.boxes)
        found = traversal_active(two_component_map(), paving, plane, 'sound')
        self.assertEqual(found.boxes, seeded_union(components, seeds))
        first = next(component for component in components if seeds[0] in component)
        self.assertEqual(seeded_union(components, seeds[:1]), first.boxes)
        self.assertEqual(seeded_union(components, []), frozenset())

    def test_random_maps_match_seeded_components(self):
        for bb_map, paving, plane in random_trials(67, 4, nus=(2, 3)):
            seeds = TraversalState(bb_map, plane, paving, 'always-scan').find_boundary_boxes()
            reference = brute_force_active(bb_map, paving, plane)
            expected = seeded_union(connected_components(reference, paving), seeds)
            self.assertEqual(traversal_active(bb_map, paving, plane, 'always-scan').boxes, expected)

    def test_work_is_bounded_by_the_emitted_boxes(self):
        trials = random_trials(71, 6, nus=(2, 3, 4))
        trials.append((two_component_map(), Paving.at_resolution(3), SlicePlane(0.1)))
        for bb_map, paving, plane in trials:
            for mode in ('sound', 'always-scan'):
                _, state = traverse(bb_map, plane, paving, mode)
                self.assertLessEqual(state.tests, 12 * state.emitted + state.scanned)

    def test_parents_form_a_forest(self):
        for bb_map, paving, plane in random_trials(73, 4, nus=(3, 4)):
            activations, _ = traverse(bb_map, plane, paving)
            order = {activation.box: activation.order for activation in activations}
            for activation in activations:
                if activation.parent is not None:
                    self.assertLess(order[activation.parent], activation.order)

    def test_chain_walks_back_to_the_seed_then_restarts(self):
        chain = [BoxId(t, 0, 0) for t in range(5)]
        lone = BoxId(0, 5, 0)
        state = GraphTraversal(
            {box: (float(t), 0.0) for t, box in enumerate(chain)} | {lone: (0.0, 9.0)},
            list(zip(chain, chain[1:])),
            seeds=[chain[0], lone],
        )
        self.assertEqual(walk(state), chain + [lone])
        self.assertEqual(state.parents[chain[4]], chain[3])
        self.assertIsNone(state.parents[lone])
        self.assertFalse(state.is_valid)

    def test_chain_seeded_in_the_middle(self):
        chain = [BoxId(t, 0, 0) for t in range(5)]
        state = GraphTraversal(
            {box: (float(t), 0.0) for t, box in enumerate(chain)},
            list(zip(chain, chain[1:])),
            seeds=[chain[2]],
        )
        self.assertEqual(walk(state), [chain[2], chain[3], chain[4], chain[1], chain[0]])
        self.assertEqual(state.parents[chain[1]], chain[2])

    def test_walk_back_resumes_at_an_unvisited_branch(self):
        root, a, c, d, e = BoxId(0, 0, 0), BoxId(1, 0, 0), BoxId(2, 0, 0), BoxId(3, 0, 0), BoxId(1, 1, 0)
        state = GraphTraversal(
            {root: (0.0, 0.0), a: (1.0, 0.0), c: (2.0, 0.0), d: (3.0, 0.0), e: (1.0, 1.0)},
            [(root, a), (a, c), (c, d), (a, e)],
            seeds=[root],
        )
        self.assertEqual(walk(state), [root, a, c, d, e])
        self.assertEqual(state.parents[e], a)

    def test_repeatable(self):
        paving = Paving.at_resolution(3)
        first, _ = traverse(two_component_map(), SlicePlane(0.1), paving)
        second, _ = traverse(two_component_map(), SlicePlane(0.1), paving)
        self.assertEqual([a.box for a in first], [a.box for a in second])


class PlaneStackTests(SimpleTestCase):
    def test_bucket_rule(self):
        planes = PlaneStack((0.0, 0.5, 1.0))
        maps = [identity_map(0).translated((0.0, 0.0, 0.3)), identity_map(1).translated((0.0, 0.0, 5.0)), identity_map(2)]
        buckets = build_tetrahedron_list(maps, planes)
        self.assertEqual(buckets.bucket_of(0), 1)
        self.assertEqual(buckets.bucket_of(1), 3)
        self.assertEqual(buckets.bucket_of(2), 0)
        self.assertEqual(len(buckets.buckets), 4)
        with self.assertRaises(KeyError):
            buckets.bucket_of(9)

    def test_uniform_fast_path_matches_search(self):
        uniform = PlaneStack.uniform(0.1, 0.25, 9)
        listed = PlaneStack(uniform.z)
        for z in list(uniform.z) + list(np.linspace(-1.0, 3.5, 91)):
            self.assertEqual(uniform.bucket_index(z), listed.bucket_index(z))

    def test_validation(self):
        with self.assertRaises(ValueError):
            PlaneStack((0.5, 0.5))
        with self.assertRaises(ValueError):
            PlaneStack((0.0, float('nan')))
        with self.assertRaises(ValueError):
            PlaneStack.uniform(0.0, 0.1, -1)
        with self.assertRaises(ValueError):
            PlaneStack.uniform(0.0, 0.0, 3)
        self.assertEqual(len(PlaneStack.uniform(0.0, 0.1, 0)), 0)


class SweepTests(SimpleTestCase):
    def setUp(self):
        self.paving = Paving.at_resolution(2)

    def test_empty_stack(self):
        log = ActivationLog()
        stats = sweep([identity_map()], PlaneStack(()), self.paving, log)
        self.assertEqual(stats.planes, [])
        self.assertEqual(stats.activations, 0)
        self.assertFalse(stats.partial)

    def test_stacked_maps(self):
        maps = [identity_map(0), identity_map(1).translated((0.0, 0.0, 1.0))]
        log = ActivationLog()
        stats = sweep(maps, PlaneStack((0.5, 1.5, 2.5)), self.paving, log)
        self.assertEqual([plane.active_maps for plane in stats.planes], [1, 1, 0])
        expected, _ = traverse(identity_map(), SlicePlane(0.5), self.paving)
        self.assertEqual(stats.planes[0].activations, len(expected))
        self.assertEqual(set(log.planes[0]), {0})
        self.assertEqual(set(log.planes[1]), {1})
        self.assertEqual(log.count(2), 0)
        self.assertEqual(stats.activations, sum(log.count(index) for index in range(3)))

    def test_maps_arrive_by_id(self):
        maps = [identity_map(3), identity_map(1), identity_map(2)]
        seen = []
        sweep(maps, PlaneStack((0.5,)), self.paving, lambda tile: seen.append(tile.map_id))
        self.assertEqual(seen, sorted(seen))
        self.assertEqual(set(seen), {1, 2, 3})

    def test_threads_give_the_same_log(self):
        maps = [identity_map(i).translated((0.0, 0.0, 0.3 * i)) for i in range(4)]
        planes = PlaneStack.uniform(0.2, 0.3, 5)
        dumps = []
        for jobs in (1, 3):
            log = ActivationLog()
            log.set_planes(planes.planes())
            sweep(maps, planes, self.paving, log, tiles=TileBuilder(self.paving), jobs=jobs)
            dumps.append(log.dumps())
        self.assertEqual(dumps[0], dumps[1])

    def test_failing_sink(self):
        def sink(tile):
            raise OSError('disk full')

        stats = sweep([identity_map()], PlaneStack((0.25, 0.5)), self.paving, sink)
        self.assertTrue(stats.partial)
        self.assertIn('disk full', stats.error)
        self.assertEqual(stats.planes, [])

    def test_jobs_must_be_positive(self):
        with self.assertRaises(ValueError):
            sweep([identity_map()], PlaneStack((0.5,)), self.paving, ActivationLog(), jobs=0)

    def test_sweep_aborted_is_an_exception(self):
        self.assertTrue(issubclass(SweepAborted, Exception))


class OracleTests(SimpleTestCase):
    def test_size_cap(self):
        with self.assertRaises(ValueError):
            brute_force_active(identity_map(), Paving.at_resolution(3), SlicePlane(0.5), limit=4)

    def test_samples_inside_inflated_test(self):
        paving = Paving.at_resolution(2)
        plane = SlicePlane(0.4)
        sampled = dense_sample_active(identity_map(), paving, plane)
        self.assertTrue(sampled.boxes)
        self.assertLessEqual(sampled.boxes, brute_force_active(identity_map(), paving, plane).boxes)
        with self.assertRaises(ValueError):
            dense_sample_active(identity_map(), paving, plane, samples_per_box=4)

    def test_single_component(self):
        paving = Paving.at_resolution(2)
        active = brute_force_active(identity_map(), paving, SlicePlane(0.5))
        self.assertEqual(len(connected_components(active, paving)), 1)


class ExportTests(SimpleTestCase):
    def test_parse_planes(self):
        self.assertEqual(parse_planes('0.1, 0.2\n# heights\n0.3  # last\n'), [0.1, 0.2, 0.3])
        with self.assertRaises(ValueError) as ctx:
            parse_planes('0.1\nabc')
        self.assertIn('Line 2', str(ctx.exception))

    def test_log_rejects_duplicates(self):
        paving = Paving.at_resolution(1)
        activations, _ = traverse(identity_map(), SlicePlane(0.5), paving)
        log = ActivationLog()
        tile = TileBuilder(paving).tiler(identity_map()).build(activations[0], SlicePlane(0.5))
        log(tile)
        with self.assertRaises(ValueError):
            log(tile)

    def test_log_lists_empty_planes(self):
        log = ActivationLog()
        planes = PlaneStack((0.5, 5.0))
        log.set_planes(planes.planes())
        sweep([identity_map()], planes, Paving.at_resolution(1), log)
        document = json.loads(log.dumps())
        self.assertEqual(document['version'], 1)
        self.assertEqual([plane['z'] for plane in document['planes']], [0.5, 5.0])
        self.assertEqual(document['planes'][1]['maps'], [])
        first = document['planes'][0]['maps'][0]['activations'][0]
        self.assertEqual(first['order'], 0)
        self.assertIsNone(first['parent'])
        self.assertEqual(len(first['box'].split(',')), 3)

    def test_stats_table(self):
        paving = Paving.at_resolution(2)
        stats = sweep([identity_map()], PlaneStack((0.5,)), paving, ActivationLog())
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'stats.csv')
            write_stats(stats, path)
            with open(path, newline='') as handle:
                rows = list(csv.reader(handle))
        self.assertEqual(rows[0], STATS_COLUMNS)
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[1][5], '20')
        self.assertEqual(int(rows[1][4]), stats.planes[0].activations)
        self.assertEqual(rows[1][6], f'{stats.planes[0].activations / 20:.4g}')
        self.assertLessEqual(float(rows[1][6]), 1.0)


class ReportTests(SimpleTestCase):
    def setUp(self):
        self.job = SliceJob([identity_map()], PlaneStack.uniform(0.26, 0.25, 3), nu=2)
        self.job.run()

    def test_svg_polygons_cover_the_slice(self):
        tiles = self.job.log.tiles_for(0)
        document = SliceSVG(tiles).render()
        polygons = re.findall(r'points="([^"]*)"', document)
        self.assertEqual(len(polygons), len(tiles))
        area = sum(
            polygon_area([[float(v) for v in pair.split(',')] for pair in points.split()])
            for points in polygons
        )
        self.assertAlmostEqual(area, 0.74 ** 2 / 2, delta=0.05 * 0.74 ** 2 / 2)
        self.assertIn('<g id="microstructure"', document)

    def test_empty_svg(self):
        document = SliceSVG([], 'map').render()
        self.assertIn('viewBox="0 0 1 1"', document)
        self.assertNotIn('<polygon', document)
        with self.assertRaises(ValueError):
            SliceSVG([], 'rainbow')

    def test_write_svgs(self):
        with tempfile.TemporaryDirectory() as directory:
            paths = self.job.write_svgs(directory, 'map')
            self.assertEqual([os.path.basename(path) for path in paths], ['plane_0.svg', 'plane_1.svg', 'plane_2.svg'])
            self.assertTrue(all(os.path.exists(path) for path in paths))

    def test_pdf_and_workbook(self):
        summary = self.job.summary()
        self.assertTrue(summary['Complete'])
        self.assertEqual(summary['Total boxes per map'], 20)

        buffer = io.BytesIO()
        SliceRunPDF('identity', summary, self.job.stats.planes).build().generate(buffer)
        self.assertTrue(buffer.getvalue().startswith(b'%PDF'))

        buffer = io.BytesIO()
        SliceStatsExcel('identity', summary, self.job.stats.planes, self.job.stats.pairs).build().save(buffer)
        buffer.seek(0)
        workbook = load_workbook(buffer)
        self.assertIn('Planes', workbook.sheetnames)
        self.assertIn('Map-Plane Pairs', workbook.sheetnames)


class AcceptanceTests(SimpleTestCase):
    def test_combinatorics(self):
        self.assertTrue(check_combinatorics().ok)

    def test_active_fraction(self):
        result = check_active_fraction((3, 4, 5))
        self.assertEqual(result.total, 2)
        self.assertTrue(result.ok, str(result))

    def test_oracles(self):
        trials = random_trials(7, 2, nus=(2, 3))
        self.assertTrue(check_oracle_equivalence(trials).ok)
        self.assertTrue(check_conservativeness(trials, 27).ok)

    def test_bound_dominance(self):
        result = check_bound_dominance(11, 3, nu=2, samples=2000)
        self.assertTrue(result.ok, str(result))

    def test_bound_dominance_with_either_stencil(self):
        for widened in (False, True):
            with self.settings(SLICER={**settings.SLICER, 'WIDENED_STENCIL': widened}):
                result = check_bound_dominance(2025, 6, nu=3, samples=2000)
            self.assertTrue(result.ok, f'widened={widened}: {result}')

    def test_work_bound(self):
        result = check_work_bound((3, 4, 5))
        self.assertEqual(result.total, 5)
        self.assertTrue(result.ok, str(result))

    def test_microstructure_slope(self):
        result = check_microstructure_slope((3, 4, 5))
        self.assertTrue(result.ok, str(result))

    def test_closed_loop(self):
        result = check_closed_loop()
        self.assertTrue(result.ok, str(result))
        self.assertIn('paper-det', result.detail)

    def test_sweep_equivalence_and_determinism(self):
        self.assertTrue(check_sweep_equivalence(count=6, plane_count=5, nu=2).ok)
        self.assertTrue(check_determinism(count=4, plane_count=4, nu=2, repeats=2).ok)

    def test_result_text(self):
        result = check_combinatorics()
        self.assertTrue(str(result).startswith('PASS box counts: 8/8'))


class SliceRunFormTests(SimpleTestCase):
    def test_uniform_planes(self):
        form = SliceRunForm({'nu': 2, 'z_start': 0.0, 'z_step': 0.5, 'count': 3})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['plane_stack'].z, (0.0, 0.5, 1.0))
        self.assertEqual(form.cleaned_data['loop_mode'], 'sound')

    def test_listed_planes(self):
        form = SliceRunForm({'planes': '0.1 0.4, 0.9'})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['plane_stack'].z, (0.1, 0.4, 0.9))
        self.assertIsNone(form.cleaned_data['plane_stack'].step)

    def test_rejected_planes(self):
        for data in (
            {'planes': '0.1', 'z_start': 0.0},
            {'z_start': 0.0, 'z_step': 0.5},
            {'z_start': 0.0, 'z_step': -0.5, 'count': 2},
            {'planes': '0.5 0.1'},
            {'planes': '0.5 x'},
        ):
            self.assertFalse(SliceRunForm(data).is_valid(), data)


class SliceRunModelTests(TestCase):
    def setUp(self):
        self.mesh = Mesh.import_document('identity', dump_mesh([identity_map()]))

    def test_execute(self):
        run = SliceRun.objects.create(mesh=self.mesh, nu=2, planes=[0.25, 0.5, 0.75], plane_step=0.25)
        job = run.execute()
        run.refresh_from_db()
        self.assertEqual(run.status, 'COMPLETED')
        self.assertEqual(run.plane_stats.count(), 3)
        self.assertEqual(run.total_activations, job.stats.activations)
        self.assertEqual(sum(stat.activations for stat in run.plane_stats.all()), run.total_activations)
        self.assertIsNotNone(run.completed_at)

    def test_plane_tiles(self):
        run = SliceRun.objects.create(mesh=self.mesh, nu=2, planes=[0.25, 0.5])
        job = run.execute()
        tiles = run.plane_tiles(1)
        self.assertTrue(all(tile.plane_index == 1 for tile in tiles))
        self.assertEqual([tile.box for tile in tiles], [tile.box for tile in job.log.tiles_for(1)])


class SliceRunViewTests(TestCase):
    def setUp(self):
        self.mesh = Mesh.import_document('identity', dump_mesh([identity_map()]))
        self.run = SliceRun.objects.create(mesh=self.mesh, nu=1, planes=[0.25, 0.5])
        self.run.execute()

    def test_list(self):
        response = self.client.get(reverse('slicing:run_list'), {'status': 'COMPLETED'})
        self.assertEqual(response.status_code, 200)
        self.assertEqual(len(response.context['page_obj']), 1)

    def test_create(self):
        response = self.client.post(reverse('slicing:run_create'), {'mesh': self.mesh.pk, 'nu': 1, 'planes': '0.5'})
        run = SliceRun.objects.exclude(pk=self.run.pk).get()
        self.assertRedirects(response, reverse('slicing:run_detail', args=[run.pk]))
        self.assertEqual(run.status, 'COMPLETED')
        self.assertEqual(run.plane_stats.count(), 1)

    def test_create_with_conflicting_planes(self):
        response = self.client.post(
            reverse('slicing:run_create'), {'mesh': self.mesh.pk, 'planes': '0.5', 'z_start': 0.0},
        )
        self.assertEqual(response.status_code, 200)
        self.assertEqual(SliceRun.objects.count(), 1)

    def test_detail(self):
        response = self.client.get(reverse('slicing:run_detail', args=[self.run.pk]))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(len(response.context['plane_stats']), 2)

    def test_exports(self):
        url = reverse('slicing:run_export', args=[self.run.pk])
        self.assertEqual(self.client.get(url, {'format': 'pdf'})['Content-Type'], 'application/pdf')
        self.assertIn('spreadsheetml', self.client.get(url, {'format': 'excel'})['Content-Type'])
        lines = self.client.get(url, {'format': 'csv'}).content.decode().strip().splitlines()
        self.assertEqual(len(lines), 3)
        self.assertEqual(self.client.get(url, {'format': 'docx'}).status_code, 400)

    def test_pdf_export_with_markup_in_the_mesh_name(self):
        mesh = Mesh.import_document('bracket <b & c', dump_mesh([identity_map()]))
        run = SliceRun.objects.create(mesh=mesh, nu=1, planes=[0.5])
        run.execute()
        response = self.client.get(reverse('slicing:run_export', args=[run.pk]), {'format': 'pdf'})
        self.assertEqual(response.status_code, 200)
        self.assertTrue(response.content.startswith(b'%PDF'))

    def test_plane_svg(self):
        response = self.client.get(reverse('slicing:plane_svg', args=[self.run.pk, 1]), {'display': 'inline'})
        self.assertEqual(response['Content-Type'], 'image/svg+xml')
        self.assertIn(b'<polygon', response.content)
        self.assertEqual(self.client.get(reverse('slicing:plane_svg', args=[self.run.pk, 5])).status_code, 404)
        response = self.client.get(reverse('slicing:plane_svg', args=[self.run.pk, 0]), {'color': 'rainbow'})
        self.assertEqual(response.status_code, 400)

    def test_delete(self):
        response = self.client.post(reverse('slicing:run_delete', args=[self.run.pk]))
        self.assertRedirects(response, reverse('slicing:run_list'))
        self.assertFalse(PlaneStat.objects.exists())


class SliceCommandTests(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)
        self.mesh = self.path('mesh.json')
        write_mesh([identity_map(0), identity_map(1).translated((0.0, 0.0, 1.0))], self.mesh)

    def path(self, name):
        return os.path.join(self.directory.name, name)

    def slice(self, **options):
        out = io.StringIO()
        call_command('slice', stdout=out, stderr=io.StringIO(), **options)
        return out.getvalue()

    def test_missing_mesh(self):
        with self.assertRaises(CommandError) as ctx:
            self.slice(z_start=0.0, z_step=0.5, count=2)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_invalid_options(self):
        for options in ({'count': 2}, {'planes': self.mesh, 'z_start': 0.0}, {'z_start': 0.0, 'z_step': 0.5, 'count': 2, 'nu': 11}):
            with self.assertRaises(CommandError) as ctx:
                self.slice(mesh=self.mesh, **options)
            self.assertEqual(ctx.exception.returncode, 1)

    def test_unreadable_inputs(self):
        with self.assertRaises(CommandError) as ctx:
            self.slice(mesh=self.path('missing.json'), z_start=0.0, z_step=0.5, count=2)
        self.assertEqual(ctx.exception.returncode, 2)
        with self.assertRaises(CommandError) as ctx:
            self.slice(mesh=self.mesh, planes=self.path('missing.txt'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_non_utf8_inputs(self):
        bad = self.path('latin.json')
        with open(bad, 'wb') as handle:
            handle.write(b'{"version": 1\xff}')
        with self.assertRaises(CommandError) as ctx:
            self.slice(mesh=bad, z_start=0.0, z_step=0.5, count=2)
        self.assertEqual(ctx.exception.returncode, 1)

        planes = self.path('latin.txt')
        with open(planes, 'wb') as handle:
            handle.write(b'0.25\n0.5\xff\n')
        with self.assertRaises(CommandError) as ctx:
            self.slice(mesh=self.mesh, planes=planes)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_invalid_mesh(self):
        bad = self.path('bad.json')
        with open(bad, 'w') as handle:
            handle.write('{"version": 1, "degree": 3, "maps": [{"id": 0, "coefficients": []}]}')
        with self.assertRaises(CommandError) as ctx:
            self.slice(mesh=bad, z_start=0.0, z_step=0.5, count=2)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_plane_file_matches_uniform_stack(self):
        planes = self.path('planes.txt')
        with open(planes, 'w') as handle:
            handle.write('0.25\n0.75\n1.25\n')
        self.slice(mesh=self.mesh, nu=2, z_start=0.25, z_step=0.5, count=3, log=self.path('uniform.json'))
        self.slice(mesh=self.mesh, nu=2, planes=planes, log=self.path('listed.json'))
        with open(self.path('uniform.json')) as a, open(self.path('listed.json')) as b:
            self.assertEqual(a.read(), b.read())

    def test_every_output(self):
        svg_dir = self.path('svg')
        output = self.slice(
            mesh=DEMO_MESH, nu=2, z_start=0.1, z_step=0.5, count=4,
            svg_dir=svg_dir, log=self.path('log.json'), stats=self.path('stats.csv'),
            plane_stats=self.path('planes.csv'), report=self.path('run.pdf'), workbook=self.path('run.xlsx'),
        )
        self.assertIn('Activations:', output)
        self.assertEqual(sorted(os.listdir(svg_dir)), [f'plane_{i}.svg' for i in range(4)])
        with open(self.path('log.json')) as handle:
            self.assertEqual(len(json.load(handle)['planes']), 4)
        with open(self.path('stats.csv'), newline='') as handle:
            self.assertEqual(next(csv.reader(handle)), STATS_COLUMNS)
        with open(self.path('planes.csv'), newline='') as handle:
            self.assertEqual(len(list(csv.reader(handle))), 5)
        with open(self.path('run.pdf'), 'rb') as handle:
            self.assertTrue(handle.read().startswith(b'%PDF'))
        self.assertTrue(os.path.exists(self.path('run.xlsx')))

    def test_unwritable_output(self):
        with self.assertRaises(CommandError) as ctx:
            self.slice(mesh=self.mesh, nu=1, z_start=0.5, z_step=0.5, count=1,
                       log=self.path(os.path.join('no-such-dir', 'log.json')))
        self.assertEqual(ctx.exception.returncode, 2)


class VerifyCommandTests(SimpleTestCase):
    def test_rejects_small_scaling_range(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('verify', max_nu=5, stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
