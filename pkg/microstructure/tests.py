import numpy as np
from django.test import SimpleTestCase

from meshes.demo import identity_map, perturbed_map
from slicing.cuboid import SlicePlane
from slicing.paving import Paving
from slicing.runner import SliceJob
from slicing.sweep import PlaneStack
from .lattice import TEMPLATES, CellTemplate, clip_to_domain, generate_cell
from .tiles import TileBuilder, clip_to_slab, map_polyline, slice_and_emit


class CellTemplateTests(SimpleTestCase):
    def test_template_sizes(self):
        self.assertEqual(len(TEMPLATES['edge-frame']), 12)
        self.assertEqual(len(TEMPLATES['octet']), 24)
        self.assertEqual(len(TEMPLATES['diagonal-cross']), 4)

    def test_invalid_templates(self):
        for kwargs in ({'name': 'honeycomb'}, {'radius_fraction': 0.5}, {'samples_per_beam': 1}):
            with self.assertRaises(ValueError):
                CellTemplate(**kwargs)


class GenerateCellTests(SimpleTestCase):
    def setUp(self):
        self.paving = Paving.at_resolution(2)

    def test_interior_box_keeps_every_beam(self):
        segments = generate_cell(self.paving, (0, 0, 0), CellTemplate())
        self.assertEqual(segments.shape, (12, 2, 4))
        np.testing.assert_allclose(segments.sum(axis=-1), 1.0)
        self.assertTrue(np.all(segments >= 0.0))

    def test_slant_box_is_cut_back(self):
        segments = generate_cell(self.paving, (1, 1, 1), CellTemplate())
        self.assertEqual(len(segments), 3)
        self.assertTrue(np.all(segments[..., 0] >= -1e-12))
        self.assertEqual(len(generate_cell(self.paving, (1, 1, 1), CellTemplate('octet'))), 9)

    def test_deterministic(self):
        first = generate_cell(self.paving, (2, 0, 1), CellTemplate('octet'))
        second = generate_cell(self.paving, (2, 0, 1), CellTemplate('octet'))
        np.testing.assert_array_equal(first, second)

    def test_invalid_box(self):
        with self.assertRaises(ValueError):
            generate_cell(self.paving, (4, 0, 0), CellTemplate())

    def test_clip_to_domain(self):
        start, end = clip_to_domain(np.zeros(3), np.array([1.0, 1.0, 0.0]), 1)
        np.testing.assert_allclose(start, [0.0, 0.0, 0.0])
        np.testing.assert_allclose(end, [0.5, 0.5, 0.0])
        self.assertIsNone(clip_to_domain(np.array([1.0, 1.0, 0.0]), np.array([1.0, 1.0, 1.0]), 1))


class SliceAndEmitTests(SimpleTestCase):
    def test_map_polyline(self):
        segment = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.5]])
        line = map_polyline(identity_map(), segment, 2)
        np.testing.assert_allclose(line, [[0.0, 0.0, 0.0], [0.5, 0.0, 0.5]], atol=1e-15)
        self.assertEqual(map_polyline(identity_map(), segment, 5).shape, (5, 3))
        with self.assertRaises(ValueError):
            map_polyline(identity_map(), segment, 1)

    def test_horizontal_segment_in_plane(self):
        polyline = np.array([[0.0, 0.0, 0.5], [1.0, 0.0, 0.5]])
        pieces = slice_and_emit([polyline], SlicePlane(0.5), 0.0)
        self.assertEqual(len(pieces), 1)
        np.testing.assert_array_equal(pieces[0], [[0.0, 0.0], [1.0, 0.0]])

    def test_vertical_segment_gives_a_point(self):
        polyline = np.array([[0.3, 0.2, 0.0], [0.3, 0.2, 1.0]])
        pieces = slice_and_emit([polyline], SlicePlane(0.4), 0.0)
        self.assertEqual(len(pieces), 1)
        np.testing.assert_allclose(pieces[0], [[0.3, 0.2], [0.3, 0.2]])

    def test_oblique_segment_in_slab(self):
        polyline = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5], [1.0, 1.0, 1.0]])
        pieces = slice_and_emit([polyline], SlicePlane(0.5), 0.25)
        self.assertEqual(len(pieces), 2)
        np.testing.assert_allclose(pieces[0], [[0.25, 0.25], [0.5, 0.5]])
        np.testing.assert_allclose(pieces[1], [[0.5, 0.5], [0.75, 0.75]])

    def test_segment_outside_slab(self):
        self.assertIsNone(clip_to_slab(np.zeros(3), np.array([1.0, 0.0, 0.1]), 0.2, 0.3))
        self.assertEqual(slice_and_emit([np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.1]])], SlicePlane(0.5), 0.1), [])

    def test_negative_slab(self):
        with self.assertRaises(ValueError):
            slice_and_emit([], SlicePlane(0.5), -0.1)
        with self.assertRaises(ValueError):
            TileBuilder(Paving.at_resolution(1), slab=-0.1)


class TileBuilderTests(SimpleTestCase):
    def setUp(self):
        self.paving = Paving.at_resolution(2)

    def test_cost_counters(self):
        builder = TileBuilder(self.paving, CellTemplate('edge-frame', 0.1, 5), slab=0.0)
        tiler = builder.tiler(identity_map())
        lines = tiler.polylines((0, 0, 0))
        self.assertEqual(len(lines), 12)
        self.assertEqual(builder.cells_generated, 1)
        self.assertEqual(builder.beams_considered, 12)
        self.assertEqual(builder.samples_evaluated, 60)
        self.assertIs(builder.tiler(identity_map()), tiler)

    def test_cell_cost_does_not_depend_on_resolution(self):
        kinds = {
            'interior': lambda n: (0, 0, 0),
            'apex': lambda n: (n - 1, 0, 0),
            'slant': lambda n: (1, 1, n - 3),
        }
        for name in ('edge-frame', 'octet'):
            for kind, box_at in kinds.items():
                costs = set()
                for nu in (2, 3, 4, 5):
                    paving = Paving.at_resolution(nu)
                    builder = TileBuilder(paving, CellTemplate(name), slab=0.0)
                    builder.tiler(identity_map()).polylines(box_at(paving.n))
                    costs.add((builder.beams_considered, builder.samples_evaluated))
                self.assertEqual(len(costs), 1, f'{name} {kind}: {costs}')

    def test_cache_keeps_boxes_active_on_the_last_plane(self):
        builder = TileBuilder(self.paving, slab=0.0, cache_active=True)
        tiler = builder.tiler(perturbed_map(np.random.default_rng(5), 0.05))
        tiler.polylines((0, 0, 0))
        tiler.polylines((0, 0, 0))
        self.assertEqual((builder.cells_generated, builder.cache_hits), (1, 1))

        builder.end_plane()
        tiler.polylines((0, 0, 0))
        self.assertEqual((builder.cells_generated, builder.cache_hits), (1, 2))

        builder.end_plane()
        builder.end_plane()
        tiler.polylines((0, 0, 0))
        self.assertEqual((builder.cells_generated, builder.cache_hits), (2, 2))

    def test_without_cache_every_visit_regenerates(self):
        builder = TileBuilder(self.paving, slab=0.0)
        tiler = builder.tiler(identity_map())
        tiler.polylines((0, 0, 0))
        tiler.polylines((0, 0, 0))
        self.assertEqual((builder.cells_generated, builder.cache_hits), (2, 0))

    def test_cached_sweep_matches_plain_sweep(self):
        planes = PlaneStack((0.3, 0.31))
        plain = SliceJob([identity_map()], planes, nu=2, slab=0.02)
        cached = SliceJob([identity_map()], planes, nu=2, slab=0.02, cache_active=True)
        plain.run()
        cached.run()
        self.assertEqual(plain.log.dumps(), cached.log.dumps())
        self.assertEqual(plain.tiles.cells_generated, plain.stats.activations)
        self.assertEqual(cached.tiles.cache_hits, cached.stats.planes[1].activations)
        self.assertLess(cached.tiles.cells_generated, plain.tiles.cells_generated)

    def test_tiles_carry_segments(self):
        job = SliceJob([identity_map()], PlaneStack((0.3,)), nu=2, slab=0.02)
        job.run()
        tiles = job.log.tiles_for(0)
        self.assertTrue(tiles)
        for tile in tiles:
            self.assertTrue(tile.segments)
            for segment in tile.segments:
                self.assertEqual(np.asarray(segment).shape, (2, 2))
