import io
import json
import os
import tempfile

import numpy as np
from django.core.exceptions import ValidationError
from django.core.files.uploadedfile import SimpleUploadedFile
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from django.urls import reverse

from slicing.oracle import linear_deviation
from .bbform import (
    TriPatch, TrivariateMap, bb_product, bernstein_basis, control_z_range, de_casteljau, embed_face_point, evaluate,
    evaluate_direct, face_patch, index_of, jacobian, jacobian_samples, map_from_function, multi_indices,
    patch_direction_derivative, validate_map,
)
from .bounds import offset_vector, scaled_tolerance, second_differences, stencil
from .demo import IDENTITY_COEFFS, affine_map, identity_map, perturbed_map, random_valid_map
from .loader import dump_mesh, load_mesh, parse_mesh, write_mesh
from .models import DeformationMap, Mesh

DEMO_MESH = os.path.join(os.path.dirname(__file__), 'data', 'demo_mesh.json')


def random_points(rng, count, nvars=4):
    return rng.dirichlet(np.ones(nvars), size=count)


def mesh_text(maps, rotation=None):
    return dump_mesh(maps, rotation)


class MultiIndexTests(SimpleTestCase):
    def test_canonical_order(self):
        indices = multi_indices(3)
        self.assertEqual(len(indices), 20)
        self.assertEqual(indices[:5], ((3, 0, 0, 0), (2, 1, 0, 0), (2, 0, 1, 0), (2, 0, 0, 1), (1, 2, 0, 0)))
        self.assertEqual(indices[-1], (0, 0, 0, 3))
        self.assertEqual(index_of(3)[(1, 1, 1, 0)], 5)
        self.assertTrue(all(sum(alpha) == 3 for alpha in indices))

    def test_bivariate_count(self):
        self.assertEqual(len(multi_indices(3, 3)), 10)
        self.assertEqual(len(multi_indices(4, 3)), 15)


class EvaluateTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_vertices_are_interpolated(self):
        bb_map = perturbed_map(self.rng, 0.1)
        for k in range(4):
            vertex = np.eye(4)[k]
            corner = tuple(3 if p == k else 0 for p in range(4))
            np.testing.assert_array_equal(evaluate(bb_map, vertex), bb_map.coefficient(corner))

    def test_identity_centroid(self):
        np.testing.assert_allclose(evaluate(identity_map(), [0.25] * 4), [0.25] * 3, atol=1e-12)

    def test_de_casteljau_matches_direct_sum(self):
        bb_map = perturbed_map(self.rng, 0.15)
        u = random_points(self.rng, 200)
        np.testing.assert_allclose(evaluate(bb_map, u), evaluate_direct(bb_map, u), rtol=1e-12, atol=1e-14)

    def test_partition_of_unity(self):
        u = random_points(self.rng, 100)
        np.testing.assert_allclose(bernstein_basis(u, 3).sum(axis=-1), 1.0, atol=1e-12)

    def test_linear_precision(self):
        u = random_points(self.rng, 100)
        np.testing.assert_allclose(evaluate(identity_map(), u), u[:, 1:], atol=1e-12)

    def test_convex_hull(self):
        bb_map = perturbed_map(self.rng, 0.15)
        values = evaluate(bb_map, random_points(self.rng, 2000))
        self.assertTrue(np.all(values >= bb_map.coeffs.min(axis=0) - 1e-12))
        self.assertTrue(np.all(values <= bb_map.coeffs.max(axis=0) + 1e-12))

    def test_boundary_point_is_renormalized(self):
        u = [0.5, 0.5, 0.0, -1e-13]
        np.testing.assert_allclose(evaluate(identity_map(), u), [0.5, 0.0, 0.0], atol=1e-12)

    def test_invalid_barycentric(self):
        with self.assertRaises(ValueError):
            evaluate(identity_map(), [0.5, 0.5, 0.5, -0.5])
        with self.assertRaises(ValueError):
            evaluate(identity_map(), [0.5, 0.5, 0.5, 0.5])
        with self.assertRaises(ValueError):
            evaluate(identity_map(), [0.5, 0.5])


class ControlRangeTests(SimpleTestCase):
    def test_identity(self):
        self.assertEqual(control_z_range(identity_map()), (0.0, 1.0))

    def test_translation_shifts_range(self):
        bb_map = perturbed_map(np.random.default_rng(3), 0.1)
        low, high = control_z_range(bb_map)
        moved_low, moved_high = control_z_range(bb_map.translated((0.0, 0.0, 5.0)))
        self.assertAlmostEqual(moved_low - low, 5.0, places=12)
        self.assertAlmostEqual(moved_high - high, 5.0, places=12)

    def test_sampled_heights_stay_inside(self):
        rng = np.random.default_rng(11)
        bb_map = perturbed_map(rng, 0.15)
        low, high = control_z_range(bb_map)
        z = evaluate(bb_map, random_points(rng, 100000))[:, 2]
        self.assertGreaterEqual(z.min(), low - 1e-12)
        self.assertLessEqual(z.max(), high + 1e-12)


class FacePatchTests(SimpleTestCase):
    def test_identity_faces_are_linear(self):
        rng = np.random.default_rng(5)
        t = random_points(rng, 20, nvars=3)
        for face in range(4):
            patch = face_patch(identity_map(), face)
            np.testing.assert_allclose(patch.evaluate(t), embed_face_point(face, t)[:, 1:], atol=1e-12)

    def test_face_zero_selects_coefficients(self):
        coeffs = np.array(IDENTITY_COEFFS)
        known = np.arange(30, dtype=float).reshape(10, 3)
        rows = [position for position, alpha in enumerate(multi_indices(3)) if alpha[0] == 0]
        coeffs[rows] = known
        patch = face_patch(TrivariateMap(coeffs), 0)
        np.testing.assert_array_equal(patch.coeffs, known)

    def test_patches_agree_with_map(self):
        rng = np.random.default_rng(17)
        bb_map = perturbed_map(rng, 0.15)
        t = random_points(rng, 50, nvars=3)
        for face in range(4):
            np.testing.assert_allclose(
                face_patch(bb_map, face).evaluate(t), evaluate(bb_map, embed_face_point(face, t)), atol=1e-12,
            )

    def test_face_out_of_range(self):
        with self.assertRaises(ValueError):
            face_patch(identity_map(), 4)


class PatchDerivativeTests(SimpleTestCase):
    def test_linear_patch(self):
        p0, p1, p2 = np.array([0.0, 0.0, 1.0]), np.array([2.0, 1.0, 0.0]), np.array([0.0, 3.0, 1.0])
        derivative = patch_direction_derivative(TriPatch(1, [p0, p1, p2]), 1)
        self.assertEqual(derivative.degree, 0)
        np.testing.assert_array_equal(derivative.coeffs, [p1 - p0])

    def test_constant_patch_has_zero_derivative(self):
        derivative = patch_direction_derivative(TriPatch(3, np.full(10, 2.5)), 2)
        np.testing.assert_array_equal(derivative.coeffs, np.zeros(6))

    def test_degree_zero_rejected(self):
        with self.assertRaises(ValueError):
            patch_direction_derivative(TriPatch(0, [1.0]), 1)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(23)
        patch = TriPatch(3, rng.normal(size=10))
        h = 1e-5
        for direction in (1, 2):
            step = np.zeros(3)
            step[direction] = h
            step[0] = -h
            derivative = patch_direction_derivative(patch, direction)
            for t in 0.1 + 0.7 * random_points(rng, 20, nvars=3):
                expected = (patch.evaluate(t + step) - patch.evaluate(t - step)) / (2 * h)
                self.assertAlmostEqual(float(derivative.evaluate(t)), float(expected), delta=1e-6)


class ProductTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(29)
        self.t = random_points(self.rng, 100, nvars=3)

    def test_multiplicative_identity(self):
        g = TriPatch(3, self.rng.normal(size=10))
        product = bb_product(TriPatch(0, [1.0]), g)
        self.assertEqual(product.degree, 3)
        np.testing.assert_allclose(product.evaluate(self.t[:20]), g.evaluate(self.t[:20]), atol=1e-12)

    def test_coordinate_functions(self):
        s1 = TriPatch(1, [0.0, 1.0, 0.0])
        s2 = TriPatch(1, [0.0, 0.0, 1.0])
        np.testing.assert_allclose(bb_product(s1, s2).evaluate(self.t), self.t[:, 1] * self.t[:, 2], atol=1e-12)

    def test_quadratic_times_quadratic(self):
        f = TriPatch(2, self.rng.normal(size=6))
        g = TriPatch(2, self.rng.normal(size=6))
        product = bb_product(f, g)
        self.assertEqual(len(product.coeffs), 15)
        np.testing.assert_allclose(product.evaluate(self.t), f.evaluate(self.t) * g.evaluate(self.t), atol=1e-12)

    def test_vector_patches_rejected(self):
        with self.assertRaises(ValueError):
            bb_product(face_patch(identity_map(), 0), TriPatch(0, [1.0]))


class JacobianTests(SimpleTestCase):
    def test_identity(self):
        report = validate_map(identity_map(), 64)
        self.assertAlmostEqual(report.min_det, 1.0, places=12)
        self.assertAlmostEqual(report.max_det, 1.0, places=12)
        self.assertTrue(report.ok)

    def test_stretched_map(self):
        report = validate_map(affine_map(np.diag([2.0, 1.0, 1.0])), 64)
        self.assertAlmostEqual(report.min_det, 2.0, places=12)
        self.assertAlmostEqual(report.max_det, 2.0, places=12)

    def test_reflection_is_flagged(self):
        report = validate_map(affine_map(np.diag([1.0, 1.0, -1.0])), 64)
        self.assertFalse(report.ok)

    def test_matches_finite_differences(self):
        bb_map = random_valid_map(np.random.default_rng(31), 0.1)
        u = jacobian_samples(256)
        h = 1e-5
        columns = []
        for direction in (1, 2, 3):
            step = np.zeros(4)
            step[direction] = h
            step[0] = -h
            plus = de_casteljau(bb_map.coeffs, u + step, 3)
            minus = de_casteljau(bb_map.coeffs, u - step, 3)
            columns.append((plus - minus) / (2 * h))
        estimate = np.linalg.det(np.stack(columns, axis=-1))
        np.testing.assert_allclose(np.linalg.det(jacobian(bb_map, u)), estimate, atol=1e-4)
        self.assertAlmostEqual(validate_map(bb_map, 256).min_det, float(estimate.min()), delta=1e-4)

    def test_samples_lie_in_domain(self):
        u = jacobian_samples(500)
        self.assertTrue(np.all(u >= -1e-15))
        np.testing.assert_allclose(u.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(u, jacobian_samples(500))

    def test_map_from_function_reproduces_identity(self):
        bb_map = map_from_function(lambda u: u[:, 1:])
        np.testing.assert_allclose(bb_map.coeffs, IDENTITY_COEFFS, atol=1e-12)


class SecondDifferenceTests(SimpleTestCase):
    def test_affine_maps_vanish(self):
        bb_map = affine_map([[1.0, 0.3, 0.0], [0.2, 1.0, 0.1], [0.0, 0.4, 2.0]], offset=(1.0, -2.0, 0.5))
        sd = second_differences(bb_map)
        for value in list(sd.entries.values()) + list(sd.cartesian.values()):
            np.testing.assert_allclose(value, 0.0, atol=1e-14)
        self.assertTrue(offset_vector(sd).is_zero or np.all(offset_vector(sd).mu < 1e-13))

    def test_single_displaced_coefficient(self):
        h = 0.25
        base = identity_map()
        bb_map = base.with_coefficient((0, 1, 1, 1), base.coefficient((0, 1, 1, 1)) + (0.0, 0.0, h))
        sd = second_differences(bb_map)
        touched = {(i, j, k) for i, j, k in sd.entries if i != j and {i, j, k} == {1, 2, 3}}
        self.assertEqual(len(touched), 6)
        for key, value in sd.entries.items():
            expected = (0.0, 0.0, h) if key in touched else (0.0, 0.0, 0.0)
            np.testing.assert_allclose(value, expected, atol=1e-15)

    def test_matches_naive_sum(self):
        bb_map = perturbed_map(np.random.default_rng(37), 0.15)
        sd = second_differences(bb_map)
        for (i, j, k), value in sd.entries.items():
            terms = [sign * bb_map.coefficient(alpha) for alpha, sign in stencil(i, j, k)]
            naive = terms[0] + terms[1] + terms[2] + terms[3]
            np.testing.assert_allclose(value, naive, atol=1e-14)

    def test_symmetric_in_i_and_j(self):
        sd = second_differences(perturbed_map(np.random.default_rng(41), 0.15))
        for (i, j, k), value in sd.entries.items():
            np.testing.assert_allclose(value, sd.entries[(j, i, k)], atol=1e-15)


class OffsetTests(SimpleTestCase):
    def test_doubling_lengths_quadruples(self):
        sd = second_differences(perturbed_map(np.random.default_rng(43), 0.15))
        np.testing.assert_array_equal(offset_vector(sd, (2.0, 2.0, 2.0)).mu, 4.0 * offset_vector(sd).mu)

    def test_bump_bound_dominates_samples(self):
        base = identity_map()
        bb_map = base.with_coefficient((0, 1, 1, 1), base.coefficient((0, 1, 1, 1)) + (0.0, 0.0, 0.3))
        mu = offset_vector(second_differences(bb_map)).mu
        self.assertGreater(mu[2], 0.0)
        self.assertLessEqual(linear_deviation(bb_map, 10000)[2], mu[2])

    def test_narrow_stencil_is_available(self):
        sd = second_differences(perturbed_map(np.random.default_rng(47), 0.15))
        self.assertTrue(np.all(offset_vector(sd, widened=False).mu <= offset_vector(sd, widened=True).mu))

    def test_default_stencil_is_the_narrow_one(self):
        sd = second_differences(perturbed_map(np.random.default_rng(53), 0.15))
        np.testing.assert_array_equal(offset_vector(sd).mu, offset_vector(sd, widened=False).mu)

    def test_non_positive_lengths(self):
        sd = second_differences(identity_map())
        with self.assertRaises(ValueError):
            offset_vector(sd, (1.0, 0.0, 1.0))

    def test_scaled_tolerance(self):
        mu = np.array([0.8, 0.4, 1.6])
        np.testing.assert_array_equal(scaled_tolerance(mu, 0).tol, mu)
        np.testing.assert_array_equal(scaled_tolerance(mu, 2).tol, mu / 16)
        np.testing.assert_array_equal(scaled_tolerance(mu, 1).tol, [0.2, 0.1, 0.4])
        with self.assertRaises(ValueError):
            scaled_tolerance(mu, -1)

    def test_band_adds_rounding_guard(self):
        bb_map = perturbed_map(np.random.default_rng(53), 0.1)
        tolerance = bb_map.tolerance(3)
        np.testing.assert_array_equal(tolerance.tol, bb_map.offset.mu / 64)
        np.testing.assert_array_equal(tolerance.band, tolerance.tol + bb_map.rounding_guard)
        self.assertTrue(np.all(bb_map.rounding_guard > 0.0))


class LoaderTests(SimpleTestCase):
    def test_identity_file(self):
        document = parse_mesh(mesh_text([identity_map(7)]))
        self.assertEqual(len(document.maps), 1)
        self.assertEqual(document.maps[0].id, 7)
        self.assertTrue(document.maps[0].offset.is_zero)
        self.assertFalse(document.flagged)

    def test_wrong_coefficient_count_names_map(self):
        raw = json.loads(mesh_text([identity_map(0), identity_map(1)]))
        raw['maps'][1]['coefficients'].pop()
        with self.assertRaises(ValidationError) as ctx:
            parse_mesh(json.dumps(raw))
        self.assertIn('index 1', ctx.exception.messages[0])
        self.assertIn('19 coefficients', ctx.exception.messages[0])

    def test_round_trip_is_exact(self):
        rng = np.random.default_rng(59)
        maps = [perturbed_map(rng, 0.1, map_id=i) for i in range(5)]
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'mesh.json')
            write_mesh(maps, path)
            loaded = load_mesh(path, samples=16)
        for original, copy in zip(maps, loaded.maps):
            self.assertEqual(original.id, copy.id)
            np.testing.assert_array_equal(original.coeffs, copy.coeffs)

    def test_parse_error_has_position(self):
        with self.assertRaises(ValidationError) as ctx:
            parse_mesh('{"version": 1,\n "degree": 3,\n "maps": [}')
        self.assertIn('line 3', ctx.exception.messages[0])

    def test_file_must_be_utf8(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'mesh.json')
            with open(path, 'wb') as handle:
                handle.write(b'{"version": 1, "maps": "\xff"}')
            with self.assertRaises(ValidationError) as ctx:
                load_mesh(path)
        self.assertIn('UTF-8', ctx.exception.messages[0])

    def test_rotation_applied(self):
        quarter_turn = [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]
        document = parse_mesh(mesh_text([identity_map()], quarter_turn))
        np.testing.assert_allclose(document.maps[0].coefficient((0, 0, 3, 0)), [0.0, 0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(document.maps[0].z_range, (0.0, 1.0), atol=1e-15)

    def test_bad_rotations(self):
        for rotation in ([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.1]],
                         [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
                         [1.0, 2.0]):
            with self.assertRaises(ValidationError):
                parse_mesh(json.dumps({
                    'version': 1, 'degree': 3, 'rotation': rotation,
                    'maps': [{'id': 0, 'coefficients': IDENTITY_COEFFS.tolist()}],
                }))

    def test_header_checks(self):
        good = json.loads(mesh_text([identity_map()]))
        for key, value in (('version', 2), ('degree', 2), ('maps', [])):
            raw = dict(good, **{key: value})
            with self.assertRaises(ValidationError):
                parse_mesh(json.dumps(raw))
        raw = dict(good, maps=good['maps'] * 2)
        with self.assertRaises(ValidationError):
            parse_mesh(json.dumps(raw))

    def test_bundled_demo_mesh(self):
        document = load_mesh(DEMO_MESH)
        self.assertEqual([bb_map.id for bb_map in document.maps], list(range(20)))
        self.assertFalse(document.flagged)


class MeshModelTests(TestCase):
    def test_import_document(self):
        maps = [identity_map(0), affine_map(np.diag([1.0, 1.0, -1.0]), map_id=1)]
        mesh = Mesh.import_document('pair', mesh_text(maps), 'identity and a reflection')
        self.assertEqual(mesh.map_count, 2)
        self.assertEqual(mesh.flagged_count, 1)
        self.assertEqual(mesh.z_range, (-1.0, 1.0))
        restored = mesh.to_maps()
        np.testing.assert_array_equal(restored[0].coeffs, maps[0].coeffs)
        self.assertEqual([bb_map.id for bb_map in restored], [0, 1])

    def test_invalid_document_creates_nothing(self):
        with self.assertRaises(ValidationError):
            Mesh.import_document('broken', '{"version": 1}')
        self.assertFalse(Mesh.objects.exists())
        self.assertFalse(DeformationMap.objects.exists())


class MeshViewTests(TestCase):
    def setUp(self):
        self.mesh = Mesh.import_document('identity', mesh_text([identity_map()]))

    def test_list_and_search(self):
        response = self.client.get(reverse('meshes:mesh_list'), {'search': 'ident'})
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, 'identity')

    def test_upload(self):
        upload = SimpleUploadedFile('demo.json', mesh_text([identity_map(3)]).encode('utf-8'))
        response = self.client.post(reverse('meshes:mesh_upload'), {'name': 'uploaded', 'mesh_file': upload})
        mesh = Mesh.objects.get(name='uploaded')
        self.assertRedirects(response, reverse('meshes:mesh_detail', args=[mesh.pk]))
        self.assertEqual(mesh.maps.get().map_id, 3)

    def test_upload_rejects_bad_file(self):
        upload = SimpleUploadedFile('bad.json', b'{"version": 1, "degree": 3, "maps": []}')
        response = self.client.post(reverse('meshes:mesh_upload'), {'name': 'bad', 'mesh_file': upload})
        self.assertEqual(response.status_code, 200)
        self.assertFalse(Mesh.objects.filter(name='bad').exists())

    def test_detail_csv(self):
        response = self.client.get(reverse('meshes:mesh_detail', args=[self.mesh.pk]), {'export': 'csv'})
        self.assertEqual(response['Content-Type'], 'text/csv')
        lines = response.content.decode().strip().splitlines()
        self.assertEqual(lines[0].split(',')[0], 'map')
        self.assertEqual(len(lines), 2)

    def test_delete(self):
        response = self.client.post(reverse('meshes:mesh_delete', args=[self.mesh.pk]))
        self.assertRedirects(response, reverse('meshes:mesh_list'))
        self.assertFalse(Mesh.objects.exists())


class MakeDemoMeshCommandTests(SimpleTestCase):
    def test_writes_stack(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'demo.json')
            call_command('make_demo_mesh', path, count=4, stdout=io.StringIO())
            document = load_mesh(path, samples=16)
        self.assertEqual(len(document.maps), 4)

    def test_matches_bundled_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'demo.json')
            call_command('make_demo_mesh', path, stdout=io.StringIO())
            written = load_mesh(path, samples=16).maps
        bundled = load_mesh(DEMO_MESH, samples=16).maps
        for a, b in zip(written, bundled):
            np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=0, atol=1e-12)

    def test_rejects_empty_stack(self):
        with self.assertRaises(CommandError):
            call_command('make_demo_mesh', os.devnull, count=0)
