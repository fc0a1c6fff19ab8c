'''Builders for the synthetic maps used by the demo mesh, the verify command and tests'''
import numpy as np

from .bbform import DEGREE, TrivariateMap, map_from_function, multi_indices, validate_map

# Vertices: u_0 -> origin, u_1 -> e_x, u_2 -> e_y, u_3 -> e_z
IDENTITY_COEFFS = np.array(multi_indices(DEGREE), dtype=float)[:, 1:] / DEGREE

# Control points bent by the demo stack
DEMO_LIFT_INDEX = (0, 1, 1, 1)
DEMO_SHEAR_INDEX = (1, 1, 1, 0)


def identity_map(map_id=0):
    return TrivariateMap(IDENTITY_COEFFS, id=map_id)


def affine_map(matrix, offset=(0.0, 0.0, 0.0), map_id=0):
    '''x -> A x + b on the unit tetrahedron'''
    matrix = np.asarray(matrix, dtype=float)
    return TrivariateMap(IDENTITY_COEFFS @ matrix.T + np.asarray(offset, dtype=float), id=map_id)


def perturbed_map(rng, amplitude, map_id=0):
    '''Identity with every control point jittered uniformly in [-amplitude, amplitude]'''
    return TrivariateMap(IDENTITY_COEFFS + rng.uniform(-amplitude, amplitude, IDENTITY_COEFFS.shape), id=map_id)


def random_valid_map(rng, amplitude, samples=256, map_id=0, attempts=100):
    '''A perturbed map whose sampled Jacobian stays positive'''
    for _ in range(attempts):
        candidate = perturbed_map(rng, amplitude, map_id)
        if validate_map(candidate, samples).ok:
            return candidate
    raise ValueError(f'No valid map found with amplitude {amplitude} after {attempts} attempts')


def bump_map(height, map_id=0):
    '''Identity with the bottom-face control point g_1110 pushed down by `height`.

    The face z = 0 then sags below the plane with its lowest point inside the
    face, so planes slightly below zero meet the map in a closed loop on that
    face and touch no edge.
    '''
    bb_map = identity_map(map_id)
    return bb_map.with_coefficient((1, 1, 1, 0), bb_map.coefficient((1, 1, 1, 0)) - (0.0, 0.0, height))


def two_component_map(map_id=0):
    '''x, y kept, z = u_0 + 2 u_3 + u_1 u_2; low planes cut off two separate corners'''
    def function(u):
        return np.column_stack([u[:, 1], u[:, 2], u[:, 0] + 2.0 * u[:, 3] + u[:, 1] * u[:, 2]])

    return map_from_function(function, map_id)


def demo_map(position):
    '''The map at `position` in the demo stack'''
    bb_map = identity_map(position)
    lift = 0.1 if position % 2 == 0 else -0.1
    bb_map = bb_map.with_coefficient(DEMO_LIFT_INDEX, bb_map.coefficient(DEMO_LIFT_INDEX) + (0.0, 0.0, lift))
    bb_map = bb_map.with_coefficient(DEMO_SHEAR_INDEX, bb_map.coefficient(DEMO_SHEAR_INDEX) + (0.05, 0.0, 0.0))
    return bb_map.translated((1.5 * (position % 3), 0.0, 0.4 * position))


def demo_stack(count=20):
    '''Maps stacked in z with overlapping ranges, ids 0..count-1'''
    if count < 1:
        raise ValueError('A demo stack needs at least one map')
    return [demo_map(position) for position in range(count)]
