'''Bernstein-Bezier (BB) polynomials over tetrahedra and triangles.

Coefficients are stored in the canonical order: multi-indices of the
total degree sorted lexicographically descending (3000, 2100, 2010, 2001,
1200, ..., 0003 for a trivariate cubic). That order is also the file order.
'''
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import factorial
from scipy.stats import qmc

logger = logging.getLogger(__name__)

DEGREE = 3
BARYCENTRIC_TOL = 1e-12

# Largest batch handed to one de Casteljau pass
EVALUATION_CHUNK = 32768


# MULTI-INDEX TABLES

@lru_cache(maxsize=None)
def multi_indices(degree, nvars=4):
    '''All multi-indices of a total degree, lexicographically descending'''
    if degree < 0:
        raise ValueError('Degree must be non-negative')

    def build(remaining, slots):
        if slots == 1:
            return [(remaining,)]
        indices = []
        for first in range(remaining, -1, -1):
            indices.extend((first,) + rest for rest in build(remaining - first, slots - 1))
        return indices

    return tuple(build(degree, nvars))


@lru_cache(maxsize=None)
def index_of(degree, nvars=4):
    '''Position of each multi-index in the canonical order'''
    return {alpha: position for position, alpha in enumerate(multi_indices(degree, nvars))}


@lru_cache(maxsize=None)
def multinomials(degree, nvars=4):
    '''m! / (alpha_0! ... alpha_k!) for every multi-index, canonical order'''
    alphas = np.array(multi_indices(degree, nvars))
    return factorial(degree) / np.prod(factorial(alphas), axis=1)


def raise_index(alpha, i, by=1):
    return alpha[:i] + (alpha[i] + by,) + alpha[i + 1:]


@lru_cache(maxsize=None)
def _casteljau_steps(degree, nvars):
    steps = []
    for r in range(degree, 0, -1):
        upper = index_of(r, nvars)
        table = np.array([
            [upper[raise_index(beta, i)] for i in range(nvars)]
            for beta in multi_indices(r - 1, nvars)
        ])
        steps.append(table)
    return tuple(steps)


@lru_cache(maxsize=None)
def _difference_table(degree, nvars, direction):
    '''Indices of beta + e_direction and beta + e_0 for |beta| = degree - 1'''
    upper = index_of(degree, nvars)
    lower = multi_indices(degree - 1, nvars)
    toward = np.array([upper[raise_index(beta, direction)] for beta in lower])
    origin = np.array([upper[raise_index(beta, 0)] for beta in lower])
    return toward, origin


@lru_cache(maxsize=None)
def _product_plan(p, q, nvars):
    target = index_of(p + q, nvars)
    left, right, into, weight = [], [], [], []
    wp, wq, wr = multinomials(p, nvars), multinomials(q, nvars), multinomials(p + q, nvars)
    for a, alpha in enumerate(multi_indices(p, nvars)):
        for b, beta in enumerate(multi_indices(q, nvars)):
            k = target[tuple(x + y for x, y in zip(alpha, beta))]
            left.append(a)
            right.append(b)
            into.append(k)
            weight.append(wp[a] * wq[b] / wr[k])
    return np.array(left), np.array(right), np.array(into), np.array(weight)


# EVALUATION

def normalize_barycentric(u, nvars=4):
    '''Validate barycentric coordinates and renormalize them to sum to one'''
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != nvars:
        raise ValueError(f'Barycentric coordinates need {nvars} components, got shape {u.shape}')
    if not np.all(np.isfinite(u)):
        raise ValueError('Barycentric coordinates must be finite')
    if np.any(u < -BARYCENTRIC_TOL):
        raise ValueError(f'Invalid barycentric coordinates: negative component {u.min():.3e}')
    sums = u.sum(axis=-1, keepdims=True)
    if np.any(np.abs(sums - 1.0) > BARYCENTRIC_TOL):
        raise ValueError('Invalid barycentric coordinates: components must sum to 1')
    u = np.clip(u, 0.0, None)
    return u / u.sum(axis=-1, keepdims=True)


def de_casteljau(coeffs, u, degree):
    '''Evaluate BB coefficients at barycentric points by repeated convex combination.

    coeffs has shape (N,) or (N, d); u has shape (..., nvars). Points are not
    validated here, callers normalise them first.
    '''
    coeffs = np.asarray(coeffs, dtype=float)
    u = np.asarray(u, dtype=float)
    nvars = u.shape[-1]
    scalar = coeffs.ndim == 1
    if scalar:
        coeffs = coeffs[:, None]

    batch = u.shape[:-1]
    points = u.reshape(-1, nvars)
    out = np.empty((points.shape[0], coeffs.shape[1]))
    for start in range(0, points.shape[0], EVALUATION_CHUNK):
        chunk = points[start:start + EVALUATION_CHUNK]
        level = np.broadcast_to(coeffs, (chunk.shape[0],) + coeffs.shape)
        for table in _casteljau_steps(degree, nvars):
            level = np.einsum('pi,pkid->pkd', chunk, level[:, table, :])
        out[start:start + EVALUATION_CHUNK] = level[:, 0, :]

    out = out.reshape(batch + (coeffs.shape[1],))
    return out[..., 0] if scalar else out


def bernstein_basis(u, degree, nvars=4):
    '''Values of every Bernstein polynomial B_alpha at u, shape (..., N)'''
    u = np.asarray(u, dtype=float)
    alphas = np.array(multi_indices(degree, nvars))
    return multinomials(degree, nvars) * np.prod(u[..., None, :] ** alphas, axis=-1)


def evaluate_direct(bb_map, u):
    '''Sum g_alpha B_alpha(u) term by term; reference for de Casteljau'''
    return bernstein_basis(u, bb_map.degree) @ bb_map.coeffs


# DOMAIN TYPES

@dataclass(frozen=True, eq=False)
class TrivariateMap:
    '''A cubic deformation map g of the domain tetrahedron into R^3'''
    coeffs: np.ndarray
    id: int = 0
    degree: int = DEGREE

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        expected = len(multi_indices(self.degree))
        if coeffs.shape != (expected, 3):
            raise ValueError(
                f'Map {self.id} needs {expected} coefficient triples, got shape {coeffs.shape}'
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError(f'Map {self.id} has non-finite coefficients')
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)

    def __str__(self):
        return f'Map {self.id} (degree {self.degree})'

    def coefficient(self, alpha):
        return self.coeffs[index_of(self.degree)[tuple(alpha)]]

    def with_coefficient(self, alpha, value):
        '''Copy of the map with one control point replaced'''
        coeffs = np.array(self.coeffs)
        coeffs[index_of(self.degree)[tuple(alpha)]] = value
        return TrivariateMap(coeffs, id=self.id, degree=self.degree)

    def translated(self, offset):
        return TrivariateMap(self.coeffs + np.asarray(offset, dtype=float), id=self.id, degree=self.degree)

    def rotated(self, rotation):
        '''Apply a 3x3 rotation to every control point'''
        return TrivariateMap(self.coeffs @ np.asarray(rotation, dtype=float).T, id=self.id, degree=self.degree)

    def precompute(self):
        '''Fill the cached z-range, second differences and offsets'''
        for name in ('z_range', 'second_differences', 'offset', 'rounding_guard'):
            getattr(self, name)
        return self

    @cached_property
    def z_range(self):
        return control_z_range(self)

    @cached_property
    def second_differences(self):
        from .bounds import second_differences
        return second_differences(self)

    @cached_property
    def offset(self):
        from .bounds import offset_vector
        return offset_vector(self.second_differences)

    @cached_property
    def rounding_guard(self):
        from .bounds import rounding_guard
        return rounding_guard(self)

    def tolerance(self, nu):
        from .bounds import scaled_tolerance
        return scaled_tolerance(self.offset, nu, guard=self.rounding_guard)


@dataclass(frozen=True, eq=False)
class TriPatch:
    '''A BB polynomial over a triangle; coefficients are points or scalars'''
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        expected = len(multi_indices(self.degree, 3))
        if coeffs.shape[0] != expected:
            raise ValueError(f'A degree {self.degree} patch needs {expected} coefficients, got {coeffs.shape[0]}')
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def is_scalar(self):
        return self.coeffs.ndim == 1

    def component(self, axis):
        return TriPatch(self.degree, self.coeffs[:, axis])

    def evaluate(self, t):
        return de_casteljau(self.coeffs, normalize_barycentric(t, nvars=3), self.degree)

    def is_strictly_one_signed(self):
        return bool(np.all(self.coeffs > 0.0) or np.all(self.coeffs < 0.0))


@dataclass(frozen=True)
class ValidationReport:
    map_id: int
    samples: int
    min_det: float
    max_det: float

    @property
    def ok(self):
        return self.min_det > 0.0


# OPERATIONS

def evaluate(bb_map, u):
    '''g(u) for one barycentric point (shape (4,)) or a batch (shape (..., 4))'''
    return de_casteljau(bb_map.coeffs, normalize_barycentric(u), bb_map.degree)


def control_z_range(bb_map):
    z = bb_map.coeffs[:, 2]
    return float(z.min()), float(z.max())


def face_patch(bb_map, face):
    '''Restriction of g to the face u_face = 0 as a bivariate patch'''
    if face not in (0, 1, 2, 3):
        raise ValueError(f'Face index must be 0..3, got {face}')
    positions = index_of(bb_map.degree)
    rows = [
        positions[beta[:face] + (0,) + beta[face:]]
        for beta in multi_indices(bb_map.degree, 3)
    ]
    return TriPatch(bb_map.degree, bb_map.coeffs[rows])


def embed_face_point(face, t):
    '''Lift bivariate barycentric points on a face back into the tetrahedron'''
    t = np.asarray(t, dtype=float)
    return np.insert(t, face, 0.0, axis=-1)


def patch_direction_derivative(patch, direction):
    '''Derivative toward vertex `direction` from vertex 0; the degree drops by one'''
    if patch.degree < 1:
        raise ValueError('Cannot differentiate a degree 0 patch')
    if direction not in (1, 2):
        raise ValueError(f'Direction must be 1 or 2, got {direction}')
    toward, origin = _difference_table(patch.degree, 3, direction)
    return TriPatch(patch.degree - 1, patch.degree * (patch.coeffs[toward] - patch.coeffs[origin]))


def bb_product(f, g):
    '''BB coefficients of the pointwise product of two scalar patches'''
    if not (f.is_scalar and g.is_scalar):
        raise ValueError('bb_product needs scalar-valued patches')
    left, right, into, weight = _product_plan(f.degree, g.degree, 3)
    coeffs = np.zeros(len(multi_indices(f.degree + g.degree, 3)))
    np.add.at(coeffs, into, weight * f.coeffs[left] * g.coeffs[right])
    return TriPatch(f.degree + g.degree, coeffs)


def jacobian(bb_map, u):
    '''Matrix of partials dg_a/dx_i, x = (u_1, u_2, u_3); shape (..., 3, 3)'''
    u = normalize_barycentric(u)
    columns = []
    for direction in (1, 2, 3):
        toward, origin = _difference_table(bb_map.degree, 4, direction)
        derivative = bb_map.degree * (bb_map.coeffs[toward] - bb_map.coeffs[origin])
        columns.append(de_casteljau(derivative, u, bb_map.degree - 1))
    return np.stack(columns, axis=-1)


def jacobian_samples(samples):
    '''Deterministic low-discrepancy barycentric points in the tetrahedron'''
    if samples < 1:
        raise ValueError('Need at least one sample')
    cube = qmc.Halton(d=3, scramble=False).random(samples)
    cube.sort(axis=1)
    return np.column_stack([
        1.0 - cube[:, 2],
        cube[:, 0],
        cube[:, 1] - cube[:, 0],
        cube[:, 2] - cube[:, 1],
    ])


def validate_map(bb_map, samples):
    '''Report the sampled range of det(grad g); flags, never rejects'''
    u = jacobian_samples(samples)
    det = np.linalg.det(jacobian(bb_map, u))
    report = ValidationReport(bb_map.id, samples, float(det.min()), float(det.max()))
    if not report.ok:
        logger.warning('%s has a non-positive sampled Jacobian (min %.6g)', bb_map, report.min_det)
    return report


def map_from_function(function, map_id=0):
    '''Exact cubic BB coefficients of a polynomial of degree <= 3 given as u -> point.

    The function is sampled at the 20 domain points alpha/3 and the Bernstein
    interpolation system is solved.
    '''
    points = np.array(multi_indices(DEGREE), dtype=float) / DEGREE
    values = np.asarray(function(points), dtype=float)
    coeffs = np.linalg.solve(bernstein_basis(points, DEGREE), values)
    return TrivariateMap(coeffs, id=map_id)
