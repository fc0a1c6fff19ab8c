'''Per-axis offsets bounding how far a map strays from its linear interpolant.

The offset mu shrinks by a factor four with every dyadic refinement of the
domain, so a box at resolution n = 2**nu is tested with mu / 4**nu.
'''
import logging
from dataclasses import dataclass
from itertools import product

import numpy as np
from django.conf import settings

from .bbform import index_of

logger = logging.getLogger(__name__)

# m (m - 1) for the cubic maps handled here
SECOND_DERIVATIVE_FACTOR = 6.0

# Directions 1..3 point at the vertices of u_1..u_3; vertex 4 is the origin vertex u_0
DIRECTIONS = (1, 2, 3)
VERTICES = (1, 2, 3, 4)


def _unit(k):
    position = 0 if k == 4 else k
    return tuple(1 if p == position else 0 for p in range(4))


def _sum(*alphas):
    return tuple(int(sum(parts)) for parts in zip(*alphas))


def _scaled(alpha, factor):
    return tuple(factor * a for a in alpha)


@dataclass(frozen=True)
class SecondDifferences:
    '''Second differences of the control net, keyed by (i, j, k).

    `entries` holds the offset stencil anchored at vertex k (k not in {i, j});
    `cartesian` holds the second-derivative coefficients of the Cartesian
    partials d2g/dx_i dx_j, one per anchor vertex k = 1..4. Both are stored for
    i <= j and i > j alike.
    '''
    entries: dict
    cartesian: dict

    def candidates(self, i, j, widened):
        values = [v for (a, b, _), v in self.entries.items() if (a, b) == (i, j)]
        if widened:
            values.extend(v for (a, b, _), v in self.cartesian.items() if (a, b) == (i, j))
        return np.array(values)

    def max_abs(self, i, j, widened=False):
        '''Per-axis maximum of |d_ijk| over the admissible anchors'''
        return np.abs(self.candidates(i, j, widened)).max(axis=0)


@dataclass(frozen=True)
class OffsetVector:
    mu: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        if mu.shape != (3,) or np.any(mu < 0.0):
            raise ValueError('Offsets must be three non-negative numbers')
        mu.setflags(write=False)
        object.__setattr__(self, 'mu', mu)

    @property
    def is_zero(self):
        return not np.any(self.mu)


@dataclass(frozen=True)
class Tolerance:
    '''Plane-test inflation at one resolution; `band` is what the test uses'''
    tol: np.ndarray
    nu: int
    guard: np.ndarray

    @property
    def band(self):
        return self.tol + self.guard


def stencil(i, j, k):
    '''The four multi-indices of d_ijk with their signs'''
    ek, ei, ej = _unit(k), _unit(i), _unit(j)
    return (
        (_scaled(ek, 3), 1.0),
        (_sum(_scaled(ek, 2), ei), -1.0),
        (_sum(_scaled(ek, 2), ej), -1.0),
        (_sum(ek, ei, ej), 1.0),
    )


def cartesian_stencil(i, j, k):
    '''Coefficient of d2g/dx_i dx_j at vertex k, up to the factor m (m - 1)'''
    ek, ei, ej, e0 = _unit(k), _unit(i), _unit(j), _unit(4)
    return (
        (_sum(ek, ei, ej), 1.0),
        (_sum(ek, ei, e0), -1.0),
        (_sum(ek, ej, e0), -1.0),
        (_sum(ek, e0, e0), 1.0),
    )


def _apply(bb_map, terms):
    positions = index_of(bb_map.degree)
    return sum(sign * bb_map.coeffs[positions[alpha]] for alpha, sign in terms)


def second_differences(bb_map):
    if bb_map.degree != 3:
        raise ValueError('Second differences are defined for cubic maps only')
    entries, cartesian = {}, {}
    for i, j in product(DIRECTIONS, repeat=2):
        for k in VERTICES:
            if k not in (i, j):
                entries[(i, j, k)] = _apply(bb_map, stencil(i, j, k))
            cartesian[(i, j, k)] = _apply(bb_map, cartesian_stencil(i, j, k))
    return SecondDifferences(entries, cartesian)


def offset_vector(sd, lengths=(1.0, 1.0, 1.0), widened=None):
    '''mu^c = 6/8 * sum over the 9 ordered (i, j) of l_i l_j max_k |d^c_ijk|'''
    lengths = np.asarray(lengths, dtype=float)
    if lengths.shape != (3,) or np.any(lengths <= 0.0):
        raise ValueError('Edge lengths must be three positive numbers')
    if widened is None:
        widened = settings.SLICER['WIDENED_STENCIL']

    mu = np.zeros(3)
    for i, j in product(DIRECTIONS, repeat=2):
        mu += lengths[i - 1] * lengths[j - 1] * sd.max_abs(i, j, widened)
    return OffsetVector(SECOND_DERIVATIVE_FACTOR / 8.0 * mu)


def scaled_tolerance(mu, nu, guard=None):
    if nu < 0:
        raise ValueError('Resolution exponent must be non-negative')
    values = mu.mu if isinstance(mu, OffsetVector) else np.asarray(mu, dtype=float)
    if guard is None:
        guard = np.zeros(3)
    return Tolerance(values / 4.0 ** nu, nu, np.asarray(guard, dtype=float))


def rounding_guard(bb_map):
    '''A few ulps of the largest coefficient per axis'''
    ulps = settings.SLICER['ROUNDING_GUARD_ULPS']
    return ulps * np.finfo(float).eps * np.abs(bb_map.coeffs).max(axis=0)
