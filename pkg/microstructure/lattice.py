'''Beam-lattice cell templates placed into the boxes of a paving.

Templates are beam centerlines on the unit cube; a box receives the template
shifted to its lattice cube and cut back to the domain (a + b + c <= n).
'''
import logging
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from slicing.paving import lattice_to_barycentric

logger = logging.getLogger(__name__)

CLIP_TOL = 1e-12


def _cube_edges():
    corners = list(product((0.0, 1.0), repeat=3))
    return [(a, b) for a, b in combinations(corners, 2) if sum(x != y for x, y in zip(a, b)) == 1]


def _face_diagonals():
    diagonals = []
    for axis in range(3):
        for level in (0.0, 1.0):
            square = [c for c in product((0.0, 1.0), repeat=3) if c[axis] == level]
            diagonals.extend(
                (a, b) for a, b in combinations(square, 2)
                if sum(x != y for x, y in zip(a, b)) == 2
            )
    return diagonals


def _body_diagonals():
    return [
        ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
        ((1.0, 0.0, 0.0), (0.0, 1.0, 1.0)),
        ((0.0, 1.0, 0.0), (1.0, 0.0, 1.0)),
        ((0.0, 0.0, 1.0), (1.0, 1.0, 0.0)),
    ]


TEMPLATES = {
    'edge-frame': np.array(_cube_edges()),
    'octet': np.array(_cube_edges() + _face_diagonals()),
    'diagonal-cross': np.array(_body_diagonals()),
}


@dataclass(frozen=True)
class CellTemplate:
    name: str = 'edge-frame'
    radius_fraction: float = 0.1
    samples_per_beam: int = 5

    def __post_init__(self):
        if self.name not in TEMPLATES:
            raise ValueError(f'Unknown template {self.name!r}; choose from {", ".join(TEMPLATES)}')
        if not 0.0 < self.radius_fraction < 0.5:
            raise ValueError('Beam radius fraction must lie in (0, 0.5)')
        if self.samples_per_beam < 2:
            raise ValueError('Need at least 2 samples per beam')

    def __str__(self):
        return self.name

    @property
    def beams(self):
        '''Beam endpoints on the unit cube, shape (m, 2, 3)'''
        return TEMPLATES[self.name]


def clip_to_domain(start, end, n):
    '''Part of a lattice segment with coordinate sum <= n, or None'''
    low, high = start.sum(), end.sum()
    if low > n + CLIP_TOL and high > n + CLIP_TOL:
        return None
    if low > n + CLIP_TOL or high > n + CLIP_TOL:
        t = (n - low) / (high - low)
        cut = start + t * (end - start)
        start, end = (cut, end) if low > n + CLIP_TOL else (start, cut)
    if np.allclose(start, end, rtol=0.0, atol=CLIP_TOL):
        return None
    return start, end


def generate_cell(paving, box, template):
    '''Beam centerlines of one box as barycentric segment endpoints, shape (m, 2, 4)'''
    paving.require_valid(box)
    base = np.asarray(box, dtype=float)
    kept = []
    for start, end in template.beams:
        clipped = clip_to_domain(base + start, base + end, paving.n)
        if clipped is not None:
            kept.append(clipped)
    if not kept:
        return np.empty((0, 2, 4))
    return lattice_to_barycentric(np.array(kept), paving.n)
