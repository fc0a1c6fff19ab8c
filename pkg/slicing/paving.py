'''Box partition of the unit tetrahedron at resolution n = 2**nu.

A box (i, j, k) is the lattice cube [i, i+1] x [j, j+1] x [k, k+1] cut by the
plane a + b + c = n, where lattice point (a, b, c) is the barycentric point
(1 - (a+b+c)/n, a/n, b/n, c/n). Layer i grows toward the u_1 vertex.
'''
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import NamedTuple

import numpy as np

# (delta_i, delta_j, delta_k) in binary order 000, 001, ..., 111
CORNER_OFFSETS = np.array(list(product((0, 1), repeat=3)), dtype=float)

NEIGHBOR_OFFSETS = (
    (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
    (1, -1, 0), (-1, 1, 0), (1, 0, -1), (-1, 0, 1), (0, 1, -1), (0, -1, 1),
)

FACES = (0, 1, 2, 3)


class BoxId(NamedTuple):
    layer: int
    row: int
    col: int

    def __str__(self):
        return f'{self.layer},{self.row},{self.col}'

    @classmethod
    def parse(cls, text):
        layer, row, col = (int(part) for part in text.split(','))
        return cls(layer, row, col)


def total_boxes(n):
    if n < 1:
        raise ValueError(f'Resolution must be at least 1, got {n}')
    return n * (n + 1) * (n + 2) // 6


def lattice_to_barycentric(points, n):
    points = np.asarray(points, dtype=float) / n
    return np.concatenate([1.0 - points.sum(axis=-1, keepdims=True), points], axis=-1)


def clamp_corners(bases, n):
    '''Lattice corners of boxes, pulled onto a + b + c = n along the ray from the base corner'''
    bases = np.asarray(bases, dtype=float).reshape(-1, 1, 3)
    corners = bases + CORNER_OFFSETS
    base_sum = bases.sum(axis=-1)
    corner_sum = corners.sum(axis=-1)
    excess = corner_sum > n
    spread = np.where(excess, corner_sum - base_sum, 1.0)
    scale = np.where(excess, (n - base_sum) / spread, 1.0)
    return bases + scale[..., None] * CORNER_OFFSETS


@dataclass(frozen=True)
class Paving:
    n: int
    nu: int

    def __post_init__(self):
        if self.nu < 0 or self.n != 2 ** self.nu:
            raise ValueError(f'Resolution must be n = 2**nu, got n={self.n}, nu={self.nu}')

    @classmethod
    def at_resolution(cls, nu):
        if nu < 0:
            raise ValueError('Resolution exponent must be non-negative')
        return cls(2 ** nu, nu)

    def __str__(self):
        return f'Paving n={self.n}'

    @property
    def total(self):
        return total_boxes(self.n)

    @property
    def edge_length(self):
        return 1.0 / self.n

    def is_valid_box(self, box):
        i, j, k = box
        return i >= 0 and j >= 0 and k >= 0 and i + j + k <= self.n - 1

    def require_valid(self, box):
        if not self.is_valid_box(box):
            raise ValueError(f'Box {tuple(box)} is not valid at resolution n={self.n}')

    def boxes(self):
        '''Every valid box, lexicographic order'''
        n = self.n
        for i in range(n):
            for j in range(n - i):
                for k in range(n - i - j):
                    yield BoxId(i, j, k)

    def box_array(self):
        return np.array(list(self.boxes()), dtype=int)

    def box_corners(self, box):
        '''The 8 corners of a box as barycentric points, shape (8, 4)'''
        self.require_valid(box)
        return self.corners_of([box])[0]

    def corners_of(self, boxes):
        '''Corners of many valid boxes at once, shape (m, 8, 4)'''
        return lattice_to_barycentric(clamp_corners(boxes, self.n), self.n)

    def neighbors(self, box):
        self.require_valid(box)
        i, j, k = box
        found = []
        for di, dj, dk in NEIGHBOR_OFFSETS:
            candidate = BoxId(i + di, j + dj, k + dk)
            if self.is_valid_box(candidate):
                found.append(candidate)
        return found

    @cached_property
    def _edge_boxes(self):
        n = self.n
        chains = (
            [(t, 0, 0) for t in range(n)],
            [(0, t, 0) for t in range(n)],
            [(0, 0, t) for t in range(n)],
            [(t, n - 1 - t, 0) for t in range(n)],
            [(t, 0, n - 1 - t) for t in range(n)],
            [(0, t, n - 1 - t) for t in range(n)],
        )
        ordered = dict.fromkeys(BoxId(*box) for chain in chains for box in chain)
        return tuple(ordered)

    def edge_boxes(self):
        '''Boxes along the 6 edges of the tetrahedron, first occurrence kept'''
        return list(self._edge_boxes)

    def face_boxes(self, face):
        '''Boxes on a face, row-major: face c holds the boxes touching u_c = 0'''
        if face not in FACES:
            raise ValueError(f'Face index must be 0..3, got {face}')
        n = self.n
        if face == 0:
            return [BoxId(i, j, n - 1 - i - j) for i in range(n) for j in range(n - i)]
        if face == 1:
            return [BoxId(0, j, k) for j in range(n) for k in range(n - j)]
        if face == 2:
            return [BoxId(i, 0, k) for i in range(n) for k in range(n - i)]
        return [BoxId(i, j, 0) for i in range(n) for j in range(n - i)]

    def locate_box(self, u):
        '''A box whose region contains the barycentric point u'''
        u = np.asarray(u, dtype=float)
        lattice = np.clip(u[1:] * self.n, 0.0, self.n)
        cell = [int(v) for v in np.floor(lattice)]
        while sum(cell) > self.n - 1:
            largest = max(range(3), key=lambda axis: cell[axis])
            cell[largest] -= 1
        return BoxId(*cell)

    def contains(self, box, u, strict=False):
        '''Whether u lies in the box region (cube cut by the slant plane)'''
        lattice = np.asarray(u, dtype=float)[1:] * self.n
        low = np.asarray(box, dtype=float)
        if strict:
            return bool(np.all(lattice > low) and np.all(lattice < low + 1) and lattice.sum() < self.n)
        eps = 1e-9
        return bool(np.all(lattice >= low - eps) and np.all(lattice <= low + 1 + eps) and lattice.sum() <= self.n + eps)
