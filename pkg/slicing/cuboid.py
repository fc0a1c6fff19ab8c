'''Image cuboids: the 8 mapped corners of a box and their test against z = z0'''
from dataclasses import dataclass

import numpy as np

from meshes.bbform import evaluate

# Corner pairs differing in one lattice direction
CUBOID_EDGES = np.array([
    (corner, corner | bit)
    for corner in range(8)
    for bit in (4, 2, 1)
    if not corner & bit
])


@dataclass(frozen=True)
class SlicePlane:
    '''The plane z = z0; general orientations are rotated onto z at load'''
    z0: float
    index: int = 0

    normal = (0.0, 0.0, 1.0)

    def __str__(self):
        return f'plane {self.index} (z={self.z0:g})'


@dataclass(frozen=True, eq=False)
class Cuboid:
    verts: np.ndarray
    tol: object = None

    @property
    def band(self):
        '''Inflation along z used by the plane test'''
        if self.tol is None:
            return 0.0
        return float(self.tol.band[2])

    @property
    def z_span(self):
        z = self.verts[:, 2]
        return float(z.min()), float(z.max())


def plane_hits(verts, band, z0):
    '''Vectorized interval test for cuboids stacked along the first axis'''
    z = verts[..., 2]
    return (z.min(axis=-1) - band <= z0) & (z0 <= z.max(axis=-1) + band)


def map_box(bb_map, corners, tol=None):
    return Cuboid(evaluate(bb_map, corners), tol)


def intersects_plane(cuboid, plane):
    return bool(plane_hits(cuboid.verts, cuboid.band, plane.z0))


def edge_crossings(cuboid, plane):
    '''(x, y) of every point where a cuboid edge meets the plane.

    An edge lying in the plane contributes both endpoints; a vertex on the
    plane shows up once per incident edge.
    '''
    start = cuboid.verts[CUBOID_EDGES[:, 0]]
    end = cuboid.verts[CUBOID_EDGES[:, 1]]
    below = start[:, 2] - plane.z0
    above = end[:, 2] - plane.z0
    flat = (below == 0.0) & (above == 0.0)
    crossing = (below * above <= 0.0) & ~flat

    t = below[crossing] / (below[crossing] - above[crossing])
    points = start[crossing, :2] + t[:, None] * (end[crossing, :2] - start[crossing, :2])
    return np.concatenate([points, start[flat, :2], end[flat, :2]])


def intersection_center(cuboid, plane):
    if not intersects_plane(cuboid, plane):
        raise ValueError(f'Cuboid does not meet {plane}')
    points = edge_crossings(cuboid, plane)
    if len(points) == 0:
        return cuboid.verts[:, :2].mean(axis=0)
    return points.mean(axis=0)


def intersection_polygon(cuboid, plane):
    '''Crossing points sorted by angle about the center, duplicates dropped.

    A tolerance-only hit has no crossings; the vertices within the band stand
    in for it.
    '''
    points = edge_crossings(cuboid, plane)
    if len(points) == 0:
        near = np.abs(cuboid.verts[:, 2] - plane.z0) <= cuboid.band
        points = cuboid.verts[near, :2] if near.any() else cuboid.verts[:, :2]
    points = np.unique(points, axis=0)
    center = points.mean(axis=0)
    angles = np.arctan2(points[:, 1] - center[1], points[:, 0] - center[0])
    return points[np.argsort(angles, kind='stable')]
