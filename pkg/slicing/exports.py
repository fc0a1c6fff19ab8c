'''Activation log, stats tables and plane files'''
import csv
import json
import logging
from collections import defaultdict

import numpy as np

logger = logging.getLogger(__name__)

LOG_VERSION = 1

STATS_COLUMNS = ['plane', 'map', 'n', 'time_s', 'boxes_in_intersection', 'total_boxes', 'intersect_total']
PLANE_COLUMNS = ['plane', 'z', 'active_maps', 'activations', 'cuboid_tests', 'wall_time_s']


def _points(array):
    return [[float(x), float(y)] for x, y in np.asarray(array, dtype=float).reshape(-1, 2)]


class ActivationLog:
    '''Sink collecting tiles grouped by plane, then map, in arrival order'''

    def __init__(self):
        self.planes = defaultdict(lambda: defaultdict(list))
        self.heights = {}
        self._seen = set()

    def __call__(self, tile):
        key = (tile.plane_index, tile.map_id, tuple(tile.box))
        if key in self._seen:
            raise ValueError(f'Box {tile.box} of map {tile.map_id} emitted twice on plane {tile.plane_index}')
        self._seen.add(key)
        self.planes[tile.plane_index][tile.map_id].append(tile)

    def set_planes(self, planes):
        self.heights = {plane.index: plane.z0 for plane in planes}

    def tiles_for(self, plane_index):
        return [tile for map_id in sorted(self.planes[plane_index]) for tile in self.planes[plane_index][map_id]]

    def count(self, plane_index):
        return sum(len(records) for records in self.planes[plane_index].values())

    def to_dict(self):
        planes = []
        for index in sorted(set(self.heights) | set(self.planes)):
            maps = []
            for map_id in sorted(self.planes[index]):
                maps.append({
                    'map': map_id,
                    'activations': [
                        {
                            'box': str(tile.box),
                            'order': tile.order,
                            'parent': str(tile.parent) if tile.parent is not None else None,
                            'center': _points(tile.center)[0] if tile.center is not None else None,
                            'polygon': _points(tile.polygon),
                            'segments': [_points(segment) for segment in tile.segments],
                        }
                        for tile in self.planes[index][map_id]
                    ],
                })
            planes.append({'plane': index, 'z': self.heights.get(index), 'maps': maps})
        return {'version': LOG_VERSION, 'planes': planes}

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def write(self, path):
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(self.dumps())
            handle.write('\n')


def stats_rows(stats):
    for pair in stats.pairs:
        yield [
            pair.plane,
            pair.map_id,
            pair.n,
            f'{pair.time_s:.6f}',
            pair.boxes_in_intersection,
            pair.total_boxes,
            f'{pair.ratio:.4g}',
        ]


def write_stats(stats, path):
    '''Per map-plane table: n, time, boxes in intersection, total boxes, their ratio'''
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(STATS_COLUMNS)
        writer.writerows(stats_rows(stats))


def plane_rows(stats):
    for plane in stats.planes:
        yield [plane.index, repr(plane.z), plane.active_maps, plane.activations, plane.cuboid_tests, f'{plane.wall_time:.6f}']


def write_plane_stats(stats, path):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(PLANE_COLUMNS)
        writer.writerows(plane_rows(stats))


def parse_planes(text):
    '''Plane heights separated by whitespace or commas; # starts a comment'''
    values = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        for token in line.replace(',', ' ').split():
            try:
                values.append(float(token))
            except ValueError:
                raise ValueError(f'Line {number}: {token!r} is not a number')
    return values
