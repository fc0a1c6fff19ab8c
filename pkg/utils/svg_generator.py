import logging
from collections import defaultdict

import numpy as np
from matplotlib import colormaps
from matplotlib.colors import to_hex

logger = logging.getLogger(__name__)

COLOR_MODES = ('order', 'map')


def _fmt(value):
    return f'{value:.9g}'


def _points(array):
    return ' '.join(f'{_fmt(x)},{_fmt(-y)}' for x, y in np.asarray(array, dtype=float).reshape(-1, 2))


class SliceSVG:
    '''One plane of tiles as an SVG document.

    Tiles are drawn in the order given (maps by id, then traversal order). With
    color_mode='order' each map runs dark to light along its traversal; with
    'map' every map gets a single colour. The y axis is flipped so the drawing
    matches the slice plane seen from above.
    '''

    def __init__(self, tiles, color_mode='order', draw_segments=True, title=''):
        if color_mode not in COLOR_MODES:
            raise ValueError(f'Unknown colour mode {color_mode!r}; choose from {", ".join(COLOR_MODES)}')
        self.tiles = list(tiles)
        self.color_mode = color_mode
        self.draw_segments = draw_segments
        self.title = title
        self.elements = []

    def view_box(self):
        '''(x, y, width, height) of the flipped bounding rectangle of every tile'''
        points = [np.asarray(tile.polygon, dtype=float).reshape(-1, 2) for tile in self.tiles]
        points += [np.asarray(segment, dtype=float).reshape(-1, 2) for tile in self.tiles for segment in tile.segments]
        points = [p for p in points if len(p)]
        if not points:
            return 0.0, 0.0, 1.0, 1.0
        stacked = np.vstack(points)
        low = stacked.min(axis=0)
        high = stacked.max(axis=0)
        size = np.maximum(high - low, 1e-9)
        return float(low[0]), float(-high[1]), float(size[0]), float(size[1])

    def fill_colors(self):
        colors = []
        if self.color_mode == 'map':
            palette = colormaps['tab20']
            rank = {map_id: i for i, map_id in enumerate(sorted({tile.map_id for tile in self.tiles}))}
            for tile in self.tiles:
                colors.append(to_hex(palette(rank[tile.map_id] % palette.N)))
            return colors

        palette = colormaps['viridis']
        last = defaultdict(int)
        for tile in self.tiles:
            last[tile.map_id] = max(last[tile.map_id], tile.order)
        for tile in self.tiles:
            span = last[tile.map_id]
            colors.append(to_hex(palette(tile.order / span if span else 0.0)))
        return colors

    def build(self):
        x, y, width, height = self.view_box()
        stroke = 0.002 * max(width, height)
        self.elements = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'viewBox="{_fmt(x)} {_fmt(y)} {_fmt(width)} {_fmt(height)}">',
        ]
        if self.title:
            self.elements.append(f'<title>{self.title}</title>')

        self.elements.append(f'<g id="tiles" stroke="#333333" stroke-width="{_fmt(stroke / 2)}">')
        for tile, color in zip(self.tiles, self.fill_colors()):
            self.elements.append(
                f'<polygon data-map="{tile.map_id}" data-box="{tile.box}" data-order="{tile.order}" '
                f'fill="{color}" points="{_points(tile.polygon)}"/>'
            )
        self.elements.append('</g>')

        if self.draw_segments:
            self.elements.append(f'<g id="microstructure" stroke="#d62728" stroke-width="{_fmt(stroke)}" fill="none">')
            for tile in self.tiles:
                for segment in tile.segments:
                    (x1, y1), (x2, y2) = np.asarray(segment, dtype=float)
                    self.elements.append(
                        f'<line x1="{_fmt(x1)}" y1="{_fmt(-y1)}" x2="{_fmt(x2)}" y2="{_fmt(-y2)}"/>'
                    )
            self.elements.append('</g>')

        self.elements.append('</svg>')
        return self

    def render(self):
        if not self.elements:
            self.build()
        return '\n'.join(self.elements) + '\n'

    def save(self, path):
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(self.render())
        logger.debug('Wrote %d tiles to %s', len(self.tiles), path)
        return path


def write_svg(tiles, path, color_mode='order', draw_segments=True, title=''):
    return SliceSVG(tiles, color_mode, draw_segments, title).save(path)
