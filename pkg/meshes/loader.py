'''Mesh documents: JSON files holding a stack of cubic maps.

    {"version": 1, "degree": 3, "rotation": [9 numbers, optional],
     "maps": [{"id": 0, "coefficients": [[x, y, z], ... 20 triples]}, ...]}

Coefficients follow the canonical multi-index order. A rotation, when present,
is applied to every control point at load time so the sweep axis is always z.
'''
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from .bbform import DEGREE, TrivariateMap, multi_indices, validate_map

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
ORTHONORMAL_TOL = 1e-9


@dataclass
class MeshDocument:
    maps: list
    rotation: np.ndarray = None
    reports: list = field(default_factory=list)
    version: int = FORMAT_VERSION
    degree: int = DEGREE

    @property
    def flagged(self):
        return [report for report in self.reports if not report.ok]


def _check_rotation(raw):
    try:
        rotation = np.array(raw, dtype=float).reshape(3, 3)
    except (TypeError, ValueError):
        raise ValidationError('Rotation must be 9 numbers (3x3, row-major)')
    if not np.all(np.isfinite(rotation)):
        raise ValidationError('Rotation must be finite')
    if np.abs(rotation @ rotation.T - np.eye(3)).max() > ORTHONORMAL_TOL:
        raise ValidationError('Rotation is not orthonormal')
    if np.linalg.det(rotation) < 0.0:
        raise ValidationError('Rotation is a reflection')
    return rotation


def _read_map(position, entry):
    if not isinstance(entry, dict):
        raise ValidationError(f'Map at index {position} must be an object')
    map_id = entry.get('id')
    if isinstance(map_id, bool) or not isinstance(map_id, int):
        raise ValidationError(f'Map at index {position} needs an integer id')
    coefficients = entry.get('coefficients')
    expected = len(multi_indices(DEGREE))
    if not isinstance(coefficients, list) or len(coefficients) != expected:
        count = len(coefficients) if isinstance(coefficients, list) else 0
        raise ValidationError(
            f'Map at index {position} (id {map_id}) has {count} coefficients, expected {expected}'
        )
    try:
        return TrivariateMap(coefficients, id=map_id)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f'Map at index {position} (id {map_id}): {exc}')


def parse_mesh(text, samples=None):
    '''Parse and validate a mesh document; offsets are computed after rotation'''
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f'Mesh is not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})')

    if not isinstance(raw, dict):
        raise ValidationError('Mesh document must be a JSON object')
    if raw.get('version') != FORMAT_VERSION:
        raise ValidationError(f'Unsupported mesh version {raw.get("version")!r}')
    if raw.get('degree') != DEGREE:
        raise ValidationError(f'Only degree {DEGREE} maps are supported, got {raw.get("degree")!r}')
    entries = raw.get('maps')
    if not isinstance(entries, list) or not entries:
        raise ValidationError('Mesh has no maps')

    maps = [_read_map(position, entry) for position, entry in enumerate(entries)]
    ids = [bb_map.id for bb_map in maps]
    if len(set(ids)) != len(ids):
        raise ValidationError('Map ids must be unique')

    rotation = None
    if raw.get('rotation') is not None:
        rotation = _check_rotation(raw['rotation'])
        maps = [bb_map.rotated(rotation) for bb_map in maps]

    if samples is None:
        samples = settings.SLICER['VALIDATION_SAMPLES']
    reports = []
    for bb_map in maps:
        bb_map.precompute()
        reports.append(validate_map(bb_map, samples))

    document = MeshDocument(maps, rotation, reports)
    logger.info('Loaded mesh with %d maps (%d flagged)', len(maps), len(document.flagged))
    return document


def load_mesh(path, samples=None):
    '''Read a mesh file; OSError is left to the caller'''
    with open(path, encoding='utf-8') as handle:
        try:
            text = handle.read()
        except UnicodeDecodeError:
            raise ValidationError('Mesh file must be UTF-8 text')
    return parse_mesh(text, samples)


def dump_mesh(maps, rotation=None):
    document = {
        'version': FORMAT_VERSION,
        'degree': DEGREE,
        'maps': [
            {'id': bb_map.id, 'coefficients': bb_map.coeffs.tolist()}
            for bb_map in maps
        ],
    }
    if rotation is not None:
        document['rotation'] = np.asarray(rotation, dtype=float).ravel().tolist()
    return json.dumps(document, indent=1)


def write_mesh(maps, path, rotation=None):
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(dump_mesh(maps, rotation))
        handle.write('\n')
