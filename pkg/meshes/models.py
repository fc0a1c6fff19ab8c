from django.core.exceptions import ValidationError
from django.db import models, transaction
from django.db.models import Max, Min

from .bbform import TrivariateMap
from .loader import parse_mesh


class Mesh(models.Model):
    '''A stack of cubic deformation maps imported from one mesh document'''
    name = models.CharField(max_length=200, unique=True)
    description = models.TextField(blank=True)
    version = models.PositiveSmallIntegerField(default=1)
    degree = models.PositiveSmallIntegerField(default=3)
    rotation = models.JSONField(null=True, blank=True, help_text='Row-major 3x3 rotation applied at load')
    document = models.TextField(help_text='Mesh JSON as uploaded')
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['name']
        verbose_name = 'Mesh'
        verbose_name_plural = 'Meshes'

    def __str__(self):
        return self.name

    def clean(self):
        if self.document:
            parse_mesh(self.document)

    @property
    def map_count(self):
        return self.maps.count()

    @property
    def flagged_count(self):
        return self.maps.filter(jacobian_ok=False).count()

    @property
    def z_range(self):
        bounds = self.maps.aggregate(low=Min('z_min'), high=Max('z_max'))
        return bounds['low'], bounds['high']

    def to_maps(self):
        '''Numeric maps in ascending id order'''
        return [deformation.to_trivariate_map() for deformation in self.maps.order_by('map_id')]

    @classmethod
    @transaction.atomic
    def import_document(cls, name, text, description=''):
        document = parse_mesh(text)
        mesh = cls.objects.create(
            name=name,
            description=description,
            version=document.version,
            degree=document.degree,
            rotation=document.rotation.ravel().tolist() if document.rotation is not None else None,
            document=text,
        )
        for bb_map, report in zip(document.maps, document.reports):
            mu_x, mu_y, mu_z = bb_map.offset.mu.tolist()
            z_min, z_max = bb_map.z_range
            DeformationMap.objects.create(
                mesh=mesh,
                map_id=bb_map.id,
                coefficients=bb_map.coeffs.tolist(),
                z_min=z_min,
                z_max=z_max,
                mu_x=mu_x,
                mu_y=mu_y,
                mu_z=mu_z,
                jacobian_min=report.min_det,
                jacobian_max=report.max_det,
                jacobian_ok=report.ok,
            )
        return mesh


class DeformationMap(models.Model):
    '''One map of a mesh, stored after the load-time rotation'''
    mesh = models.ForeignKey(Mesh, on_delete=models.CASCADE, related_name='maps')
    map_id = models.IntegerField()
    coefficients = models.JSONField(help_text='20 [x, y, z] triples, canonical order')
    z_min = models.FloatField()
    z_max = models.FloatField()
    mu_x = models.FloatField(default=0.0)
    mu_y = models.FloatField(default=0.0)
    mu_z = models.FloatField(default=0.0)
    jacobian_min = models.FloatField()
    jacobian_max = models.FloatField()
    jacobian_ok = models.BooleanField(default=True)

    class Meta:
        ordering = ['mesh', 'map_id']
        unique_together = ['mesh', 'map_id']

    def __str__(self):
        return f'{self.mesh} - map {self.map_id}'

    def clean(self):
        if self.z_min > self.z_max:
            raise ValidationError('z_min cannot exceed z_max')

    def to_trivariate_map(self):
        return TrivariateMap(self.coefficients, id=self.map_id)
