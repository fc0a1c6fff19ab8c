import logging

from django.core.exceptions import ValidationError
from django.db import models, transaction
from django.utils import timezone

from meshes.models import Mesh
from microstructure.lattice import TEMPLATES
from .runner import SliceJob
from .sweep import PlaneStack
from .traversal import LOOP_MODES

logger = logging.getLogger(__name__)


class SliceRun(models.Model):
    '''A sweep of one mesh against a plane stack, with its per-plane statistics'''
    STATUS_CHOICES = [
        ('PENDING', 'Pending'),
        ('COMPLETED', 'Completed'),
        ('FAILED', 'Failed'),
    ]
    LOOP_MODE_CHOICES = [(mode, mode) for mode in LOOP_MODES]
    TEMPLATE_CHOICES = [(name, name) for name in TEMPLATES]

    mesh = models.ForeignKey(Mesh, on_delete=models.CASCADE, related_name='runs')
    nu = models.PositiveSmallIntegerField(help_text='n = 2**nu')
    loop_mode = models.CharField(max_length=20, choices=LOOP_MODE_CHOICES, default='sound')
    template = models.CharField(max_length=20, choices=TEMPLATE_CHOICES, default='edge-frame')
    slab = models.FloatField(default=0.0)
    planes = models.JSONField(default=list, help_text='Ascending plane heights')
    plane_step = models.FloatField(null=True, blank=True, help_text='Set for uniform stacks')
    cache_active = models.BooleanField(default=False)
    jobs = models.PositiveSmallIntegerField(default=1)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='PENDING')
    error = models.TextField(blank=True)
    total_activations = models.PositiveBigIntegerField(default=0)
    total_cuboid_tests = models.PositiveBigIntegerField(default=0)
    cells_generated = models.PositiveBigIntegerField(default=0)
    samples_evaluated = models.PositiveBigIntegerField(default=0)
    wall_time = models.FloatField(default=0.0)
    created_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = 'Slice Run'
        verbose_name_plural = 'Slice Runs'

    def __str__(self):
        return f'Run #{self.pk} of {self.mesh} (n={self.n})'

    @property
    def n(self):
        return 2 ** self.nu

    def plane_stack(self):
        return PlaneStack(tuple(self.planes), step=self.plane_step)

    def clean(self):
        try:
            self.plane_stack()
        except ValueError as exc:
            raise ValidationError({'planes': str(exc)})
        if self.slab < 0:
            raise ValidationError({'slab': 'Slab half-width must be non-negative'})

    def job(self, planes=None):
        return SliceJob(
            self.mesh.to_maps(),
            planes if planes is not None else self.plane_stack(),
            nu=self.nu,
            loop_mode=self.loop_mode,
            template=self.template,
            slab=self.slab,
            cache_active=self.cache_active,
            jobs=self.jobs,
        )

    @classmethod
    def create_from_form(cls, mesh, cleaned_data):
        stack = cleaned_data['plane_stack']
        return cls.objects.create(
            mesh=mesh,
            nu=cleaned_data['nu'],
            loop_mode=cleaned_data['loop_mode'],
            template=cleaned_data['template'],
            slab=cleaned_data['slab'],
            planes=list(stack.z),
            plane_step=stack.step,
            cache_active=cleaned_data['cache_active'],
            jobs=cleaned_data['jobs'],
        )

    @transaction.atomic
    def execute(self):
        '''Run the sweep and store one PlaneStat per plane; returns the finished job'''
        job = self.job()
        stats = job.run()

        self.plane_stats.all().delete()
        PlaneStat.objects.bulk_create([
            PlaneStat(
                run=self,
                index=plane.index,
                z=plane.z,
                active_maps=plane.active_maps,
                activations=plane.activations,
                cuboid_tests=plane.cuboid_tests,
                wall_time=plane.wall_time,
            )
            for plane in stats.planes
        ])
        self.total_activations = stats.activations
        self.total_cuboid_tests = stats.cuboid_tests
        self.cells_generated = job.tiles.cells_generated
        self.samples_evaluated = job.tiles.samples_evaluated
        self.wall_time = job.elapsed
        self.status = 'FAILED' if stats.partial else 'COMPLETED'
        self.error = stats.error
        self.completed_at = timezone.now()
        self.save()
        logger.info('%s finished %s: %d activations', self, self.status, self.total_activations)
        return job

    def summary(self):
        return {
            'Mesh': self.mesh.name,
            'Status': self.get_status_display(),
            'Resolution n': self.n,
            'Loop mode': self.loop_mode,
            'Cell template': self.template,
            'Slab half-width': self.slab,
            'Planes': len(self.planes),
            'Activations': self.total_activations,
            'Cuboid tests': self.total_cuboid_tests,
            'Cells generated': self.cells_generated,
            'Samples evaluated': self.samples_evaluated,
            'Wall time (s)': round(self.wall_time, 4),
        }

    def plane_tiles(self, index):
        '''Tiles of one plane, recomputed; traversals do not depend on the other planes'''
        z = self.planes[index]
        job = self.job(PlaneStack((z,)))
        job.run()
        tiles = job.log.tiles_for(0)
        for tile in tiles:
            tile.plane_index = index
        return tiles


class PlaneStat(models.Model):
    run = models.ForeignKey(SliceRun, on_delete=models.CASCADE, related_name='plane_stats')
    index = models.PositiveIntegerField()
    z = models.FloatField()
    active_maps = models.PositiveIntegerField(default=0)
    activations = models.PositiveIntegerField(default=0)
    cuboid_tests = models.PositiveIntegerField(default=0)
    wall_time = models.FloatField(default=0.0)

    class Meta:
        ordering = ['run', 'index']
        unique_together = ['run', 'index']

    def __str__(self):
        return f'{self.run} - plane {self.index}'
