from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError
from crispy_forms.helper import FormHelper
from crispy_forms.layout import Layout, Submit, Row, Column, Fieldset
from meshes.models import Mesh
from microstructure.lattice import TEMPLATES
from .exports import parse_planes
from .sweep import PlaneStack
from .traversal import LOOP_MODES

MAX_NU = 10


class SliceRunForm(forms.Form):
    '''Run parameters shared by the slice command and the web form.

    Blank fields fall back to settings.SLICER. Planes come either from an
    explicit list or from start/step/count, never both.
    '''
    nu = forms.IntegerField(label='Resolution exponent', min_value=0, max_value=MAX_NU, required=False,
                            help_text='n = 2**nu boxes per edge')
    loop_mode = forms.ChoiceField(choices=[('', 'Default')] + [(mode, mode) for mode in LOOP_MODES], required=False)
    template = forms.ChoiceField(choices=[('', 'Default')] + [(name, name) for name in TEMPLATES], required=False)
    slab = forms.FloatField(label='Slab half-width', min_value=0.0, required=False)
    z_start = forms.FloatField(required=False)
    z_step = forms.FloatField(required=False)
    count = forms.IntegerField(min_value=0, required=False)
    planes = forms.CharField(widget=forms.Textarea(attrs={'rows': 3}), required=False,
                             help_text='Ascending plane heights, separated by spaces, commas or new lines')
    cache_active = forms.BooleanField(required=False, help_text='Keep the mapped cells of boxes active on the previous plane')
    jobs = forms.IntegerField(min_value=1, required=False)

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.helper = FormHelper()
        self.helper.form_method = 'post'
        self.helper.layout = self.build_layout()

    def build_layout(self):
        return Layout(
            Fieldset(
                'Resolution',
                Row(
                    Column('nu', css_class='form-group col-md-3 mb-3'),
                    Column('loop_mode', css_class='form-group col-md-3 mb-3'),
                    Column('template', css_class='form-group col-md-3 mb-3'),
                    Column('slab', css_class='form-group col-md-3 mb-3'),
                ),
            ),
            Fieldset(
                'Planes',
                Row(
                    Column('z_start', css_class='form-group col-md-4 mb-3'),
                    Column('z_step', css_class='form-group col-md-4 mb-3'),
                    Column('count', css_class='form-group col-md-4 mb-3'),
                ),
                'planes',
            ),
            Row(
                Column('cache_active', css_class='form-group col-md-6 mb-3'),
                Column('jobs', css_class='form-group col-md-6 mb-3'),
            ),
            Submit('submit', 'Run Slicer', css_class='btn btn-primary mt-3'),
        )

    def clean(self):
        cleaned_data = super().clean()
        slicer = settings.SLICER
        if cleaned_data.get('nu') is None:
            cleaned_data['nu'] = slicer['DEFAULT_NU']
        cleaned_data['loop_mode'] = cleaned_data.get('loop_mode') or slicer['LOOP_MODE']
        cleaned_data['template'] = cleaned_data.get('template') or slicer['TEMPLATE']
        if cleaned_data.get('slab') is None:
            cleaned_data['slab'] = slicer['SLAB']
        if cleaned_data.get('jobs') is None:
            cleaned_data['jobs'] = slicer['JOBS']

        uniform = [cleaned_data.get(name) for name in ('z_start', 'z_step', 'count')]
        listed = (cleaned_data.get('planes') or '').strip()
        try:
            if listed:
                if any(value is not None for value in uniform):
                    raise ValidationError('Give either a plane list or start/step/count, not both.')
                cleaned_data['plane_stack'] = PlaneStack(tuple(parse_planes(listed)))
            else:
                if any(value is None for value in uniform):
                    raise ValidationError('Planes need start, step and count (or an explicit list).')
                start, step, count = uniform
                if step <= 0:
                    raise ValidationError('Plane step must be positive.')
                cleaned_data['plane_stack'] = PlaneStack.uniform(start, step, count)
        except ValueError as exc:
            raise ValidationError(str(exc))
        return cleaned_data


class SliceRunCreateForm(SliceRunForm):
    mesh = forms.ModelChoiceField(queryset=Mesh.objects.all(), empty_label='Select a mesh')

    def build_layout(self):
        layout = super().build_layout()
        layout.insert(0, 'mesh')
        return layout
