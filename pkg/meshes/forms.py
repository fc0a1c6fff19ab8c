from django import forms
from django.core.exceptions import ValidationError
from crispy_forms.helper import FormHelper
from crispy_forms.layout import Layout, Submit, Row, Column
from .loader import parse_mesh
from .models import Mesh


class MeshUploadForm(forms.Form):
    name = forms.CharField(max_length=200)
    description = forms.CharField(widget=forms.Textarea(attrs={'rows': 3}), required=False)
    mesh_file = forms.FileField(help_text='Mesh JSON (version 1, cubic maps)')

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.helper = FormHelper()
        self.helper.form_method = 'post'
        self.helper.form_enctype = 'multipart/form-data'
        self.helper.layout = Layout(
            Row(
                Column('name', css_class='form-group col-md-6 mb-3'),
                Column('mesh_file', css_class='form-group col-md-6 mb-3'),
            ),
            'description',
            Submit('submit', 'Import Mesh', css_class='btn btn-primary mt-3')
        )

    def clean_name(self):
        name = self.cleaned_data['name'].strip()
        if Mesh.objects.filter(name=name).exists():
            raise ValidationError('A mesh with this name already exists')
        return name

    def clean_mesh_file(self):
        upload = self.cleaned_data['mesh_file']
        try:
            text = upload.read().decode('utf-8')
        except UnicodeDecodeError:
            raise ValidationError('Mesh file must be UTF-8 text')
        parse_mesh(text)
        return text
