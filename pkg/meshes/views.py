import csv
import logging

from django.contrib import messages
from django.core.exceptions import ValidationError
from django.core.paginator import Paginator
from django.db.models import Count, Q
from django.http import HttpResponse
from django.shortcuts import get_object_or_404, redirect, render
from django.views.decorators.http import require_POST

from .forms import MeshUploadForm
from .models import Mesh

logger = logging.getLogger(__name__)


def mesh_list(request):
    search = request.GET.get('search')
    meshes = Mesh.objects.annotate(
        total_maps=Count('maps'),
        flagged_maps=Count('maps', filter=Q(maps__jacobian_ok=False)),
    )
    if search:
        meshes = meshes.filter(Q(name__icontains=search) | Q(description__icontains=search))

    paginator = Paginator(meshes, 15)
    page_obj = paginator.get_page(request.GET.get('page'))

    return render(request, 'meshes/mesh_list.html', {
        'page_obj': page_obj,
        'search': search,
        'title': 'Meshes',
    })


def mesh_upload(request):
    if request.method == 'POST':
        form = MeshUploadForm(request.POST, request.FILES)
        if form.is_valid():
            try:
                mesh = Mesh.import_document(
                    form.cleaned_data['name'],
                    form.cleaned_data['mesh_file'],
                    form.cleaned_data['description'],
                )
            except ValidationError as exc:
                messages.error(request, f'Mesh rejected: {"; ".join(exc.messages)}')
            else:
                messages.success(request, f'Mesh "{mesh.name}" imported with {mesh.map_count} maps.')
                if mesh.flagged_count:
                    messages.warning(request, f'{mesh.flagged_count} maps have a non-positive sampled Jacobian.')
                return redirect('meshes:mesh_detail', pk=mesh.pk)
    else:
        form = MeshUploadForm()

    return render(request, 'meshes/mesh_form.html', {'form': form, 'title': 'Import Mesh'})


def mesh_detail(request, pk):
    mesh = get_object_or_404(Mesh, pk=pk)
    maps = mesh.maps.all()

    if request.GET.get('export') == 'csv':
        response = HttpResponse(content_type='text/csv')
        response['Content-Disposition'] = f'attachment; filename=mesh_{mesh.pk}_maps.csv'
        writer = csv.writer(response)
        writer.writerow(['map', 'z_min', 'z_max', 'mu_x', 'mu_y', 'mu_z', 'jacobian_min', 'jacobian_max', 'jacobian_ok'])
        for deformation in maps:
            writer.writerow([
                deformation.map_id,
                repr(deformation.z_min),
                repr(deformation.z_max),
                repr(deformation.mu_x),
                repr(deformation.mu_y),
                repr(deformation.mu_z),
                repr(deformation.jacobian_min),
                repr(deformation.jacobian_max),
                deformation.jacobian_ok,
            ])
        return response

    return render(request, 'meshes/mesh_detail.html', {
        'mesh': mesh,
        'maps': maps,
        'z_range': mesh.z_range,
        'title': f'{mesh.name} - Details',
    })


@require_POST
def mesh_delete(request, pk):
    mesh = get_object_or_404(Mesh, pk=pk)
    name = mesh.name
    mesh.delete()
    logger.info('Deleted mesh %s', name)
    messages.success(request, f'Mesh "{name}" deleted.')
    return redirect('meshes:mesh_list')
