import csv
import io
import logging

from django.contrib import messages
from django.core.paginator import Paginator
from django.http import Http404, HttpResponse
from django.shortcuts import get_object_or_404, redirect, render
from django.views.decorators.http import require_POST

from meshes.models import Mesh
from utils.excel_generator import SliceStatsExcel
from utils.pdf_generator import SliceRunPDF
from utils.svg_generator import COLOR_MODES, SliceSVG
from .exports import PLANE_COLUMNS
from .forms import SliceRunCreateForm
from .models import SliceRun

logger = logging.getLogger(__name__)


def run_list(request):
    status = request.GET.get('status')
    runs = SliceRun.objects.select_related('mesh')
    if status:
        runs = runs.filter(status=status)

    paginator = Paginator(runs, 15)
    page_obj = paginator.get_page(request.GET.get('page'))

    return render(request, 'slicing/run_list.html', {
        'page_obj': page_obj,
        'status': status,
        'status_choices': SliceRun.STATUS_CHOICES,
        'mesh_count': Mesh.objects.count(),
        'title': 'Slice Runs',
    })


def run_create(request):
    initial = {}
    if request.GET.get('mesh'):
        initial['mesh'] = request.GET['mesh']

    if request.method == 'POST':
        form = SliceRunCreateForm(request.POST)
        if form.is_valid():
            run = SliceRun.create_from_form(form.cleaned_data['mesh'], form.cleaned_data)
            try:
                run.execute()
            except ValueError as exc:
                logger.error('Run %s failed: %s', run.pk, exc)
                run.status = 'FAILED'
                run.error = str(exc)
                run.save()
            if run.status == 'COMPLETED':
                messages.success(request, f'Run finished with {run.total_activations} activations.')
            else:
                messages.error(request, f'Run failed: {run.error}')
            return redirect('slicing:run_detail', pk=run.pk)
    else:
        form = SliceRunCreateForm(initial=initial)

    return render(request, 'slicing/run_form.html', {'form': form, 'title': 'New Slice Run'})


def run_detail(request, pk):
    run = get_object_or_404(SliceRun.objects.select_related('mesh'), pk=pk)
    return render(request, 'slicing/run_detail.html', {
        'run': run,
        'summary': run.summary(),
        'plane_stats': run.plane_stats.all(),
        'title': f'Run #{run.pk}',
    })


def run_export(request, pk):
    '''Plane statistics as PDF, Excel or CSV'''
    run = get_object_or_404(SliceRun, pk=pk)
    export_format = request.GET.get('format', 'pdf')
    planes = list(run.plane_stats.all())
    title = f'Slice run #{run.pk}: {run.mesh.name}'

    if export_format == 'pdf':
        buffer = io.BytesIO()
        SliceRunPDF(title, run.summary(), planes).build().generate(buffer)
        buffer.seek(0)
        response = HttpResponse(buffer.read(), content_type='application/pdf')
        disposition = 'inline' if request.GET.get('display') == 'inline' else 'attachment'
        response['Content-Disposition'] = f'{disposition}; filename="slice_run_{run.pk}.pdf"'

    elif export_format == 'excel':
        buffer = io.BytesIO()
        SliceStatsExcel(title, run.summary(), planes).build().save(buffer)
        buffer.seek(0)
        response = HttpResponse(
            buffer.read(),
            content_type='application/vnd.openxmlformats-officedocument.spreadsheetml.sheet',
        )
        response['Content-Disposition'] = f'attachment; filename="slice_run_{run.pk}.xlsx"'

    elif export_format == 'csv':
        response = HttpResponse(content_type='text/csv')
        response['Content-Disposition'] = f'attachment; filename="slice_run_{run.pk}_planes.csv"'
        writer = csv.writer(response)
        writer.writerow(PLANE_COLUMNS)
        for plane in planes:
            writer.writerow([plane.index, repr(plane.z), plane.active_maps, plane.activations,
                             plane.cuboid_tests, f'{plane.wall_time:.6f}'])

    else:
        return HttpResponse('Invalid format', status=400)

    return response


def plane_svg(request, pk, index):
    run = get_object_or_404(SliceRun.objects.select_related('mesh'), pk=pk)
    if not 0 <= index < len(run.planes):
        raise Http404('No such plane')
    color_mode = request.GET.get('color', 'order')
    if color_mode not in COLOR_MODES:
        return HttpResponse('Invalid colour mode', status=400)

    svg = SliceSVG(run.plane_tiles(index), color_mode, title=f'plane {index} (z={run.planes[index]:g})')
    response = HttpResponse(svg.render(), content_type='image/svg+xml')
    if request.GET.get('display') != 'inline':
        response['Content-Disposition'] = f'attachment; filename="plane_{index}.svg"'
    return response


@require_POST
def run_delete(request, pk):
    run = get_object_or_404(SliceRun, pk=pk)
    run.delete()
    messages.success(request, 'Run deleted.')
    return redirect('slicing:run_list')
