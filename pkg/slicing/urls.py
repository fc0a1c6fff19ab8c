from django.urls import path
from . import views

app_name = 'slicing'

urlpatterns = [
    path('', views.run_list, name='run_list'),
    path('runs/new/', views.run_create, name='run_create'),
    path('runs/<int:pk>/', views.run_detail, name='run_detail'),
    path('runs/<int:pk>/export/', views.run_export, name='run_export'),
    path('runs/<int:pk>/planes/<int:index>.svg', views.plane_svg, name='plane_svg'),
    path('runs/<int:pk>/delete/', views.run_delete, name='run_delete'),
]
