from django.urls import path
from . import views

app_name = 'meshes'

urlpatterns = [
    path('', views.mesh_list, name='mesh_list'),
    path('import/', views.mesh_upload, name='mesh_upload'),
    path('<int:pk>/', views.mesh_detail, name='mesh_detail'),
    path('<int:pk>/delete/', views.mesh_delete, name='mesh_delete'),
]
