"""
URL configuration for the printslice project.

Meshes are imported and inspected under /meshes/, slice runs are created,
executed and exported under /runs/ (the landing page).
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', include('slicing.urls')),  # Home page
    path('meshes/', include('meshes.urls')),
]
