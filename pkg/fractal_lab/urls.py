"""
URL configuration for the fractal_lab project.

Only the admin is routed; it browses recorded experiment runs.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
