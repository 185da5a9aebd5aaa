"""
URL configuration for the WallStreetFeds simulator.
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', include('federation.urls')),
]
