"""
URL configuration for the federation app.
"""
from django.urls import path
from . import views

urlpatterns = [
    # Orchestrator logbook (read-only)
    path('scenarios/', views.scenario_list, name='scenario_list'),
    path('scenarios/<str:scenario_id>/', views.scenario_detail, name='scenario_detail'),
    path('runs/<int:run_id>/', views.run_detail, name='run_detail'),

    # Health check
    path('health/', views.health_check, name='health_check'),
]
