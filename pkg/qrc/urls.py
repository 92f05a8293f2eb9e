from django.urls import path, include
from rest_framework.routers import DefaultRouter
from .views import ExperimentRunViewSet, BenchmarkResultViewSet

router = DefaultRouter()
router.register(r'runs', ExperimentRunViewSet, basename='run')
router.register(r'results', BenchmarkResultViewSet, basename='result')

urlpatterns = [
    path('', include(router.urls)),
]
