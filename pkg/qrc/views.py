from django.db.models import Min, Count

from rest_framework import viewsets, permissions
from rest_framework.decorators import action
from rest_framework.response import Response

from .models import ExperimentRun, BenchmarkResult
from .serializers import ExperimentRunSerializer, BenchmarkResultSerializer
from drf_spectacular.utils import extend_schema, extend_schema_view, OpenApiParameter


# ---------------------------------------------------------------------
# Run registry (read-only; runs are written by the management commands)
# ---------------------------------------------------------------------

@extend_schema_view(
    list=extend_schema(
        tags=["Runs"],
        parameters=[OpenApiParameter("command", str, OpenApiParameter.QUERY)],
    ),
    retrieve=extend_schema(tags=["Runs"]),
)
class ExperimentRunViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = ExperimentRun.objects.prefetch_related("results")
    serializer_class = ExperimentRunSerializer
    permission_classes = [permissions.IsAuthenticatedOrReadOnly]

    def get_queryset(self):
        qs = super().get_queryset()
        command = self.request.query_params.get("command")
        if command:
            qs = qs.filter(command=command)
        return qs


@extend_schema_view(
    list=extend_schema(
        tags=["Results"],
        parameters=[
            OpenApiParameter("task", str, OpenApiParameter.QUERY),
            OpenApiParameter("run", int, OpenApiParameter.QUERY),
        ],
    ),
    retrieve=extend_schema(tags=["Results"]),
)
class BenchmarkResultViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = BenchmarkResult.objects.select_related("run")
    serializer_class = BenchmarkResultSerializer
    permission_classes = [permissions.IsAuthenticatedOrReadOnly]

    def get_queryset(self):
        qs = super().get_queryset()
        task = self.request.query_params.get("task")
        run = self.request.query_params.get("run")
        if task:
            qs = qs.filter(task=task)
        if run and run.isdigit():
            qs = qs.filter(run_id=int(run))
        return qs

    @extend_schema(
        parameters=[OpenApiParameter("run", int, OpenApiParameter.QUERY)],
        responses={200: list[dict]},
        tags=["Results"],
    )
    @action(detail=False, methods=["get"])
    def best_by_task(self, request):
        data = (
            self.get_queryset()
            .values("task")
            .annotate(best_mse=Min("mse"), min_errors=Min("digitized_errors"), results=Count("id"))
            .order_by("task")
        )
        return Response(list(data))
