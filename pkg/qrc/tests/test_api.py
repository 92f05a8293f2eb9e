from django.contrib.auth import get_user_model
from django.test import TestCase
from rest_framework import status
from rest_framework.test import APIClient

from qrc.models import ExperimentRun, BenchmarkResult


class RegistryApiTests(TestCase):
    def setUp(self):
        self.client = APIClient()
        self.run = ExperimentRun.objects.create(command="benchmark", config={"task": "xor2"}, seed=1,
                                                output_dir="runs/a", status=ExperimentRun.Status.SUCCEEDED)
        other = ExperimentRun.objects.create(command="simulate", config={}, seed=2, output_dir="runs/b")
        BenchmarkResult.objects.create(run=self.run, task="xor2", scheme="A", m_used=2, mse=0.2, digitized_errors=3)
        BenchmarkResult.objects.create(run=self.run, task="xor2", scheme="A", m_used=11, mse=0.01, digitized_errors=0)
        BenchmarkResult.objects.create(run=self.run, task="multiply", scheme="B", m_used=11, mse=1e-3)
        self.other = other

    def test_list_runs_newest_first(self):
        res = self.client.get("/api/runs/")
        self.assertEqual(res.status_code, status.HTTP_200_OK)
        ids = [r["id"] for r in res.data["results"]]
        self.assertEqual(ids[0], self.other.id)
        self.assertEqual(len(res.data["results"][1]["results"]), 3)

    def test_filter_runs_by_command(self):
        res = self.client.get("/api/runs/", {"command": "benchmark"})
        self.assertEqual([r["id"] for r in res.data["results"]], [self.run.id])

    def test_filter_results(self):
        res = self.client.get("/api/results/", {"task": "xor2", "run": self.run.id})
        self.assertEqual(res.data["count"], 2)
        res = self.client.get("/api/results/", {"run": self.other.id})
        self.assertEqual(res.data["count"], 0)

    def test_best_by_task(self):
        res = self.client.get("/api/results/best_by_task/")
        self.assertEqual(res.status_code, status.HTTP_200_OK)
        rows = {row["task"]: row for row in res.data}
        self.assertEqual(rows["xor2"]["best_mse"], 0.01)
        self.assertEqual(rows["xor2"]["min_errors"], 0)
        self.assertIsNone(rows["multiply"]["min_errors"])

    def test_registry_is_read_only(self):
        user = get_user_model().objects.create_user(username="lab", password="pw12345")
        self.client.force_authenticate(user)
        res = self.client.post("/api/runs/", {"command": "x"}, format="json")
        self.assertEqual(res.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
        self.client.force_authenticate(None)
        res = self.client.delete(f"/api/results/{BenchmarkResult.objects.first().id}/")
        self.assertIn(res.status_code, (status.HTTP_403_FORBIDDEN, status.HTTP_401_UNAUTHORIZED))

    def test_schema_is_served(self):
        res = self.client.get("/api/schema/")
        self.assertEqual(res.status_code, status.HTTP_200_OK)
