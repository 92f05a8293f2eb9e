import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, tag

from qrc import tasks
from qrc.readout import NoiseSpec
from qrc.reservoir import SequenceParams, SpinSystem
from qrc.tasks import BenchmarkRunner, BenchmarkSettings, TaskSpec


def small_settings(**overrides):
    """Three-spin reservoir with short streams; fast enough for unit tests."""
    values = dict(
        system=SpinSystem(2, (12e3, -7e3), (9e3,)),
        params=SequenceParams(input_length=2, samples_per_input=4, warmup_cycles=4),
        epsilon=3e-5,
        noise=NoiseSpec(copies=20, relative_std=1e-4),
        function_noise=NoiseSpec(copies=5, relative_std=1e-2),
        bias=True,
    )
    values.update(overrides)
    return BenchmarkSettings(**values)


class TaskSpecTests(SimpleTestCase):
    def test_names_round_trip(self):
        for name in tasks.BATTERY + tasks.RECOGNITION_AND_PARITY:
            self.assertEqual(TaskSpec.from_name(name).name, name)

    def test_default_schemes(self):
        self.assertEqual(TaskSpec.from_name("xor3").scheme, tasks.SCHEME_A)
        self.assertEqual(TaskSpec.from_name("divide").scheme, tasks.SCHEME_B)
        self.assertEqual(TaskSpec.from_name("divide", "C").scheme, tasks.SCHEME_C)

    def test_invalid(self):
        for name in ("xor5", "adder1_2", "adder2_3", "parity_2_2", "input_recognition_0", "sqrt"):
            with self.subTest(name=name), self.assertRaises(ValidationError):
                TaskSpec.from_name(name)
        with self.assertRaises(ValidationError):
            TaskSpec.from_name("xor2", "B")
        with self.assertRaises(ValidationError):
            TaskSpec.from_name("multiply", "A")

    def test_positions_needed(self):
        self.assertEqual(TaskSpec.from_name("parity_1_3").positions_needed, 3)
        self.assertEqual(TaskSpec.from_name("adder2_0").positions_needed, 4)
        self.assertEqual(TaskSpec.from_name("nand").positions_needed, 2)


class TargetTests(SimpleTestCase):
    def target(self, name, bits):
        return tasks.target_for(TaskSpec.from_name(name), bits)

    def test_binary_truth_tables(self):
        self.assertEqual(self.target("input_recognition_3", (0, 1, 1, 0)), 1.0)
        self.assertEqual(self.target("parity_1_3", (1, 0, 1, 0)), 0.0)
        self.assertEqual(self.target("parity_2_3", (1, 0, 1, 0)), 1.0)
        self.assertEqual(self.target("xor3", (1, 1, 1, 0)), 1.0)
        self.assertEqual(self.target("xor4", (1, 1, 1, 1)), 0.0)
        self.assertEqual([self.target("nand", (a, b, 0, 0)) for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))],
                         [1.0, 1.0, 1.0, 0.0])

    def test_adders(self):
        # 1 + 1 = 10b
        self.assertEqual(self.target("adder1_0", (1, 1, 0, 0)), 0.0)
        self.assertEqual(self.target("adder1_1", (1, 1, 0, 0)), 1.0)
        # 3 + 2 = 101b
        bits = (1, 1, 1, 0)
        self.assertEqual([self.target(f"adder2_{k}", bits) for k in range(3)], [1.0, 0.0, 1.0])

    def test_adder2_matches_integer_sum_everywhere(self):
        for bits in tasks.binary_patterns(4):
            total = (2 * bits[0] + bits[1]) + (2 * bits[2] + bits[3])
            got = sum(int(self.target(f"adder2_{k}", bits)) << k for k in range(3))
            self.assertEqual(got, total)

    def test_functions(self):
        self.assertAlmostEqual(self.target("multiply", (0.5, 0.25)), 0.125)
        self.assertAlmostEqual(self.target("divide", (0.5, 0.25)), 0.4)
        self.assertAlmostEqual(self.target("nonlinear1", (0.5, 0.25)), 0.0625)
        self.assertAlmostEqual(self.target("nonlinear2", (0.5, 0.25)), 0.3125)

    def test_symmetric_functions(self):
        for name in ("multiply", "nonlinear2"):
            for s1, s2 in tasks.function_inputs():
                self.assertEqual(self.target(name, (s1, s2)), self.target(name, (s2, s1)))

    def test_bad_inputs(self):
        with self.assertRaises(ValidationError):
            self.target("xor4", (1, 0))
        with self.assertRaises(ValidationError):
            self.target("nand", (2, 0))
        with self.assertRaises(ValidationError):
            self.target("multiply", (0.1,))


class InputTests(SimpleTestCase):
    def test_binary_streams(self):
        streams = tasks.binary_streams(4)
        self.assertEqual(len(streams), 16)
        self.assertEqual(streams[0], (-1.0, -1.0, -1.0, -1.0))
        self.assertEqual(streams[1], (-1.0, -1.0, -1.0, 1.0))

    def test_grid_is_half_open(self):
        grid = tasks.continuous_grid()
        self.assertEqual(len(grid), 8)
        self.assertEqual(grid[0], 0.0)
        self.assertEqual(grid[-1], 0.875)
        self.assertEqual(len(tasks.function_inputs()), 64)
        with self.assertRaises(ValidationError):
            tasks.continuous_grid(step=0.0)

    def test_multiplex_expand(self):
        self.assertEqual(tasks.multiplex_expand(0.25, 0.5),
                         [(0.25, 0.5), (-0.25, 0.5), (0.25, -0.5), (-0.25, -0.5)])

    def test_datasets(self):
        data = tasks.binary_dataset(TaskSpec.from_name("xor2"), 2)
        self.assertEqual(data.streams[3], (1.0, 1.0))
        np.testing.assert_array_equal(data.targets, [0.0, 1.0, 1.0, 0.0])
        functions = tasks.function_dataset(TaskSpec.from_name("multiply"))
        self.assertEqual(len(functions.instances), 64)


class RawInputControlTests(SimpleTestCase):
    def test_xor_is_not_linearly_separable(self):
        metrics = tasks.raw_input_control(TaskSpec.from_name("xor2"))
        self.assertGreaterEqual(metrics.digitized_errors, 1)

    def test_nand_and_recognition_are(self):
        self.assertEqual(tasks.raw_input_control(TaskSpec.from_name("nand")).digitized_errors, 0)
        self.assertEqual(tasks.raw_input_control(TaskSpec.from_name("input_recognition_2")).digitized_errors, 0)


class RunnerTests(SimpleTestCase):
    def test_scheme_a_report(self):
        runner = BenchmarkRunner(small_settings())
        report = runner.run(TaskSpec.from_name("input_recognition_1"), seed=5)
        self.assertEqual(report.m_used, 4)
        self.assertEqual(len(report.per_instance), 4)
        self.assertEqual(report.per_instance[2].input, "10")
        self.assertIsNotNone(report.digitized_errors)
        self.assertGreaterEqual(report.mse, 0.0)
        self.assertAlmostEqual(report.baseline_mse, 0.25)

    def test_same_seed_same_report(self):
        task = TaskSpec.from_name("nand")
        a = BenchmarkRunner(small_settings()).run(task, seed=9)
        b = BenchmarkRunner(small_settings()).run(task, seed=9)
        self.assertEqual(a.mse, b.mse)
        self.assertEqual(a.per_instance, b.per_instance)

    def test_traces_are_cached_across_tasks(self):
        runner = BenchmarkRunner(small_settings())
        runner.sweep([TaskSpec.from_name("nand"), TaskSpec.from_name("xor2")], [2, 4])
        self.assertEqual(len(runner._traces), 4)

    def test_m_sweep(self):
        reports = tasks.m_sweep(TaskSpec.from_name("input_recognition_2"), small_settings(), [1, 2, 4], seed=2)
        self.assertEqual([r.m_used for r in reports], [1, 2, 4])

    def test_run_battery(self):
        settings_ = small_settings(params=SequenceParams(input_length=4, samples_per_input=2, warmup_cycles=4))
        reports = tasks.run_battery(settings_, [1, 2], seed=3, function_scheme=tasks.SCHEME_C)
        self.assertEqual([r.task.name for r in reports[::2]], list(tasks.BATTERY))
        self.assertEqual([r.m_used for r in reports[:4]], [1, 2, 1, 2])
        self.assertEqual({r.scheme for r in reports if r.task.kind in tasks.CONTINUOUS_KINDS}, {tasks.SCHEME_C})

    def test_binary_streams_use_signed_inputs(self):
        data = tasks.binary_dataset(TaskSpec.from_name("nand"), 2)
        self.assertEqual(data.streams, tasks.binary_streams(2))

    def test_m_out_of_range(self):
        with self.assertRaises(ValidationError):
            BenchmarkRunner(small_settings()).run(TaskSpec.from_name("nand"), m_used=5)

    def test_task_longer_than_stream(self):
        with self.assertRaises(ValidationError):
            BenchmarkRunner(small_settings()).run(TaskSpec.from_name("xor3"))

    def test_function_design_shape(self):
        runner = BenchmarkRunner(small_settings())
        design = runner.function_design(3)
        # four sign patterns x L=2 x M'=3
        self.assertEqual((design.rows, design.cols), (64, 24))
        self.assertEqual(design.row_labels[9], "0.125:0.125")

    def test_scheme_c_fits_training_rows(self):
        report = BenchmarkRunner(small_settings()).run(TaskSpec.from_name("multiply", "C"), seed=1)
        self.assertEqual(len(report.per_instance), 64)
        self.assertIsNone(report.digitized_errors)
        self.assertLess(report.mse, report.baseline_mse)

    def test_scheme_b_leave_one_out(self):
        settings = small_settings(function_noise=NoiseSpec(copies=2, relative_std=1e-3))
        report = BenchmarkRunner(settings).run(TaskSpec.from_name("nonlinear2", "B"), m_used=2, seed=1)
        self.assertEqual(report.rounds, 64)
        self.assertTrue(np.isfinite(report.mse))

    def test_parallel_folds_match_serial(self):
        task = TaskSpec.from_name("multiply", "B")
        serial = BenchmarkRunner(small_settings(function_noise=NoiseSpec(copies=2))).run(task, m_used=2, seed=4)
        threaded = BenchmarkRunner(small_settings(function_noise=NoiseSpec(copies=2), n_jobs=2)).run(
            task, m_used=2, seed=4)
        self.assertAlmostEqual(serial.mse, threaded.mse, places=12)


@tag("acceptance")
class DefaultReservoirAcceptanceTests(SimpleTestCase):
    """Full-size default reservoir; exclude with --exclude-tag acceptance."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        from qrc.experiment import parse_config
        cls.config = parse_config(None)
        cls.runner = BenchmarkRunner(cls.config.benchmark_settings(n_jobs=settings.QRC_N_JOBS))

    def run_task(self, name, m_used=None, scheme=None):
        return self.runner.run(TaskSpec.from_name(name, scheme), m_used, seed=self.config.run_seed)

    def test_input_recognition_and_parity(self):
        for name in ("input_recognition_1", "input_recognition_2", "input_recognition_3"):
            self.assertEqual(self.run_task(name).digitized_errors, 0, name)
        for name in ("parity_1_3", "parity_2_3"):
            report = self.run_task(name)
            self.assertEqual(report.digitized_errors, 0, name)
            self.assertLess(report.mse, 0.1, name)

    def test_more_samples_do_not_hurt(self):
        def aggregate(m_used):
            return sum(self.run_task(name, m_used).mse for name in tasks.RECOGNITION_AND_PARITY)

        self.assertLessEqual(aggregate(11), aggregate(2))

    def test_reservoir_separates_xor(self):
        self.assertGreaterEqual(tasks.raw_input_control(TaskSpec.from_name("xor2")).digitized_errors, 1)
        self.assertEqual(self.run_task("xor2").digitized_errors, 0)

    def test_function_schemes(self):
        for name in tasks.CONTINUOUS_KINDS:
            with self.subTest(task=name):
                loo = self.run_task(name, scheme=tasks.SCHEME_B)
                all_rows = self.run_task(name, scheme=tasks.SCHEME_C)
                self.assertLess(all_rows.mse, loo.mse)
                self.assertLess(loo.mse, loo.baseline_mse)
