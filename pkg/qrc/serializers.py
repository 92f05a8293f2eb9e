from django.conf import settings
from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from . import readout, reservoir, tasks
from .models import ExperimentRun, BenchmarkResult


def _django_messages(exc: DjangoValidationError):
    if hasattr(exc, "message_dict"):
        return exc.message_dict
    return exc.messages


class StrictSerializer(serializers.Serializer):
    """Rejects keys that are not declared fields, so archived configs stay trustworthy."""

    # nested sections that may be omitted entirely and are then built from field defaults
    sections = ()

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError({"non_field_errors": ["Expected a JSON object."]})
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ["Unknown key."] for key in unknown})
        data = {**{name: {} for name in self.sections}, **data}
        return super().to_internal_value(data)


class SystemSerializer(StrictSerializer):
    n_input_spins = serializers.IntegerField(min_value=1, max_value=9, default=reservoir.DEFAULT_INPUT_SPINS)
    couplings_ic = serializers.ListField(child=serializers.FloatField(), allow_null=True, default=None)
    couplings_ij = serializers.ListField(child=serializers.FloatField(), allow_null=True, default=None)
    coupling_seed = serializers.IntegerField(min_value=0, default=reservoir.DEFAULT_COUPLING_SEED)
    coupling_min_hz = serializers.FloatField(min_value=0, default=reservoir.DEFAULT_COUPLING_RANGE_HZ[0])
    coupling_max_hz = serializers.FloatField(min_value=0, default=reservoir.DEFAULT_COUPLING_RANGE_HZ[1])

    def validate(self, attrs):
        explicit = [attrs["couplings_ic"] is not None, attrs["couplings_ij"] is not None]
        if any(explicit) and not all(explicit):
            raise serializers.ValidationError(
                {"couplings_ij" if explicit[0] else "couplings_ic": "Give both coupling lists or neither."}
            )
        if attrs["coupling_min_hz"] > attrs["coupling_max_hz"]:
            raise serializers.ValidationError({"coupling_max_hz": "Must not be below coupling_min_hz."})
        if all(explicit):
            try:
                reservoir.SpinSystem(attrs["n_input_spins"], attrs["couplings_ic"], attrs["couplings_ij"])
            except DjangoValidationError as exc:
                raise serializers.ValidationError(_django_messages(exc))
        return attrs


class NoiseSerializer(StrictSerializer):
    copies = serializers.IntegerField(min_value=1, default=readout.DEFAULT_COPIES)
    relative_std = serializers.FloatField(min_value=0, default=readout.DEFAULT_RELATIVE_STD)
    seed = serializers.IntegerField(min_value=0, default=0)
    measurement_std = serializers.FloatField(min_value=0, default=readout.DEFAULT_RELATIVE_STD)
    function_copies = serializers.IntegerField(min_value=1, default=1000)
    function_relative_std = serializers.FloatField(min_value=0, default=1e-2)


class ReadoutSerializer(StrictSerializer):
    bias = serializers.BooleanField(default=True)
    tolerance = serializers.FloatField(min_value=0, allow_null=True, default=None)


class ExperimentConfigSerializer(StrictSerializer):
    sections = ("system", "noise", "readout")

    system = SystemSerializer()
    epsilon = serializers.FloatField(default=reservoir.DEFAULT_EPSILON)
    tau_seconds = serializers.FloatField(default=reservoir.DEFAULT_TAU_SECONDS)
    L = serializers.IntegerField(min_value=1, default=reservoir.DEFAULT_INPUT_LENGTH)
    M = serializers.IntegerField(min_value=1, default=reservoir.DEFAULT_SAMPLES_PER_INPUT)
    rotation_axis = serializers.ChoiceField(choices=reservoir.TRANSVERSE_AXES, default="Y")
    warmup_cycles = serializers.IntegerField(min_value=0, default=reservoir.DEFAULT_SAMPLES_PER_INPUT)
    task = serializers.CharField(default="input_recognition_1")
    scheme = serializers.ChoiceField(choices=tasks.SCHEMES, allow_null=True, default=None)
    noise = NoiseSerializer()
    readout = ReadoutSerializer()
    output_dir = serializers.CharField(default=lambda: str(settings.QRC_OUTPUT_DIR))
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate_tau_seconds(self, value):
        if not value > 0:
            raise serializers.ValidationError("tau must be > 0 (sample interval in seconds).")
        return value

    def validate(self, attrs):
        n_input = attrs["system"]["n_input_spins"]
        bound = 1.0 / n_input
        if not abs(attrs["epsilon"]) < bound:
            raise serializers.ValidationError(
                {"epsilon": f"|epsilon| must be below the PSD bound {bound:g} for {n_input} input spins."}
            )
        try:
            task = tasks.TaskSpec.from_name(attrs["task"], attrs["scheme"])
        except DjangoValidationError as exc:
            raise serializers.ValidationError(_django_messages(exc))
        if task.binary_target and task.positions_needed > attrs["L"]:
            raise serializers.ValidationError(
                {"task": f"{task.name} reads {task.positions_needed} stream positions but L={attrs['L']}."}
            )
        return attrs


class BenchmarkResultSerializer(serializers.ModelSerializer):
    class Meta:
        model = BenchmarkResult
        fields = ['id', 'run', 'task', 'scheme', 'm_used', 'mse', 'digitized_errors',
                  'training_mse', 'baseline_mse', 'effective_rank']
        read_only_fields = fields


class ExperimentRunSerializer(serializers.ModelSerializer):
    results = BenchmarkResultSerializer(many=True, read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ['id', 'command', 'seed', 'status', 'output_dir', 'config', 'created_at', 'finished_at', 'results']
        read_only_fields = fields
