import numpy as np
from rest_framework import serializers

from core_model.enums import LossNormalizer
from federation.enums import Mode, PriorsSource


class CorrelationField(serializers.Field):
    """
    Either one off-diagonal coefficient shared by every class pair, or a full
    C x C matrix given as a list of rows.
    """
    default_error_messages = {
        'invalid': 'Expected a number or a square list of rows.',
        'range': 'Correlation coefficients must lie in (-1, 1).',
    }

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail('invalid')
        if isinstance(data, (int, float)):
            if not -1.0 < float(data) < 1.0:
                self.fail('range')
            return float(data)
        if isinstance(data, list) and data and all(isinstance(row, list) and len(row) == len(data) for row in data):
            try:
                matrix = [[float(value) for value in row] for row in data]
            except (TypeError, ValueError):
                self.fail('invalid')
            return matrix
        self.fail('invalid')

    def to_representation(self, value):
        return value


class FederationSectionSerializer(serializers.Serializer):
    mode = serializers.ChoiceField(choices=Mode.choices())
    clients = serializers.IntegerField(min_value=1)
    rounds = serializers.IntegerField(min_value=1)
    warmup_rounds = serializers.IntegerField(min_value=1)
    local_epochs = serializers.IntegerField(min_value=1)
    batch_size = serializers.IntegerField(min_value=1)
    learning_rate = serializers.FloatField(min_value=0.0)
    weight_decay = serializers.FloatField(min_value=0.0)
    hidden_dim = serializers.IntegerField(min_value=1)
    band_low = serializers.FloatField(min_value=0.0, max_value=1.0)
    band_high = serializers.FloatField(min_value=0.0, max_value=1.0)
    base_negative_ratio = serializers.FloatField(min_value=0.0)
    base_positive_ratio = serializers.FloatField(min_value=0.0)
    cr_weight = serializers.FloatField(min_value=0.0)
    loss_normalizer = serializers.ChoiceField(choices=LossNormalizer.choices())
    la_tau = serializers.FloatField(min_value=0.0)
    priors_source = serializers.ChoiceField(choices=PriorsSource.choices())
    weak_noise = serializers.FloatField(min_value=0.0)
    strong_noise = serializers.FloatField(min_value=0.0)
    threads = serializers.IntegerField(min_value=1)

    def validate(self, data):
        errors = {}
        if data['warmup_rounds'] > data['rounds']:
            errors['warmup_rounds'] = ["Warm-up rounds cannot exceed the total number of rounds."]
        if data['band_low'] >= data['band_high']:
            errors['band_high'] = ["The difficulty band needs band_low < band_high."]
        if data['weak_noise'] > data['strong_noise']:
            errors['strong_noise'] = ["The strong view needs at least the weak noise scale."]
        if errors:
            raise serializers.ValidationError(errors)
        return data


class AblationSectionSerializer(serializers.Serializer):
    mld = serializers.BooleanField()
    wpc = serializers.BooleanField()
    cr = serializers.BooleanField()
    st = serializers.BooleanField()


class DataSectionSerializer(serializers.Serializer):
    classes = serializers.IntegerField(min_value=2)
    input_dim = serializers.IntegerField(min_value=1)
    train_samples = serializers.IntegerField(min_value=1)
    test_samples = serializers.IntegerField(min_value=1)
    positive_rates = serializers.ListField(child=serializers.FloatField(), min_length=1)
    label_correlation = CorrelationField()
    noise_scale = serializers.FloatField(min_value=0.0)
    signal_scale = serializers.FloatField(min_value=0.0)

    def validate(self, data):
        errors = {}
        rates = data['positive_rates']
        if len(rates) != data['classes']:
            errors['positive_rates'] = [f"Expected {data['classes']} rates, got {len(rates)}."]
        elif any(not 0.0 < rate < 1.0 for rate in rates):
            errors['positive_rates'] = ["Positive rates must lie strictly between 0 and 1."]
        correlation = data['label_correlation']
        if isinstance(correlation, list):
            matrix = np.asarray(correlation)
            if matrix.shape != (data['classes'], data['classes']):
                errors['label_correlation'] = ["The correlation matrix must be classes x classes."]
            elif not np.allclose(matrix, matrix.T) or not np.allclose(np.diag(matrix), 1.0):
                errors['label_correlation'] = ["The correlation matrix must be symmetric with a unit diagonal."]
        if data['signal_scale'] <= 0.0:
            errors['signal_scale'] = ["Signal scale must be positive."]
        if errors:
            raise serializers.ValidationError(errors)
        return data


class PartitionSectionSerializer(serializers.Serializer):
    missing_classes = serializers.IntegerField(min_value=1)


class EvaluationSectionSerializer(serializers.Serializer):
    interval = serializers.IntegerField(min_value=1)
    threshold = serializers.FloatField()
    adjusted = serializers.BooleanField()

    def validate_threshold(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("Threshold must lie in (0, 1).")
        return value


class OutputSectionSerializer(serializers.Serializer):
    dir = serializers.CharField(allow_blank=True)
    snapshots = serializers.BooleanField()


class RunConfigSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0)
    federation = FederationSectionSerializer()
    ablation = AblationSectionSerializer()
    data = DataSectionSerializer()
    partition = PartitionSectionSerializer()
    evaluation = EvaluationSectionSerializer()
    output = OutputSectionSerializer()

    def validate(self, data):
        classes = data['data']['classes']
        missing = data['partition']['missing_classes']
        if missing > classes - 1:
            raise serializers.ValidationError({
                'partition': {'missing_classes': [f"At most {classes - 1} classes can be hidden per client."]}
            })
        return data
