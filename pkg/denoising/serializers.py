from rest_framework import serializers

from . import synth
from .assoc import AssocScenario
from .estimators import EstimatorConfig, Statistic, Variant
from .exceptions import DenoisingError
from .experiments import SCAN_VARIABLES, ExperimentSpec
from .theoryverify import DEFAULT_T, THEOREMS, TheoremParams

VARIANT_CHOICES = [variant.value for variant in Variant]
NOISE_CHOICES = [dist.value for dist in synth.NoiseDistribution]
SUPPORT_CHOICES = [style.value for style in synth.SupportStyle]


class CommaSeparatedListField(serializers.ListField):
    """List field that also accepts ``"a, b, c"`` strings from flags and config files."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(",") if item.strip()]
        return super().to_internal_value(data)


class BuildMixin(serializers.Serializer):
    """Validated data becomes a domain object through ``build``; ``save()`` returns it."""

    def validate(self, data):
        """
        Build the domain object once so its own checks surface as field-independent errors.
        """
        try:
            data['_built'] = self.build(data)
        except DenoisingError as exc:
            raise serializers.ValidationError(str(exc))
        return data

    def create(self, validated_data):
        return validated_data['_built']


class NoiseMixin(BuildMixin):
    sigma = serializers.FloatField(min_value=0.0, default=1.0)
    noise = serializers.ChoiceField(choices=NOISE_CHOICES, default=synth.NoiseDistribution.GAUSSIAN.value)
    df = serializers.FloatField(default=6.0)
    standardize = serializers.BooleanField(default=True)

    def build_noise(self, data):
        return synth.NoiseSpec(data['noise'], sigma=data['sigma'], df=data['df'], standardize=data['standardize'])


class ExperimentSerializer(NoiseMixin):
    scan_variable = serializers.ChoiceField(choices=SCAN_VARIABLES)
    scan_values = CommaSeparatedListField(child=serializers.FloatField(), min_length=1)
    m = serializers.IntegerField(min_value=1, default=200)
    n = serializers.IntegerField(min_value=1, default=200)
    r = serializers.IntegerField(min_value=1, default=5)
    t = serializers.IntegerField(min_value=1, default=100)
    x = serializers.FloatField(default=4.0)
    support = serializers.ChoiceField(choices=SUPPORT_CHOICES, default=synth.SupportStyle.GAUSSIAN.value)
    random_support = serializers.BooleanField(default=False)
    replicates = serializers.IntegerField(min_value=1, default=50)
    estimators = CommaSeparatedListField(
        child=serializers.ChoiceField(choices=VARIANT_CHOICES),
        min_length=1,
        default=[variant.value for variant in (Variant.REFACTOR, Variant.TSVD, Variant.JL)],
    )
    seed = serializers.IntegerField(min_value=0, default=0)
    label = serializers.CharField(default="gaussian")

    def validate_scan_values(self, value):
        if self.initial_data.get('scan_variable') in ('t', 'n') and any(v != int(v) for v in value):
            raise serializers.ValidationError("t and n scans take integer values.")
        return value

    def build(self, data):
        return ExperimentSpec(
            scan_variable=data['scan_variable'],
            scan_values=tuple(data['scan_values']),
            m=data['m'],
            n=data['n'],
            r=data['r'],
            t=data['t'],
            x=data['x'],
            noise=self.build_noise(data),
            support_style=data['support'],
            random_support=data['random_support'],
            replicates=data['replicates'],
            estimators=tuple(data['estimators']),
            master_seed=data['seed'],
            label=data['label'],
        )

    @staticmethod
    def initial_from_spec(spec):
        """Serializer input reproducing ``spec``; used to seed presets."""
        return {
            'scan_variable': spec.scan_variable,
            'scan_values': list(spec.scan_values),
            'm': spec.m,
            'n': spec.n,
            'r': spec.r,
            't': spec.t,
            'x': spec.x,
            'sigma': spec.noise.sigma,
            'noise': spec.noise.distribution.value,
            'df': spec.noise.df,
            'standardize': spec.noise.standardize,
            'support': spec.support_style.value,
            'random_support': spec.random_support,
            'replicates': spec.replicates,
            'estimators': [variant.value for variant in spec.estimators],
            'seed': spec.master_seed,
            'label': spec.label,
        }


class DenoiseSerializer(BuildMixin):
    variant = serializers.ChoiceField(choices=VARIANT_CHOICES)
    r = serializers.IntegerField(min_value=1)
    t = serializers.IntegerField(min_value=0, default=0)
    star_statistic = serializers.ChoiceField(
        choices=[statistic.value for statistic in Statistic], default=Statistic.REFACTOR.value,
    )

    def build(self, data):
        config = EstimatorConfig(Variant(data['variant']), data['r'], data['t'], Statistic(data['star_statistic']))
        if config.variant.is_star and config.t < 1:
            raise serializers.ValidationError({'t': f"{config.variant.value} needs t >= 1."})
        return config


class VerifySerializer(NoiseMixin):
    theorem = serializers.ChoiceField(choices=THEOREMS)
    m = serializers.IntegerField(min_value=1, default=200)
    n = serializers.IntegerField(min_value=2, default=200)
    x = serializers.FloatField(default=4.0)
    t = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    support = serializers.ChoiceField(choices=SUPPORT_CHOICES, default=synth.SupportStyle.FLAT.value)
    variant = serializers.ChoiceField(
        choices=[Variant.REFACTOR.value, Variant.REFACTOR_PLUS.value], default=Variant.REFACTOR.value,
    )
    C = serializers.FloatField(min_value=0.0, default=64.0)
    C0 = serializers.FloatField(min_value=0.0, default=0.05)
    alpha = serializers.FloatField(min_value=0.0, default=4.0)
    epsilon = serializers.FloatField(min_value=0.0, default=0.1)
    seeds = serializers.IntegerField(min_value=1, default=100)
    seed = serializers.IntegerField(min_value=0, default=0)
    min_frequency = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.95)
    strict = serializers.BooleanField(default=False)

    def build(self, data):
        t = data['t'] if data['t'] is not None else DEFAULT_T[data['theorem']]
        return TheoremParams(
            m=data['m'],
            n=data['n'],
            x=data['x'],
            t=t,
            noise=self.build_noise(data),
            support_style=synth.SupportStyle(data['support']),
            variant=Variant(data['variant']),
            C=data['C'],
            C0=data['C0'],
            alpha=data['alpha'],
            epsilon=data['epsilon'],
        )


class AssocSerializer(BuildMixin):
    m = serializers.IntegerField(min_value=2, default=800)
    n = serializers.IntegerField(min_value=1, default=4000)
    t = serializers.IntegerField(min_value=1, default=200)
    x = serializers.FloatField(default=6.0)
    background = serializers.FloatField(min_value=0.0, default=6.0)
    overlap = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.5)
    effect = serializers.FloatField(default=3.0)
    sigma = serializers.FloatField(min_value=0.0, default=1.0)
    null = serializers.BooleanField(default=False)
    seed = serializers.IntegerField(min_value=0, default=0)

    def build(self, data):
        return AssocScenario(**{key: value for key, value in data.items() if key != 'seed'})
