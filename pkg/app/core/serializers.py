"""Serializers validating configuration files and corpus records"""
from rest_framework import serializers

from datapipe.labels import POLICIES, STRIP


class SectionSerializer(serializers.Serializer):
    """Serializer for one config section; missing subsections use defaults"""

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError(
                {'non_field_errors': ['expected a mapping']}
            )
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({unknown[0]: ['unknown key']})
        data = dict(data)
        for name, field in self.fields.items():
            if isinstance(field, serializers.Serializer) and name not in data:
                data[name] = {}
        return super().to_internal_value(data)


class TokenizerSettingsSerializer(SectionSerializer):
    vocab_size = serializers.IntegerField(default=8192, min_value=259)


class DataSettingsSerializer(SectionSerializer):
    unregistered_policy = serializers.ChoiceField(choices=POLICIES,
                                                  default=STRIP)


class ModelSettingsSerializer(SectionSerializer):
    """Transformer shape; vocab size and label count come from files"""
    layers = serializers.IntegerField(default=4, min_value=1)
    d_model = serializers.IntegerField(default=128, min_value=2)
    heads = serializers.IntegerField(default=4, min_value=1)
    d_ff = serializers.IntegerField(default=512, min_value=1)
    max_seq = serializers.IntegerField(default=256, min_value=2)
    attention_mode = serializers.ChoiceField(
        choices=['causal', 'bidirectional'], default='bidirectional')
    rope = serializers.BooleanField(default=True)
    rope_base = serializers.FloatField(default=10000.0, min_value=1.0)
    norm_eps = serializers.FloatField(default=1e-6, min_value=0.0)
    tie_embeddings = serializers.BooleanField(default=False)
    init_scale = serializers.FloatField(default=0.02, min_value=0.0)

    def validate(self, attrs):
        if attrs['d_model'] % attrs['heads']:
            raise serializers.ValidationError(
                {'heads': ['d_model must be divisible by heads']})
        if attrs['rope'] and (attrs['d_model'] // attrs['heads']) % 2:
            raise serializers.ValidationError(
                {'heads': ['rotary encoding needs an even head size']})
        return attrs


class OptimizerSettingsSerializer(SectionSerializer):
    peak_lr = serializers.FloatField(default=2e-4)
    final_lr = serializers.FloatField(default=1e-6)
    warmup_frac = serializers.FloatField(default=0.10)
    betas = serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=0.999999),
        min_length=2, max_length=2, default=[0.9, 0.95])
    eps = serializers.FloatField(default=1e-8, min_value=0.0)
    weight_decay = serializers.FloatField(default=0.01, min_value=0.0)
    batch_size = serializers.IntegerField(default=64, min_value=1)
    clip_norm = serializers.FloatField(default=1.0, min_value=0.0)

    def validate(self, attrs):
        if not 0 < attrs['final_lr'] < attrs['peak_lr']:
            raise serializers.ValidationError(
                {'final_lr': ['need 0 < final_lr < peak_lr']})
        if not 0 < attrs['warmup_frac'] < 1:
            raise serializers.ValidationError(
                {'warmup_frac': ['must be in (0, 1)']})
        return attrs


class PhaseSerializer(SectionSerializer):
    languages = serializers.ListField(child=serializers.CharField(),
                                      allow_empty=False)
    step_budget = serializers.IntegerField(min_value=1)
    mask_ratio = serializers.FloatField(min_value=0.0, max_value=1.0)


class PretrainSettingsSerializer(SectionSerializer):
    """`phases` replaces the default four-phase plan when given"""
    optimizer = OptimizerSettingsSerializer()
    total_steps = serializers.IntegerField(default=1000, min_value=10)
    phases = PhaseSerializer(many=True, required=False)
    save_every = serializers.IntegerField(default=0, min_value=0)


class FinetuneSettingsSerializer(SectionSerializer):
    optimizer = OptimizerSettingsSerializer()
    steps = serializers.IntegerField(default=2000, min_value=0)
    head_init_scale = serializers.FloatField(default=0.02, min_value=0.0)
    save_every = serializers.IntegerField(default=0, min_value=0)


class SamplerSettingsSerializer(SectionSerializer):
    alpha = serializers.FloatField(default=0.3)
    counts = serializers.DictField(
        child=serializers.IntegerField(min_value=1), required=False)

    def validate_alpha(self, value):
        if not 0 < value <= 1:
            raise serializers.ValidationError('must be in (0, 1]')
        return value


class SynthSettingsSerializer(SectionSerializer):
    sentences = serializers.IntegerField(default=200, min_value=1)
    languages = serializers.ListField(child=serializers.CharField(),
                                      required=False)
    lexicon_size = serializers.IntegerField(default=500, min_value=1)
    disfluency = serializers.FloatField(default=0.0, min_value=0.0,
                                        max_value=0.99)


class EvalSettingsSerializer(SectionSerializer):
    include_zero_support = serializers.BooleanField(default=False)


class CadenceConfigSerializer(SectionSerializer):
    """Whole configuration file"""
    seed = serializers.IntegerField(required=False, min_value=0)
    tokenizer = TokenizerSettingsSerializer()
    data = DataSettingsSerializer()
    model = ModelSettingsSerializer()
    pretrain = PretrainSettingsSerializer()
    finetune = FinetuneSettingsSerializer()
    sampler = SamplerSettingsSerializer()
    synth = SynthSettingsSerializer()
    eval = EvalSettingsSerializer()


class CorpusRecordSerializer(serializers.Serializer):
    """One corpus line: {"lang", "text", "domain"?}"""
    lang = serializers.CharField()
    text = serializers.CharField(allow_blank=True, trim_whitespace=False)
    domain = serializers.ChoiceField(choices=['written', 'extempore'],
                                     default='written')


class TaggedSequenceSerializer(serializers.Serializer):
    """One prepared fine-tuning example"""
    lang = serializers.CharField()
    domain = serializers.ChoiceField(choices=['written', 'extempore'],
                                     default='written')
    ids = serializers.ListField(child=serializers.IntegerField(min_value=0))
    labels = serializers.ListField(
        child=serializers.IntegerField(min_value=0))
    word_final = serializers.ListField(
        child=serializers.IntegerField(min_value=0, max_value=1))

    def validate(self, attrs):
        if not (len(attrs['ids']) == len(attrs['labels'])
                == len(attrs['word_final'])):
            raise serializers.ValidationError(
                {'labels': ['ids, labels and word_final differ in length']})
        return attrs


def first_error(errors, prefix=''):
    """Dotted path and message of the first error in a serializer result"""
    if isinstance(errors, dict):
        for key, value in errors.items():
            if key == 'non_field_errors':
                return first_error(value, prefix)
            path = f'{prefix}.{key}' if prefix else str(key)
            return first_error(value, path)
    if isinstance(errors, list):
        for index, value in enumerate(errors):
            if isinstance(value, (dict, list)):
                if not value:
                    continue
                path = f'{prefix}.{index}' if prefix else str(index)
                return first_error(value, path)
            return prefix, str(value)
    return prefix, str(errors)
