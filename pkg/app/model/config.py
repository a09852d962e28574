"""Transformer shape and behaviour switches"""
from dataclasses import asdict, dataclass, replace

from core.exceptions import ConfigError

CAUSAL = 'causal'
BIDIRECTIONAL = 'bidirectional'
ATTENTION_MODES = (CAUSAL, BIDIRECTIONAL)


@dataclass(frozen=True)
class ModelConfig:
    """
    Shape of the encoder. `vocab_size` comes from the tokenizer and
    `n_labels` from the label registry (classes plus O).
    """
    vocab_size: int
    n_labels: int = 31
    layers: int = 4
    d_model: int = 128
    heads: int = 4
    d_ff: int = 512
    max_seq: int = 256
    attention_mode: str = BIDIRECTIONAL
    rope: bool = True
    rope_base: float = 10000.0
    norm_eps: float = 1e-6
    tie_embeddings: bool = False
    init_scale: float = 0.02

    def __post_init__(self):
        for name in ('vocab_size', 'n_labels', 'layers', 'd_model', 'heads',
                     'd_ff', 'max_seq'):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f'{name} must be positive', f'model.{name}')
        if self.d_model % self.heads:
            raise ConfigError('d_model must be divisible by heads',
                              'model.heads')
        if self.rope and self.head_dim % 2:
            raise ConfigError('rotary encoding needs an even head size',
                              'model.heads')
        if self.attention_mode not in ATTENTION_MODES:
            raise ConfigError(
                f'unknown attention mode {self.attention_mode!r}',
                'model.attention_mode',
            )

    @property
    def head_dim(self):
        return self.d_model // self.heads

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f'malformed model config: {exc}',
                              'model') from exc

    @classmethod
    def from_settings(cls, settings, vocab_size, n_labels):
        """Build from the validated `model` config section"""
        return cls(vocab_size=vocab_size, n_labels=n_labels, **settings)

    def with_mode(self, attention_mode):
        return replace(self, attention_mode=attention_mode)
