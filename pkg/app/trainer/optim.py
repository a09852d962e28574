"""AdamW with decoupled weight decay and a warmup + cosine schedule"""
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from core.exceptions import ConfigError, ShapeError, TrainingError

logger = logging.getLogger(__name__)

NO_DECAY_SUFFIX = '_norm'


@dataclass(frozen=True)
class OptimizerConfig:
    peak_lr: float = 2e-4
    final_lr: float = 1e-6
    warmup_frac: float = 0.10
    betas: tuple = (0.9, 0.95)
    eps: float = 1e-8
    weight_decay: float = 0.01
    batch_size: int = 64
    clip_norm: float = 1.0

    def __post_init__(self):
        if not 0 < self.final_lr < self.peak_lr:
            raise ConfigError('need 0 < final_lr < peak_lr',
                              'optimizer.final_lr')
        if not 0 < self.warmup_frac < 1:
            raise ConfigError('warmup_frac must be in (0, 1)',
                              'optimizer.warmup_frac')
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ConfigError('betas must be two values in [0, 1)',
                              'optimizer.betas')
        if self.batch_size < 1:
            raise ConfigError('batch_size must be positive',
                              'optimizer.batch_size')

    @classmethod
    def from_settings(cls, settings):
        data = dict(settings)
        data['betas'] = tuple(data.get('betas', cls.betas))
        return cls(**data)

    def to_dict(self):
        data = asdict(self)
        data['betas'] = list(self.betas)
        return data


def warmup_steps(total_steps, cfg):
    return int(math.floor(cfg.warmup_frac * total_steps))


def lr_at(step, total_steps, cfg):
    """
    Learning rate for update `step` (0-based) of `total_steps`.

    Rises linearly from 0 to peak_lr at step `warmup`, then follows half a
    cosine down to final_lr, reached exactly at step total_steps - 1.
    """
    if not 0 <= step < total_steps:
        raise ValueError(f'step {step} outside [0, {total_steps})')
    warmup = warmup_steps(total_steps, cfg)
    if step < warmup:
        return cfg.peak_lr * step / warmup
    span = total_steps - 1 - warmup
    if span <= 0:
        return cfg.peak_lr
    progress = (step - warmup) / span
    return cfg.final_lr + (cfg.peak_lr - cfg.final_lr) * 0.5 * (
        1.0 + math.cos(math.pi * progress))


@dataclass
class AdamWState:
    """First and second moments per parameter plus the update count"""
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros(cls, params):
        return cls(
            m={name: np.zeros_like(value) for name, value in params.items()},
            v={name: np.zeros_like(value) for name, value in params.items()},
        )


def check_gradients(grads):
    for name in sorted(grads):
        if not np.all(np.isfinite(grads[name])):
            raise TrainingError(f'non-finite gradient in {name}', param=name)


def global_norm(grads):
    return math.sqrt(sum(float((g * g).sum()) for g in grads.values()))


def clip_by_global_norm(grads, max_norm):
    """Scale all gradients so their joint L2 norm is at most `max_norm`"""
    norm = global_norm(grads)
    if max_norm <= 0 or norm <= max_norm:
        return grads, norm
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}, norm


def adamw_step(params, grads, state, lr, cfg):
    """
    One AdamW update. Returns (new params, new state); inputs are untouched.

    Norm gains (names ending in `_norm`) are not decayed.
    """
    if set(params) != set(grads):
        missing = sorted(set(params) ^ set(grads))
        raise ShapeError(f'gradient set differs at {missing[0]!r}')
    check_gradients(grads)
    beta1, beta2 = cfg.betas
    step = state.step + 1
    correct1 = 1.0 - beta1 ** step
    correct2 = 1.0 - beta2 ** step

    new_params, new_m, new_v = {}, {}, {}
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise ShapeError(
                f'{name}: gradient {grad.shape} vs parameter {value.shape}')
        m = beta1 * state.m[name] + (1.0 - beta1) * grad
        v = beta2 * state.v[name] + (1.0 - beta2) * grad * grad
        update = (m / correct1) / (np.sqrt(v / correct2) + cfg.eps)
        decay = 0.0 if name.endswith(NO_DECAY_SUFFIX) else cfg.weight_decay
        new_params[name] = value - lr * update - lr * decay * value
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamWState(m=new_m, v=new_v, step=step)
