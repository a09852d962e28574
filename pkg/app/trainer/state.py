"""Resumable training state: 64-bit weights, AdamW moments and the generator"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.exceptions import InputError
from model.config import ModelConfig
from model.params import ModelParams
from trainer.optim import AdamWState

logger = logging.getLogger(__name__)

STATE_VERSION = 1


@dataclass
class TrainState:
    """Everything needed to continue a run exactly where it stopped"""
    params: ModelParams
    opt: AdamWState
    rng: np.random.Generator

    @classmethod
    def start(cls, params, rng):
        return cls(params=params, opt=AdamWState.zeros(params.tensors),
                   rng=rng)

    @property
    def step(self):
        return self.opt.step


def save_state(state, path):
    arrays = {}
    for name, value in state.params.tensors.items():
        arrays[f'param/{name}'] = value
        arrays[f'm/{name}'] = state.opt.m[name]
        arrays[f'v/{name}'] = state.opt.v[name]
    header = {
        'version': STATE_VERSION,
        'config': state.params.config.to_dict(),
        'step': state.opt.step,
        'rng': state.rng.bit_generator.state,
        'bit_generator': type(state.rng.bit_generator).__name__,
    }
    arrays['header'] = np.array(json.dumps(header, sort_keys=True))
    with open(path, 'wb') as fh:
        np.savez(fh, **arrays)
    logger.info('Saved training state at step %d to %s', state.step, path)


def load_state(path):
    try:
        with np.load(Path(path), allow_pickle=False) as data:
            header = json.loads(str(data['header']))
            tensors, m, v = {}, {}, {}
            for key in data.files:
                kind, _, name = key.partition('/')
                if kind == 'param':
                    tensors[name] = np.array(data[key], dtype=np.float64)
                elif kind == 'm':
                    m[name] = np.array(data[key], dtype=np.float64)
                elif kind == 'v':
                    v[name] = np.array(data[key], dtype=np.float64)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f'cannot read training state {path}: {exc}') from exc
    if header.get('version') != STATE_VERSION:
        raise InputError(f'unsupported training state version in {path}')

    generator = getattr(np.random, header['bit_generator'])()
    generator.state = header['rng']
    return TrainState(
        params=ModelParams(ModelConfig.from_dict(header['config']), tensors),
        opt=AdamWState(m=m, v=v, step=int(header['step'])),
        rng=np.random.Generator(generator),
    )
