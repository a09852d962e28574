"""
Named parameter tensors of the encoder.

Names: `embed` (V x d); per layer `layers.{i}.attn_norm`, `wq`, `wk`, `wv`,
`wo`, `mlp_norm`, `w_in`, `w_out`; then `final_norm`. Heads are `lm_head`
(d x V, absent when tied to `embed`) and `tag_head` (d x n_labels). Norm
gains are 1-D; everything else is a matrix. There are no biases.
"""
import hashlib
from dataclasses import dataclass, replace

import numpy as np

from core.exceptions import ModelError
from model.config import ModelConfig

LM_HEAD = 'lm_head'
TAG_HEAD = 'tag_head'
HEADS = (LM_HEAD, TAG_HEAD)


def layer_shapes(config, index):
    d, ff = config.d_model, config.d_ff
    prefix = f'layers.{index}'
    return {
        f'{prefix}.attn_norm': (d,),
        f'{prefix}.wq': (d, d),
        f'{prefix}.wk': (d, d),
        f'{prefix}.wv': (d, d),
        f'{prefix}.wo': (d, d),
        f'{prefix}.mlp_norm': (d,),
        f'{prefix}.w_in': (d, ff),
        f'{prefix}.w_out': (ff, d),
    }


def backbone_shapes(config):
    """Ordered name -> shape map of every non-head tensor"""
    shapes = {'embed': (config.vocab_size, config.d_model)}
    for i in range(config.layers):
        shapes.update(layer_shapes(config, i))
    shapes['final_norm'] = (config.d_model,)
    return shapes


def head_shape(config, name):
    if name == LM_HEAD:
        return (config.d_model, config.vocab_size)
    if name == TAG_HEAD:
        return (config.d_model, config.n_labels)
    raise ModelError(f'unknown head {name!r}')


@dataclass(frozen=True)
class ModelParams:
    """A config plus its tensors; the dict is owned by whoever trains it"""
    config: ModelConfig
    tensors: dict

    def __post_init__(self):
        self.validate()

    def __getitem__(self, name):
        try:
            return self.tensors[name]
        except KeyError:
            raise ModelError(f'missing parameter {name!r}') from None

    def __contains__(self, name):
        return name in self.tensors

    @property
    def heads(self):
        return tuple(h for h in HEADS if h in self.tensors)

    def expected_shapes(self):
        shapes = dict(backbone_shapes(self.config))
        for head in self.heads:
            shapes[head] = head_shape(self.config, head)
        return shapes

    def validate(self):
        expected = self.expected_shapes()
        extra = sorted(set(self.tensors) - set(expected))
        if extra:
            raise ModelError(f'unexpected parameter {extra[0]!r}')
        for name, shape in expected.items():
            if name not in self.tensors:
                raise ModelError(f'missing parameter {name!r}')
            if tuple(self.tensors[name].shape) != shape:
                raise ModelError(
                    f'{name} has shape {tuple(self.tensors[name].shape)}, '
                    f'expected {shape}'
                )
        if self.config.tie_embeddings and LM_HEAD in self.tensors:
            raise ModelError('tied embeddings cannot carry an lm_head')

    def copy(self):
        return ModelParams(self.config, {
            name: np.array(value, dtype=np.float64)
            for name, value in self.tensors.items()
        })

    def with_tensors(self, tensors):
        return ModelParams(self.config, tensors)

    def backbone_names(self):
        return list(backbone_shapes(self.config))


def init_params(config, rng):
    """
    Fresh weights: matrices ~ N(0, init_scale^2), norm gains 1.

    Draws happen in name order of `backbone_shapes` then `lm_head`, so a
    seed fixes every tensor.
    """
    tensors = {}
    shapes = dict(backbone_shapes(config))
    if not config.tie_embeddings:
        shapes[LM_HEAD] = head_shape(config, LM_HEAD)
    for name, shape in shapes.items():
        if len(shape) == 1:
            tensors[name] = np.ones(shape, dtype=np.float64)
        else:
            draw = rng.normal(0.0, 1.0, size=shape)
            tensors[name] = draw * config.init_scale
    return ModelParams(config, tensors)


def replace_head(params, n_labels, init_scale, rng):
    """
    Drop the language-model head and attach a fresh tagging head.

    Backbone tensors are carried over as copies; the tag head gets
    N(0, init_scale^2) entries.
    """
    config = replace(params.config, n_labels=n_labels)
    tensors = {name: np.array(params[name], dtype=np.float64)
               for name in params.backbone_names()}
    tensors[TAG_HEAD] = (rng.normal(0.0, 1.0, size=(config.d_model, n_labels))
                         * init_scale)
    return ModelParams(config, tensors)


def params_digest(params, names=None):
    """sha256 over the named tensors in float64, in name order"""
    digest = hashlib.sha256()
    for name in sorted(names if names is not None else params.tensors):
        digest.update(name.encode('utf-8'))
        digest.update(np.ascontiguousarray(params[name],
                                           dtype='<f8').tobytes())
    return digest.hexdigest()
