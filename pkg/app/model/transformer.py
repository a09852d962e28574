"""
Pre-norm transformer encoder with a switchable attention mask.

One sequence at a time: `ids` is a 1-D token id array and activations are
(positions x d_model) matrices. Each block is

    h = h + Wo . attention(rope(Wq . rms(h)), rope(Wk . rms(h)), Wv . rms(h))
    h = h + W_out . gelu(W_in . rms(h))

and the output is the final RMS-normalised hidden state. The attention mode
only changes the mask, so one set of weights serves both modes.
"""
import math
from collections import namedtuple

import numpy as np

from core.exceptions import ModelError
from model.config import BIDIRECTIONAL, CAUSAL
from model.params import LM_HEAD, TAG_HEAD
from numcore.matrix import (
    gelu,
    gelu_backward,
    matmul,
    rms_norm,
    rms_norm_backward,
    row_softmax,
    softmax_backward,
)

HeadCache = namedtuple('HeadCache', ['q', 'k', 'v', 'probs'])
LayerCache = namedtuple('LayerCache',
                        ['h', 'a', 'heads', 'attn_out', 'mid', 'm', 'u', 'g'])
ForwardCache = namedtuple('ForwardCache',
                          ['ids', 'mode', 'rope', 'layers', 'final_in'])


def check_ids(config, ids):
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise ModelError('expected a non-empty 1-D sequence of token ids')
    if ids.size > config.max_seq:
        raise ModelError(
            f'sequence of {ids.size} tokens exceeds max_seq {config.max_seq}'
        )
    if ids.min() < 0 or ids.max() >= config.vocab_size:
        raise ModelError('token id outside the vocabulary')
    return ids


def attention_mask(length, mode):
    """Boolean (length x length) mask; True where attention is allowed"""
    if mode == CAUSAL:
        return np.tril(np.ones((length, length), dtype=bool))
    if mode == BIDIRECTIONAL:
        return np.ones((length, length), dtype=bool)
    raise ModelError(f'unknown attention mode {mode!r}')


def rope_tables(length, head_dim, base):
    """cos/sin tables for rotating the two halves of each head"""
    half = head_dim // 2
    inv_freq = base ** (-2.0 * np.arange(half, dtype=np.float64) / head_dim)
    angles = np.arange(length, dtype=np.float64)[:, None] * inv_freq[None, :]
    return np.cos(angles), np.sin(angles)


def rotate(x, cos, sin):
    half = x.shape[1] // 2
    x1, x2 = x[:, :half], x[:, half:]
    return np.concatenate([x1 * cos - x2 * sin, x1 * sin + x2 * cos], axis=1)


def rotate_backward(dy, cos, sin):
    # rotation is orthogonal: the gradient rotates by the opposite angle
    return rotate(dy, cos, -sin)


def _layer(params, index):
    prefix = f'layers.{index}.'
    names = ('attn_norm', 'wq', 'wk', 'wv', 'wo', 'mlp_norm', 'w_in', 'w_out')
    return {name: params[prefix + name] for name in names}


def _attention(config, lp, a, mask, tables):
    dh = config.head_dim
    scale = 1.0 / math.sqrt(dh)
    q, k, v = matmul(a, lp['wq']), matmul(a, lp['wk']), matmul(a, lp['wv'])
    outs, heads = [], []
    for h in range(config.heads):
        cols = slice(h * dh, (h + 1) * dh)
        qh, kh, vh = q[:, cols], k[:, cols], v[:, cols]
        if tables is not None:
            qh, kh = rotate(qh, *tables), rotate(kh, *tables)
        probs = row_softmax(matmul(qh, kh.T) * scale, mask)
        outs.append(matmul(probs, vh))
        heads.append(HeadCache(qh, kh, vh, probs))
    attn_out = np.concatenate(outs, axis=1)
    return matmul(attn_out, lp['wo']), heads, attn_out


def _attention_backward(config, lp, a, heads, attn_out, dout, tables, grads,
                        prefix):
    dh = config.head_dim
    scale = 1.0 / math.sqrt(dh)
    grads[prefix + 'wo'] = matmul(attn_out.T, dout)
    dattn = matmul(dout, lp['wo'].T)
    dq, dk, dv = (np.zeros_like(attn_out) for _ in range(3))
    for h, cache in enumerate(heads):
        cols = slice(h * dh, (h + 1) * dh)
        dho = dattn[:, cols]
        dv[:, cols] = matmul(cache.probs.T, dho)
        dscores = softmax_backward(cache.probs, matmul(dho, cache.v.T)) * scale
        dqh = matmul(dscores, cache.k)
        dkh = matmul(dscores.T, cache.q)
        if tables is not None:
            dqh, dkh = rotate_backward(dqh, *tables), rotate_backward(dkh,
                                                                      *tables)
        dq[:, cols] = dqh
        dk[:, cols] = dkh
    grads[prefix + 'wq'] = matmul(a.T, dq)
    grads[prefix + 'wk'] = matmul(a.T, dk)
    grads[prefix + 'wv'] = matmul(a.T, dv)
    return (matmul(dq, lp['wq'].T) + matmul(dk, lp['wk'].T)
            + matmul(dv, lp['wv'].T))


def forward_with_cache(params, ids, mode=None):
    """Hidden states plus everything `backward` needs"""
    config = params.config
    mode = mode or config.attention_mode
    ids = check_ids(config, ids)
    mask = attention_mask(ids.size, mode)
    tables = (rope_tables(ids.size, config.head_dim, config.rope_base)
              if config.rope else None)
    eps = config.norm_eps

    h = params['embed'][ids]
    layers = []
    for i in range(config.layers):
        lp = _layer(params, i)
        a = rms_norm(h, lp['attn_norm'], eps)
        attn, heads, attn_out = _attention(config, lp, a, mask, tables)
        mid = h + attn
        m = rms_norm(mid, lp['mlp_norm'], eps)
        u = matmul(m, lp['w_in'])
        g = gelu(u)
        layers.append(LayerCache(h, a, heads, attn_out, mid, m, u, g))
        h = mid + matmul(g, lp['w_out'])
    hidden = rms_norm(h, params['final_norm'], eps)
    return hidden, ForwardCache(ids, mode, tables, layers, h)


def forward(params, ids, mode=None):
    """Final hidden states (positions x d_model) for one sequence"""
    return forward_with_cache(params, ids, mode)[0]


def backward(params, cache, dhidden):
    """Gradients of every backbone tensor given d(loss)/d(hidden)"""
    config = params.config
    eps = config.norm_eps
    grads = {}
    dh, grads['final_norm'] = rms_norm_backward(
        dhidden, cache.final_in, params['final_norm'], eps)
    for i in reversed(range(config.layers)):
        prefix = f'layers.{i}.'
        lp = _layer(params, i)
        lc = cache.layers[i]

        grads[prefix + 'w_out'] = matmul(lc.g.T, dh)
        du = gelu_backward(matmul(dh, lp['w_out'].T), lc.u)
        grads[prefix + 'w_in'] = matmul(lc.m.T, du)
        dmid, grads[prefix + 'mlp_norm'] = rms_norm_backward(
            matmul(du, lp['w_in'].T), lc.mid, lp['mlp_norm'], eps)
        dmid = dmid + dh

        da = _attention_backward(config, lp, lc.a, lc.heads, lc.attn_out,
                                 dmid, cache.rope, grads, prefix)
        dx, grads[prefix + 'attn_norm'] = rms_norm_backward(
            da, lc.h, lp['attn_norm'], eps)
        dh = dmid + dx

    dembed = np.zeros_like(params['embed'])
    np.add.at(dembed, cache.ids, dh)
    grads['embed'] = dembed
    return grads


def _lm_matrix(params):
    if params.config.tie_embeddings:
        return params['embed'].T
    if LM_HEAD not in params:
        raise ModelError('model has no language-model head')
    return params[LM_HEAD]


def mntp_logits(params, hidden):
    """Row i scores the token at position i + 1"""
    return matmul(hidden, _lm_matrix(params))


def mntp_head_backward(params, hidden, dlogits):
    """Return (dhidden, head grads) for `mntp_logits`"""
    weight = _lm_matrix(params)
    dweight = matmul(hidden.T, dlogits)
    dhidden = matmul(dlogits, weight.T)
    if params.config.tie_embeddings:
        return dhidden, {'embed': dweight.T.copy()}
    return dhidden, {LM_HEAD: dweight}


def tag_logits(params, hidden):
    """Per-position label logits"""
    if TAG_HEAD not in params:
        raise ModelError('model has no tagging head')
    return matmul(hidden, params[TAG_HEAD])


def tag_head_backward(params, hidden, dlogits):
    weight = params[TAG_HEAD]
    return matmul(dlogits, weight.T), {TAG_HEAD: matmul(hidden.T, dlogits)}


def merge_grads(base, extra):
    """Sum two gradient dicts into a new one"""
    out = dict(base)
    for name, value in extra.items():
        out[name] = out[name] + value if name in out else value
    return out
