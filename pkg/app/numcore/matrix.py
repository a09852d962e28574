"""
Dense numeric kernel

Matrices are 2-D float64 numpy arrays. Every public operation checks its
result is finite. `matmul` accumulates each output element left to right
over the inner dimension, so results are bit-reproducible and equal to a
naive triple loop. Row reductions (softmax sums, RMS means) use numpy's
pairwise order, which is fixed for a given row length.
"""
import math

import numpy as np
import numpy.typing as npt

from core.exceptions import NumericError, ShapeError

Matrix = npt.NDArray[np.float64]

IGNORE_INDEX = -100

_GELU_C = math.sqrt(2.0 / math.pi)


def as_matrix(x, name='matrix'):
    """Return `x` as a 2-D float64 array"""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f'{name} must be 2-D, got shape {arr.shape}')
    return arr


def ensure_finite(x, name='result'):
    """Raise NumericError when `x` holds NaN or Inf"""
    if not np.all(np.isfinite(x)):
        raise NumericError(f'{name} contains non-finite values')
    return x


def matmul(a, b):
    """Matrix product with a fixed left-to-right summation order"""
    a = as_matrix(a, 'a')
    b = as_matrix(b, 'b')
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f'cannot multiply {a.shape} by {b.shape}'
        )
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.float64)
    for k in range(a.shape[1]):
        out += a[:, k:k + 1] * b[k:k + 1, :]
    return ensure_finite(out, 'matmul')


def row_softmax(x, mask=None):
    """Softmax over each row; positions where `mask` is False get 0"""
    x = as_matrix(x, 'x')
    if mask is None:
        mask = np.ones(x.shape, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != x.shape:
            raise ShapeError(f'mask shape {mask.shape} != {x.shape}')
    if not np.all(mask.any(axis=1)):
        raise NumericError('row_softmax got a fully-masked row')
    z = np.where(mask, x, -np.inf)
    z = z - z.max(axis=1, keepdims=True)
    e = np.where(mask, np.exp(z), 0.0)
    out = e / e.sum(axis=1, keepdims=True)
    return ensure_finite(out, 'row_softmax')


def softmax_backward(probs, dprobs):
    """Gradient through row_softmax given its output"""
    inner = (dprobs * probs).sum(axis=1, keepdims=True)
    return probs * (dprobs - inner)


def rms_norm(x, gain, eps=1e-6):
    """Divide each row by sqrt(mean(row^2) + eps) and scale by gain"""
    x = as_matrix(x, 'x')
    gain = np.asarray(gain, dtype=np.float64)
    if gain.shape != (x.shape[1],):
        raise ShapeError(f'gain shape {gain.shape} != ({x.shape[1]},)')
    inv = 1.0 / np.sqrt((x * x).mean(axis=1, keepdims=True) + eps)
    return ensure_finite(x * inv * gain, 'rms_norm')


def rms_norm_backward(dy, x, gain, eps=1e-6):
    """Return (dx, dgain) for rms_norm"""
    n = x.shape[1]
    inv = 1.0 / np.sqrt((x * x).mean(axis=1, keepdims=True) + eps)
    dgain = (dy * x * inv).sum(axis=0)
    z = dy * gain
    dot = (z * x).sum(axis=1, keepdims=True)
    dx = inv * z - x * (inv ** 3) * dot / n
    return dx, dgain


def gelu(x):
    """GELU, tanh approximation"""
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + 0.044715 * x ** 3)))


def gelu_backward(dy, x):
    inner = _GELU_C * (x + 0.044715 * x ** 3)
    t = np.tanh(inner)
    dinner = _GELU_C * (1.0 + 3 * 0.044715 * x ** 2)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner)


def cross_entropy(logits, targets, ignore=IGNORE_INDEX):
    """
    Mean negative log-softmax over rows whose target is not `ignore`.

    Returns (loss, dlogits). The gradient is that of the mean loss, so each
    kept row holds (softmax - one_hot) / kept_rows; ignored rows are 0.
    """
    logits = as_matrix(logits, 'logits')
    targets = np.asarray(targets, dtype=np.int64)
    if targets.shape != (logits.shape[0],):
        raise ShapeError(
            f'{targets.shape[0]} targets for {logits.shape[0]} rows'
        )
    keep = targets != ignore
    if np.any(targets[keep] < 0) or np.any(targets[keep] >= logits.shape[1]):
        raise ShapeError('target id out of range')
    dlogits = np.zeros_like(logits)
    count = int(keep.sum())
    if count == 0:
        return 0.0, dlogits

    rows = logits[keep]
    shifted = rows - rows.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(count), targets[keep]]
    loss = float((log_norm - picked).sum() / count)

    probs = np.exp(shifted - log_norm[:, None])
    probs[np.arange(count), targets[keep]] -= 1.0
    dlogits[keep] = probs / count
    ensure_finite(loss, 'cross_entropy')
    return loss, ensure_finite(dlogits, 'cross_entropy gradient')
