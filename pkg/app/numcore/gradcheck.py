"""Finite-difference checks for hand-written backward passes"""
from dataclasses import dataclass

import numpy as np

from core.exceptions import NumericError


@dataclass(frozen=True)
class GradCheckReport:
    """Worst relative error found among the sampled entries"""
    max_rel_err: float
    worst_param: tuple
    eps: float
    samples: int


def _scalar(value):
    value = float(value)
    if not np.isfinite(value):
        raise NumericError('loss is not finite')
    return value


def finite_diff_check(loss_fn, params, eps=1e-5, samples=64, rng=None):
    """
    Compare analytic gradients against central differences.

    `loss_fn(params)` returns (loss, grads) where both dicts share keys.
    `samples` entries are drawn uniformly over every parameter entry; each
    is compared with (f(p + eps) - f(p - eps)) / (2 eps). The relative error
    uses max(|analytic|, |numeric|, 1e-8) as denominator.
    """
    if eps <= 0:
        raise ValueError('eps must be positive')
    rng = rng if rng is not None else np.random.default_rng(0)
    work = {name: np.array(value, dtype=np.float64)
            for name, value in params.items()}
    loss, grads = loss_fn(work)
    _scalar(loss)

    names = sorted(work)
    sizes = np.array([work[name].size for name in names])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])

    worst = (0.0, (names[0] if names else '', 0))
    for flat in rng.integers(0, total, size=samples):
        slot = int(np.searchsorted(offsets, flat, side='right') - 1)
        name = names[slot]
        index = int(flat - offsets[slot])
        target = work[name].reshape(-1)
        original = target[index]

        target[index] = original + eps
        plus = _scalar(loss_fn(work)[0])
        target[index] = original - eps
        minus = _scalar(loss_fn(work)[0])
        target[index] = original

        numeric = (plus - minus) / (2.0 * eps)
        analytic = float(np.asarray(grads[name]).reshape(-1)[index])
        denom = max(abs(analytic), abs(numeric), 1e-8)
        err = abs(analytic - numeric) / denom
        if err > worst[0]:
            worst = (err, (name, index))

    return GradCheckReport(
        max_rel_err=worst[0],
        worst_param=worst[1],
        eps=eps,
        samples=int(samples),
    )
