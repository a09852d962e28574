"""
Training objectives.

Masked next token prediction: positions are masked independently and every
unmasked position whose successor is masked predicts the successor's
original id from its own hidden state. Fine-tuning is plain per-position
cross entropy against the tag labels, O included.
"""
import logging
from dataclasses import dataclass

import numpy as np

from core.exceptions import TrainingError
from model.config import BIDIRECTIONAL
from model.transformer import (
    backward,
    forward_with_cache,
    merge_grads,
    mntp_head_backward,
    mntp_logits,
    tag_head_backward,
    tag_logits,
)
from numcore.matrix import IGNORE_INDEX, cross_entropy

logger = logging.getLogger(__name__)

MAX_MASK_RETRIES = 8


@dataclass(frozen=True)
class MntpBatch:
    ids: np.ndarray
    masked_ids: np.ndarray
    loss_positions: np.ndarray
    targets: np.ndarray

    def target_row(self):
        """Per-position targets with IGNORE_INDEX off the loss positions"""
        row = np.full(self.ids.size, IGNORE_INDEX, dtype=np.int64)
        row[self.loss_positions] = self.targets
        return row


def loss_positions(masked):
    """Positions i with i unmasked and i + 1 masked"""
    masked = np.asarray(masked, dtype=bool)
    return np.flatnonzero(~masked[:-1] & masked[1:])


def make_mntp_batch(ids, mask_ratio, rng, mask_id,
                    max_retries=MAX_MASK_RETRIES):
    """
    Draw a mask for `ids`. Returns None when every draw (the first plus
    `max_retries` more) leaves no loss position.
    """
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size < 2:
        raise TrainingError('MNTP needs sequences of at least two tokens')
    if not 0 <= mask_ratio < 1:
        raise TrainingError(f'mask_ratio {mask_ratio} outside [0, 1)')
    for _ in range(max_retries + 1):
        masked = rng.random(ids.size) < mask_ratio
        positions = loss_positions(masked)
        if positions.size:
            return MntpBatch(
                ids=ids,
                masked_ids=np.where(masked, mask_id, ids),
                loss_positions=positions,
                targets=ids[positions + 1],
            )
    return None


def zero_grads(params):
    return {name: np.zeros_like(value)
            for name, value in params.tensors.items()}


def _require_bidirectional(params):
    if params.config.attention_mode != BIDIRECTIONAL:
        raise TrainingError(
            'training needs bidirectional attention; '
            f'the model is {params.config.attention_mode}')


def mntp_step(params, batch):
    """Mean MNTP loss over the batch's loss positions and its gradients"""
    _require_bidirectional(params)
    if batch.loss_positions.size == 0:
        return 0.0, zero_grads(params)
    hidden, cache = forward_with_cache(params, batch.masked_ids,
                                       BIDIRECTIONAL)
    loss, dlogits = cross_entropy(mntp_logits(params, hidden),
                                  batch.target_row())
    dhidden, head = mntp_head_backward(params, hidden, dlogits)
    return loss, merge_grads(backward(params, cache, dhidden), head)


def finetune_step(params, seq):
    """Mean tagging loss over every position of one TaggedSequence"""
    _require_bidirectional(params)
    hidden, cache = forward_with_cache(params, seq.ids, BIDIRECTIONAL)
    loss, dlogits = cross_entropy(tag_logits(params, hidden),
                                  np.asarray(seq.labels, dtype=np.int64))
    dhidden, head = tag_head_backward(params, hidden, dlogits)
    return loss, merge_grads(backward(params, cache, dhidden), head)
