"""
Training loops.

`pretrain` walks the curriculum: each update belongs to the phase whose
step interval contains it, draws one language from that phase's pool with
the temperature sampler and masks `batch_size` of its windows at the
phase's ratio. `finetune` swaps the language-model head for a tagging head
and trains on sampled tagged sequences. Both accumulate gradients over the
batch, clip them, and take one AdamW step at the scheduled rate.

Every random draw comes from the state's single generator, so a run is a
pure function of its inputs and seed.
"""
import json
import logging

from core.exceptions import TrainingError
from datapipe.curriculum import phase_at
from datapipe.sampling import SamplerConfig, sample_language
from model.params import replace_head
from trainer.objectives import finetune_step, make_mntp_batch, mntp_step
from trainer.optim import adamw_step, clip_by_global_norm, lr_at
from trainer.state import TrainState

logger = logging.getLogger(__name__)

MAX_DEGENERATE_DRAWS = 100

FINETUNE_PHASE = 'finetune'


class JsonlLog:
    """Append training records to a JSONL file, one object per line"""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, 'w', encoding='utf-8')

    def __call__(self, record):
        self._fh.write(json.dumps(record, sort_keys=True) + '\n')

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _mean_grads(total, count):
    return {name: value / count for name, value in total.items()}


def _add_grads(total, grads):
    if total is None:
        return {name: value.copy() for name, value in grads.items()}
    for name, value in grads.items():
        total[name] += value
    return total


def _sampler(data, alpha, counts):
    """Sampler over the languages with data, weighted by the language table"""
    if not any(data.values()):
        return None
    return SamplerConfig.from_table(data, alpha, counts)


def _update(state, grads, loss_sum, count, total_steps, cfg):
    grads, norm = clip_by_global_norm(_mean_grads(grads, count),
                                      cfg.clip_norm)
    lr = lr_at(state.step, total_steps, cfg)
    tensors, opt = adamw_step(state.params.tensors, grads, state.opt, lr, cfg)
    state.params = state.params.with_tensors(tensors)
    state.opt = opt
    return loss_sum / count, lr, norm


def pretrain(state, plan, data, cfg, mask_id, alpha=0.3, log=None,
             until=None, on_step=None, counts=None):
    """
    Continue MNTP pretraining from `state` up to `until` (default: the end
    of the plan). `data` maps language codes to lists of token id windows.

    Returns the state and the records logged by this call.
    """
    data = {lang: [ids for ids in windows if len(ids) >= 2]
            for lang, windows in data.items()}
    sampler = _sampler(data, alpha, counts)
    total = plan.total_steps
    until = total if until is None else min(until, total)
    records = []
    current = None
    degenerate = 0

    while state.step < until:
        phase = phase_at(plan, state.step)
        pool = phase.languages & set(sampler.counts if sampler else ())
        if not pool:
            raise TrainingError(
                f'phase {phase.index + 1} has no pretraining data',
                phase=phase.index + 1)
        if phase.index != current:
            logger.info('Phase %d from step %d: ratio %.2f, %d languages',
                        phase.index + 1, state.step, phase.mask_ratio,
                        len(pool))
            current = phase.index

        lang = sample_language(sampler.restricted(pool), state.rng)
        windows = data[lang]
        grads, loss_sum, count = None, 0.0, 0
        for _ in range(cfg.batch_size):
            ids = windows[int(state.rng.integers(len(windows)))]
            batch = make_mntp_batch(ids, phase.mask_ratio, state.rng,
                                    mask_id)
            if batch is None:
                continue
            loss, seq_grads = mntp_step(state.params, batch)
            grads = _add_grads(grads, seq_grads)
            loss_sum += loss
            count += 1
        if count == 0:
            degenerate += 1
            logger.warning('Skipping a batch with no loss positions (%s)',
                           lang)
            if degenerate > MAX_DEGENERATE_DRAWS:
                raise TrainingError('too many batches without loss positions',
                                    phase=phase.index + 1)
            continue
        degenerate = 0

        step = state.step
        loss, lr, _ = _update(state, grads, loss_sum, count, total, cfg)
        record = {'step': step, 'phase': phase.index + 1, 'lang': lang,
                  'loss': loss, 'lr': lr}
        logger.debug('step %d phase %d %s loss %.5f lr %.3g', step,
                     phase.index + 1, lang, loss, lr)
        records.append(record)
        if log is not None:
            log(record)
        if on_step is not None:
            on_step(state, record)
    return state, records


def start_finetune(params, n_labels, init_scale, rng):
    """Replace the head and start a fresh optimizer state"""
    tagged = replace_head(params, n_labels, init_scale, rng)
    return TrainState.start(tagged, rng)


def finetune(state, data, cfg, total_steps, alpha=0.3, log=None, until=None,
             on_step=None, counts=None):
    """
    Continue fine-tuning `state` (see `start_finetune`) up to `until`.

    `data` maps language codes to lists of TaggedSequence. Each update
    draws one language with the temperature sampler and accumulates
    `batch_size` sequences of it.
    """
    data = {lang: [seq for seq in seqs if len(seq)]
            for lang, seqs in data.items()}
    until = total_steps if until is None else min(until, total_steps)
    records = []
    if state.step >= until:
        return state, records
    if not any(data.values()):
        raise TrainingError('no fine-tuning data')
    sampler = _sampler(data, alpha, counts)

    while state.step < until:
        lang = sample_language(sampler, state.rng)
        seqs = data[lang]
        grads, loss_sum = None, 0.0
        for _ in range(cfg.batch_size):
            seq = seqs[int(state.rng.integers(len(seqs)))]
            loss, seq_grads = finetune_step(state.params, seq)
            grads = _add_grads(grads, seq_grads)
            loss_sum += loss

        step = state.step
        loss, lr, _ = _update(state, grads, loss_sum, cfg.batch_size,
                              total_steps, cfg)
        record = {'step': step, 'phase': FINETUNE_PHASE, 'lang': lang,
                  'loss': loss, 'lr': lr}
        logger.debug('finetune step %d %s loss %.5f lr %.3g', step, lang,
                     loss, lr)
        records.append(record)
        if log is not None:
            log(record)
        if on_step is not None:
            on_step(state, record)
    return state, records
