"""Corpus evaluation and the JSON report"""
import json
import logging

from datapipe.corpus import prepare_document
from datapipe.labels import STRIP
from evaluator.metrics import (
    ConfusionCounts,
    accumulate,
    all_classes,
    class_scores,
    macro_f1,
)
from evaluator.predict import predict_sequence

logger = logging.getLogger(__name__)


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _group_scores(groups, focus, include_zero_support, focus_only):
    out = {}
    for key in sorted(groups):
        counts = groups[key]
        entry = {
            'positions': counts.positions,
            'macro_focus': macro_f1(counts, focus, include_zero_support),
        }
        if not focus_only:
            entry['macro_all'] = macro_f1(counts, None, include_zero_support)
        out[key] = entry
    return out


def build_report(counts, registry, meta=None, focus_only=False,
                 per_lang=True, include_zero_support=False):
    """
    Report dict for accumulated counts.

    `macro_all` / `macro_focus` pool counts over every document; the
    `*_lang_avg` values average the per-language macros instead. With
    `focus_only` the counts are first restricted to the focus classes.
    """
    focus = registry.focus
    if focus_only:
        counts = counts.restrict(focus)
    classes = sorted(focus if focus_only else all_classes(counts))

    per_class = []
    for label_id in classes:
        precision, recall, f1 = class_scores(counts, label_id)
        per_class.append({
            'id': label_id,
            'label': registry.mark(label_id),
            'focus': label_id in focus,
            'tp': int(counts.tp[label_id]),
            'fp': int(counts.fp[label_id]),
            'fn': int(counts.fn[label_id]),
            'p': precision,
            'r': recall,
            'f1': f1,
        })

    langs = _group_scores(counts.per_lang, focus, include_zero_support,
                          focus_only)
    report = {
        'per_class': per_class,
        'macro_focus': macro_f1(counts, focus, include_zero_support),
        'macro_focus_lang_avg': _mean(v['macro_focus']
                                      for v in langs.values()),
        'positions': counts.positions,
        'per_domain': _group_scores(counts.per_domain, focus,
                                    include_zero_support, focus_only),
        'meta': dict(meta or {}, registry_version=registry.version,
                     include_zero_support=include_zero_support,
                     focus_only=focus_only),
    }
    if not focus_only:
        report['macro_all'] = macro_f1(counts, None, include_zero_support)
        report['macro_all_lang_avg'] = _mean(v['macro_all']
                                             for v in langs.values())
    if per_lang:
        report['per_lang'] = langs
    return report


def count_corpus(params, records, registry, vocab, policy=STRIP):
    """Confusion counts of the model's predictions over corpus records"""
    counts = ConfusionCounts(registry.size)
    for record in records:
        for seq in prepare_document(record, registry, vocab,
                                    params.config.max_seq, policy):
            accumulate(counts, seq, predict_sequence(params, seq))
    logger.info('Evaluated %d positions over %d languages', counts.positions,
                len(counts.per_lang))
    return counts


def evaluate_corpus(params, records, registry, vocab, focus_only=False,
                    per_lang=True, include_zero_support=False, meta=None,
                    policy=STRIP):
    """extract, align, forward and arg-max every record, then report"""
    counts = count_corpus(params, records, registry, vocab, policy)
    return build_report(counts, registry, meta=meta, focus_only=focus_only,
                        per_lang=per_lang,
                        include_zero_support=include_zero_support)


def write_report(report, path):
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(report, fh, ensure_ascii=False, indent=1, sort_keys=True)
        fh.write('\n')
