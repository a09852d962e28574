"""Per-class confusion tallies and macro-F1"""
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import LabelError
from datapipe.registry import O_ID


@dataclass
class ConfusionCounts:
    """
    True-positive, false-positive and false-negative tallies per label id,
    over word-final positions only. Index 0 (O) is never tallied. Nested
    per-language and per-domain counts share the same layout.
    """
    n_labels: int
    tp: np.ndarray = None
    fp: np.ndarray = None
    fn: np.ndarray = None
    positions: int = 0
    per_lang: dict = field(default_factory=dict)
    per_domain: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ('tp', 'fp', 'fn'):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(self.n_labels, dtype=np.int64))

    def _bump(self, ref, pred):
        if ref == pred:
            if ref != O_ID:
                self.tp[ref] += 1
            return
        if pred != O_ID:
            self.fp[pred] += 1
        if ref != O_ID:
            self.fn[ref] += 1

    def add(self, other):
        """Add `other` into these counts (merging is commutative)"""
        if other.n_labels != self.n_labels:
            raise LabelError('cannot merge counts over different registries')
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        self.positions += other.positions
        for mine, theirs in ((self.per_lang, other.per_lang),
                             (self.per_domain, other.per_domain)):
            for key, counts in theirs.items():
                mine.setdefault(key, ConfusionCounts(self.n_labels)).add(
                    counts)
        return self

    def restrict(self, subset):
        """Copy with tallies zeroed outside `subset`"""
        keep = np.zeros(self.n_labels, dtype=bool)
        keep[sorted(subset)] = True
        return ConfusionCounts(
            n_labels=self.n_labels,
            tp=np.where(keep, self.tp, 0),
            fp=np.where(keep, self.fp, 0),
            fn=np.where(keep, self.fn, 0),
            positions=self.positions,
            per_lang={k: c.restrict(subset) for k, c in self.per_lang.items()},
            per_domain={k: c.restrict(subset)
                        for k, c in self.per_domain.items()},
        )


def accumulate(counts, reference, predicted):
    """Tally `predicted` label ids against a TaggedSequence in place"""
    predicted = np.asarray(predicted, dtype=np.int64)
    if predicted.shape != (len(reference.labels),):
        raise LabelError(
            f'{predicted.size} predictions for {len(reference.labels)} '
            'positions'
        )
    if predicted.size and (predicted.min() < 0
                           or predicted.max() >= counts.n_labels):
        raise LabelError('predicted label id outside the registry')
    lang = counts.per_lang.setdefault(reference.lang,
                                      ConfusionCounts(counts.n_labels))
    domain = counts.per_domain.setdefault(reference.domain,
                                          ConfusionCounts(counts.n_labels))
    for ref, pred, final in zip(reference.labels, predicted,
                                reference.word_final):
        if not final:
            continue
        for target in (counts, lang, domain):
            target._bump(int(ref), int(pred))
            target.positions += 1
    return counts


def class_scores(counts, label_id):
    """(precision, recall, f1) of one class; 0 where undefined"""
    tp = int(counts.tp[label_id])
    fp = int(counts.fp[label_id])
    fn = int(counts.fn[label_id])
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0
    return precision, recall, f1


def all_classes(counts):
    return frozenset(range(1, counts.n_labels))


def macro_f1(counts, subset=None, include_zero_support=False):
    """
    Unweighted mean F1 over `subset` (default: every class but O).

    Classes with no reference and no predicted occurrence are left out
    unless `include_zero_support`, where they score 0. Returns None when
    no class is left to average.
    """
    subset = all_classes(counts) if subset is None else frozenset(subset)
    if not subset:
        raise ValueError('macro_f1 needs a non-empty class subset')
    if O_ID in subset:
        raise ValueError('O is not a scored class')
    scores = []
    for label_id in sorted(subset):
        support = (counts.tp[label_id] + counts.fp[label_id]
                   + counts.fn[label_id])
        if support:
            scores.append(class_scores(counts, label_id)[2])
        elif include_zero_support:
            scores.append(0.0)
    if not scores:
        return None
    return sum(scores) / len(scores)
