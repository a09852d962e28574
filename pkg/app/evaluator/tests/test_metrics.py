"""Tests for confusion counting and macro-F1"""
import numpy as np
from django.test import SimpleTestCase

from core.exceptions import LabelError
from datapipe.labels import TaggedSequence
from datapipe.registry import default_registry
from evaluator.metrics import (
    ConfusionCounts,
    accumulate,
    class_scores,
    macro_f1,
)

N_LABELS = 31


def random_sequence(rng, lang='hi', domain='written', length=12,
                    n_labels=N_LABELS):
    final = rng.random(length) < 0.7
    labels = np.where(final & (rng.random(length) < 0.5),
                      rng.integers(1, n_labels, length), 0)
    return TaggedSequence(lang=lang, ids=tuple(range(length)),
                          labels=tuple(int(x) for x in labels),
                          word_final=tuple(bool(f) for f in final),
                          domain=domain)


def counts_from(tp, fp, fn, n_labels=N_LABELS):
    counts = ConfusionCounts(n_labels)
    for table, values in ((counts.tp, tp), (counts.fp, fp), (counts.fn, fn)):
        for label_id, value in values.items():
            table[label_id] = value
    return counts


def direct_macro(tp, fp, fn, classes):
    scores = []
    for c in classes:
        if tp[c] + fp[c] + fn[c]:
            scores.append(2 * tp[c] / (2 * tp[c] + fp[c] + fn[c]))
    return sum(scores) / len(scores) if scores else None


class AccumulateTests(SimpleTestCase):
    """Test accumulate"""

    def test_matches_brute_force(self):
        """Test tallies against a direct count over word-final positions"""
        rng = np.random.default_rng(0)
        counts = ConfusionCounts(N_LABELS)
        tp = np.zeros(N_LABELS, dtype=int)
        fp = np.zeros(N_LABELS, dtype=int)
        fn = np.zeros(N_LABELS, dtype=int)
        positions = 0
        for _ in range(200):
            seq = random_sequence(rng)
            pred = rng.integers(0, N_LABELS, len(seq))
            pred[rng.random(len(seq)) < 0.5] = 0
            accumulate(counts, seq, pred)
            for ref, guess, final in zip(seq.labels, pred, seq.word_final):
                if not final:
                    continue
                positions += 1
                if ref == guess and ref:
                    tp[ref] += 1
                if ref != guess and guess:
                    fp[guess] += 1
                if ref != guess and ref:
                    fn[ref] += 1

        np.testing.assert_array_equal(counts.tp, tp)
        np.testing.assert_array_equal(counts.fp, fp)
        np.testing.assert_array_equal(counts.fn, fn)
        self.assertEqual(counts.positions, positions)

    def test_non_final_positions_ignored(self):
        """Test predictions on inner subtokens never count"""
        seq = TaggedSequence(lang='en', ids=(1, 2, 3), labels=(0, 0, 1),
                             word_final=(False, False, True))
        counts = accumulate(ConfusionCounts(N_LABELS), seq, [2, 2, 1])

        self.assertEqual(counts.positions, 1)
        self.assertEqual(int(counts.tp[1]), 1)
        self.assertEqual(int(counts.fp.sum()), 0)

    def test_per_language_and_domain(self):
        """Test nested counts sum to the global counts"""
        rng = np.random.default_rng(1)
        counts = ConfusionCounts(N_LABELS)
        for lang, domain in (('hi', 'written'), ('ta', 'extempore'),
                             ('hi', 'extempore')):
            seq = random_sequence(rng, lang, domain)
            accumulate(counts, seq, rng.integers(0, N_LABELS, len(seq)))

        self.assertEqual(sorted(counts.per_lang), ['hi', 'ta'])
        for groups in (counts.per_lang, counts.per_domain):
            merged = ConfusionCounts(N_LABELS)
            for part in groups.values():
                merged.add(part)
            np.testing.assert_array_equal(merged.tp, counts.tp)
            np.testing.assert_array_equal(merged.fn, counts.fn)
            self.assertEqual(merged.positions, counts.positions)

    def test_length_mismatch(self):
        """Test a prediction of the wrong length raises LabelError"""
        seq = random_sequence(np.random.default_rng(2))

        with self.assertRaises(LabelError):
            accumulate(ConfusionCounts(N_LABELS), seq, [0])

    def test_unknown_label(self):
        """Test a predicted id outside the registry raises LabelError"""
        seq = random_sequence(np.random.default_rng(2))

        with self.assertRaises(LabelError):
            accumulate(ConfusionCounts(N_LABELS), seq, [N_LABELS] * len(seq))


class MacroF1Tests(SimpleTestCase):
    """Test macro_f1 and class_scores"""

    def test_closed_forms(self):
        """Test hand-computed macro values"""
        perfect = counts_from({1: 3, 2: 1}, {}, {})
        mixed = counts_from({1: 1, 2: 1}, {2: 1}, {2: 1})

        self.assertEqual(macro_f1(perfect), 1.0)
        self.assertEqual(macro_f1(mixed), 0.75)
        self.assertEqual(class_scores(mixed, 2), (0.5, 0.5, 0.5))

    def test_random_tables_against_oracle(self):
        """Test 1000 random tables against a direct formula"""
        rng = np.random.default_rng(3)
        classes = range(1, N_LABELS)
        for _ in range(1000):
            tp, fp, fn = (rng.integers(0, 5, N_LABELS) for _ in range(3))
            tp[0] = fp[0] = fn[0] = 0
            counts = ConfusionCounts(N_LABELS, tp=tp, fp=fp, fn=fn)
            subset = [c for c in classes if rng.random() < 0.5] or [1]

            for chosen in (None, subset):
                expected = direct_macro(tp, fp, fn, chosen or classes)
                got = macro_f1(counts, chosen)
                if expected is None:
                    self.assertIsNone(got)
                else:
                    self.assertLess(abs(got - expected), 1e-12)

    def test_singleton_subset(self):
        """Test a one-class subset equals that class's F1"""
        counts = counts_from({4: 2}, {4: 1}, {4: 3})

        self.assertEqual(macro_f1(counts, {4}), class_scores(counts, 4)[2])

    def test_permutation_invariance(self):
        """Test relabelling the classes does not change the macro"""
        rng = np.random.default_rng(4)
        tp, fp, fn = (rng.integers(0, 6, N_LABELS) for _ in range(3))
        tp[0] = fp[0] = fn[0] = 0
        perm = np.concatenate([[0], 1 + rng.permutation(N_LABELS - 1)])
        counts = ConfusionCounts(N_LABELS, tp=tp, fp=fp, fn=fn)
        shuffled = ConfusionCounts(N_LABELS, tp=tp[perm], fp=fp[perm],
                                   fn=fn[perm])

        self.assertAlmostEqual(macro_f1(counts), macro_f1(shuffled),
                               places=12)

    def test_all_o_predictions(self):
        """Test predicting O everywhere scores zero"""
        seq = TaggedSequence(lang='en', ids=(1, 2, 3), labels=(1, 0, 2),
                             word_final=(True, True, True))
        counts = accumulate(ConfusionCounts(N_LABELS), seq, [0, 0, 0])

        self.assertEqual(macro_f1(counts), 0.0)

    def test_no_support(self):
        """Test None when no class occurs in references or predictions"""
        counts = ConfusionCounts(N_LABELS)

        self.assertIsNone(macro_f1(counts))
        self.assertEqual(macro_f1(counts, include_zero_support=True), 0.0)

    def test_include_zero_support(self):
        """Test absent classes pull the macro down when included"""
        counts = counts_from({1: 1}, {}, {})

        self.assertEqual(macro_f1(counts, {1, 2}), 1.0)
        self.assertEqual(
            macro_f1(counts, {1, 2}, include_zero_support=True), 0.5)

    def test_fixing_an_error_never_hurts(self):
        """Test turning a false negative into a true positive"""
        rng = np.random.default_rng(5)
        for _ in range(200):
            tp, fp, fn = (rng.integers(0, 4, N_LABELS) for _ in range(3))
            tp[0] = fp[0] = fn[0] = 0
            label_id = int(rng.integers(1, N_LABELS))
            fn[label_id] += 1
            before = macro_f1(ConfusionCounts(N_LABELS, tp=tp.copy(),
                                              fp=fp, fn=fn.copy()))
            tp[label_id] += 1
            fn[label_id] -= 1
            after = macro_f1(ConfusionCounts(N_LABELS, tp=tp, fp=fp, fn=fn))

            self.assertGreaterEqual(after + 1e-12, before)

    def test_bad_subsets(self):
        """Test empty subsets and O are rejected"""
        counts = ConfusionCounts(N_LABELS)

        with self.assertRaises(ValueError):
            macro_f1(counts, set())
        with self.assertRaises(ValueError):
            macro_f1(counts, {0, 1})

    def test_focus_is_registry_default(self):
        """Test the default focus set is the nine leading classes"""
        registry = default_registry()

        self.assertEqual(registry.focus, frozenset(range(1, 10)))
