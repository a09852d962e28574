"""Tests for the encoder forward and backward passes"""
import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ModelError
from model import transformer as tf
from model.config import BIDIRECTIONAL, CAUSAL, ModelConfig
from model.params import ModelParams, init_params, replace_head
from numcore.gradcheck import finite_diff_check
from numcore.matrix import IGNORE_INDEX, cross_entropy


def tiny_config(**kwargs):
    defaults = dict(vocab_size=40, n_labels=7, layers=2, d_model=32, heads=2,
                    d_ff=64, max_seq=16, init_scale=0.2)
    defaults.update(kwargs)
    return ModelConfig(**defaults)


def tagging_loss(config, ids, labels, mode=None):
    def loss_fn(tensors):
        params = ModelParams(config, tensors)
        hidden, cache = tf.forward_with_cache(params, ids, mode)
        loss, dlogits = cross_entropy(tf.tag_logits(params, hidden), labels)
        dhidden, head = tf.tag_head_backward(params, hidden, dlogits)
        return loss, tf.merge_grads(tf.backward(params, cache, dhidden), head)
    return loss_fn


def next_token_loss(config, ids, targets, mode=None):
    def loss_fn(tensors):
        params = ModelParams(config, tensors)
        hidden, cache = tf.forward_with_cache(params, ids, mode)
        loss, dlogits = cross_entropy(tf.mntp_logits(params, hidden), targets)
        dhidden, head = tf.mntp_head_backward(params, hidden, dlogits)
        return loss, tf.merge_grads(tf.backward(params, cache, dhidden), head)
    return loss_fn


class ForwardTests(SimpleTestCase):
    """Test forward"""

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.config = tiny_config()
        self.params = init_params(self.config, self.rng)

    def test_hidden_shape(self):
        """Test hidden states are positions x d_model"""
        hidden = tf.forward(self.params, [1, 2, 3])

        self.assertEqual(hidden.shape, (3, 32))

    def test_causal_prefix_unchanged(self):
        """Test causal hidden[0..t] ignores every later token"""
        ids = self.rng.integers(0, 40, size=12)
        base = tf.forward(self.params, ids, CAUSAL)

        for t in range(11):
            changed = ids.copy()
            changed[t + 1:] = self.rng.integers(0, 40, size=11 - t)
            hidden = tf.forward(self.params, changed, CAUSAL)
            np.testing.assert_array_equal(hidden[:t + 1], base[:t + 1])

    def test_length_one_modes_equal(self):
        """Test a single position gives the same output in both modes"""
        causal = tf.forward(self.params, [5], CAUSAL)
        bidirectional = tf.forward(self.params, [5], BIDIRECTIONAL)

        np.testing.assert_array_equal(causal, bidirectional)

    def test_bidirectional_sees_future(self):
        """Test changing the last token moves hidden[0]"""
        ids = np.array([3, 9, 14, 21, 30])
        changed = ids.copy()
        changed[-1] = 31

        before = tf.forward(self.params, ids, BIDIRECTIONAL)
        after = tf.forward(self.params, changed, BIDIRECTIONAL)

        self.assertGreater(np.abs(before[0] - after[0]).max(), 0.0)

    def test_causal_blind_to_future(self):
        """Test the same change leaves causal hidden[0] alone"""
        ids = np.array([3, 9, 14, 21, 30])
        changed = ids.copy()
        changed[-1] = 31

        before = tf.forward(self.params, ids, CAUSAL)
        after = tf.forward(self.params, changed, CAUSAL)

        np.testing.assert_array_equal(before[0], after[0])

    def test_random_suffix_changes(self):
        """Test 100 random models, sequences and suffix edits"""
        rng = np.random.default_rng(7)
        moved = 0
        for _ in range(100):
            params = init_params(tiny_config(layers=1, d_model=16, d_ff=32),
                                 rng)
            length = int(rng.integers(2, 13))
            ids = rng.integers(0, 40, size=length)
            t = int(rng.integers(0, length - 1))
            changed = ids.copy()
            changed[t + 1:] = (ids[t + 1:]
                               + rng.integers(1, 40, size=length - t - 1)) % 40

            np.testing.assert_array_equal(
                tf.forward(params, changed, CAUSAL)[:t + 1],
                tf.forward(params, ids, CAUSAL)[:t + 1])
            before = tf.forward(params, ids, BIDIRECTIONAL)[0]
            after = tf.forward(params, changed, BIDIRECTIONAL)[0]
            moved += bool(np.abs(before - after).max() > 0.0)

        self.assertGreaterEqual(moved, 99)

    def test_mode_defaults_to_config(self):
        """Test the config's attention mode is used when none is given"""
        params = init_params(tiny_config(attention_mode=CAUSAL),
                             np.random.default_rng(1))
        ids = [4, 8, 15, 16]

        np.testing.assert_array_equal(tf.forward(params, ids),
                                      tf.forward(params, ids, CAUSAL))

    def test_permutation_equivariance_without_rope(self):
        """Test bidirectional outputs permute with inputs when rope is off"""
        params = init_params(tiny_config(rope=False),
                             np.random.default_rng(2))
        ids = np.array([1, 7, 19, 23, 2, 38])
        perm = np.array([3, 0, 5, 1, 4, 2])

        hidden = tf.forward(params, ids, BIDIRECTIONAL)
        permuted = tf.forward(params, ids[perm], BIDIRECTIONAL)

        np.testing.assert_allclose(permuted, hidden[perm], rtol=0,
                                   atol=1e-12)

    def test_rope_breaks_permutation(self):
        """Test rotary encoding makes outputs position dependent"""
        ids = np.array([1, 7, 19, 23])
        perm = np.array([3, 2, 1, 0])

        hidden = tf.forward(self.params, ids, BIDIRECTIONAL)
        permuted = tf.forward(self.params, ids[perm], BIDIRECTIONAL)

        self.assertGreater(np.abs(permuted - hidden[perm]).max(), 1e-9)

    def test_too_long(self):
        """Test sequences over max_seq raise ModelError"""
        with self.assertRaises(ModelError):
            tf.forward(self.params, [1] * 17)

    def test_invalid_token(self):
        """Test ids outside the vocabulary raise ModelError"""
        with self.assertRaises(ModelError):
            tf.forward(self.params, [1, 40])
        with self.assertRaises(ModelError):
            tf.forward(self.params, [-1])

    def test_empty(self):
        """Test an empty sequence raises ModelError"""
        with self.assertRaises(ModelError):
            tf.forward(self.params, [])

    def test_pure(self):
        """Test forward leaves the parameters untouched"""
        before = {k: v.copy() for k, v in self.params.tensors.items()}

        tf.forward(self.params, [1, 2, 3, 4])

        for name, value in before.items():
            np.testing.assert_array_equal(self.params[name], value)


class HeadTests(SimpleTestCase):
    """Test the language-model and tagging heads"""

    def setUp(self):
        self.config = tiny_config()
        self.params = init_params(self.config, np.random.default_rng(3))

    def test_mntp_shape(self):
        """Test MNTP logits are positions x vocab"""
        hidden = tf.forward(self.params, [1, 2, 3])

        self.assertEqual(tf.mntp_logits(self.params, hidden).shape, (3, 40))

    def test_zero_row_gives_zero_logits(self):
        """Test a zero hidden row scores every token 0"""
        hidden = np.zeros((2, 32))

        np.testing.assert_array_equal(tf.mntp_logits(self.params, hidden),
                                      np.zeros((2, 40)))

    def test_tag_head_missing(self):
        """Test tag_logits needs a tagging head"""
        with self.assertRaises(ModelError):
            tf.tag_logits(self.params, np.zeros((1, 32)))

    def test_lm_head_missing_after_replacement(self):
        """Test mntp_logits fails once the head is replaced"""
        tagged = replace_head(self.params, 7, 0.02, np.random.default_rng(0))

        with self.assertRaises(ModelError):
            tf.mntp_logits(tagged, np.zeros((1, 32)))

    def test_tag_shape_and_zero_row(self):
        """Test tag logits shape and zero-row behaviour"""
        tagged = replace_head(self.params, 7, 0.02, np.random.default_rng(0))
        hidden = tf.forward(tagged, [4, 5])

        self.assertEqual(tf.tag_logits(tagged, hidden).shape, (2, 7))
        np.testing.assert_array_equal(
            tf.tag_logits(tagged, np.zeros((1, 32))), np.zeros((1, 7)))

    def test_tied_uses_embedding(self):
        """Test tied MNTP logits equal hidden times embed transposed"""
        params = init_params(tiny_config(tie_embeddings=True),
                             np.random.default_rng(4))
        hidden = tf.forward(params, [1, 2])

        np.testing.assert_allclose(tf.mntp_logits(params, hidden),
                                   hidden @ params['embed'].T, atol=1e-12)


class RotaryTests(SimpleTestCase):
    """Test the rotary position helpers"""

    def test_backward_is_adjoint(self):
        """Test <rotate(x), y> equals <x, rotate_backward(y)>"""
        rng = np.random.default_rng(5)
        cos, sin = tf.rope_tables(6, 8, 10000.0)
        x = rng.normal(size=(6, 8))
        y = rng.normal(size=(6, 8))

        left = (tf.rotate(x, cos, sin) * y).sum()
        right = (x * tf.rotate_backward(y, cos, sin)).sum()

        self.assertAlmostEqual(left, right, places=12)

    def test_position_zero_is_identity(self):
        """Test position 0 is not rotated"""
        cos, sin = tf.rope_tables(1, 4, 10000.0)
        x = np.array([[1.0, 2.0, 3.0, 4.0]])

        np.testing.assert_array_equal(tf.rotate(x, cos, sin), x)


class GradientTests(SimpleTestCase):
    """Full-stack finite-difference checks on a 2-layer d=32 model"""

    def setUp(self):
        self.rng = np.random.default_rng(7)
        self.config = tiny_config()
        self.ids = self.rng.integers(0, 40, size=8)

    def _check(self, loss_fn, tensors):
        report = finite_diff_check(loss_fn, tensors, eps=1e-4, samples=96,
                                   rng=np.random.default_rng(8))
        self.assertLess(report.max_rel_err, 1e-4, report.worst_param)

    def test_tagging_loss(self):
        """Test tagging loss gradients in bidirectional mode"""
        params = replace_head(init_params(self.config, self.rng), 7, 0.2,
                              self.rng)
        labels = self.rng.integers(0, 7, size=8)

        self._check(tagging_loss(params.config, self.ids, labels),
                    params.tensors)

    def test_next_token_loss(self):
        """Test MNTP-style loss gradients with ignored positions"""
        params = init_params(self.config, self.rng)
        targets = np.full(8, IGNORE_INDEX)
        targets[[1, 4, 5]] = self.ids[[2, 5, 6]]

        self._check(next_token_loss(self.config, self.ids, targets),
                    params.tensors)

    def test_causal_mode(self):
        """Test gradients under the causal mask"""
        params = init_params(self.config, self.rng)
        targets = np.append(self.ids[1:], IGNORE_INDEX)

        self._check(next_token_loss(self.config, self.ids, targets, CAUSAL),
                    params.tensors)

    def test_tied_embeddings(self):
        """Test gradients reach the shared embedding from both ends"""
        config = tiny_config(tie_embeddings=True)
        params = init_params(config, self.rng)
        targets = np.append(self.ids[1:], IGNORE_INDEX)

        self._check(next_token_loss(config, self.ids, targets),
                    params.tensors)

    def test_without_rope(self):
        """Test gradients with rotary encoding disabled"""
        config = tiny_config(rope=False)
        params = init_params(config, self.rng)
        targets = np.append(self.ids[1:], IGNORE_INDEX)

        self._check(next_token_loss(config, self.ids, targets),
                    params.tensors)
