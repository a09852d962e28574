"""Tests for the optimizer and learning-rate schedule"""
import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigError, TrainingError
from trainer.optim import (
    AdamWState,
    OptimizerConfig,
    adamw_step,
    clip_by_global_norm,
    lr_at,
)


class LrScheduleTests(SimpleTestCase):
    """Test lr_at"""

    def setUp(self):
        self.cfg = OptimizerConfig()

    def test_peak_at_warmup_end(self):
        """Test the rate peaks at the end of the 10% warmup"""
        self.assertEqual(lr_at(100, 1000, self.cfg), 2e-4)

    def test_final_step(self):
        """Test the last step reaches the final rate"""
        self.assertLess(abs(lr_at(999, 1000, self.cfg) - 1e-6), 1e-9)

    def test_decay_midpoint(self):
        """Test the middle of the decay is halfway between the rates"""
        # warmup 100, decay over steps 100..1000
        self.assertLess(abs(lr_at(550, 1001, self.cfg) - (2e-4 + 1e-6) / 2),
                        1e-9)

    def test_linear_warmup(self):
        """Test warmup rises linearly from zero"""
        self.assertEqual(lr_at(0, 1000, self.cfg), 0.0)
        self.assertAlmostEqual(lr_at(50, 1000, self.cfg), 1e-4, places=15)

    def test_continuous_and_monotone_after_warmup(self):
        """Test no jump at the junction and no increase afterwards"""
        rates = [lr_at(s, 1000, self.cfg) for s in range(1000)]

        self.assertLess(abs(rates[100] - rates[99]), 2e-4 / 100 + 1e-12)
        for before, after in zip(rates[100:], rates[101:]):
            self.assertLessEqual(after, before)

    def test_out_of_range(self):
        """Test steps at or past the total raise ValueError"""
        with self.assertRaises(ValueError):
            lr_at(1000, 1000, self.cfg)

    def test_tiny_run(self):
        """Test runs too short for warmup start at the peak"""
        self.assertEqual(lr_at(0, 5, self.cfg), 2e-4)
        self.assertAlmostEqual(lr_at(4, 5, self.cfg), 1e-6, places=15)


class OptimizerConfigTests(SimpleTestCase):
    """Test OptimizerConfig validation"""

    def test_final_above_peak(self):
        """Test final_lr >= peak_lr raises ConfigError"""
        with self.assertRaises(ConfigError):
            OptimizerConfig(peak_lr=1e-4, final_lr=1e-3)

    def test_from_settings(self):
        """Test betas arrive as a tuple from settings lists"""
        cfg = OptimizerConfig.from_settings({'betas': [0.8, 0.9],
                                             'batch_size': 4})

        self.assertEqual(cfg.betas, (0.8, 0.9))
        self.assertEqual(cfg.to_dict()['betas'], [0.8, 0.9])


class AdamWTests(SimpleTestCase):
    """Test adamw_step"""

    def test_zero_gradient_no_decay(self):
        """Test a zero gradient without decay leaves params unchanged"""
        cfg = OptimizerConfig(weight_decay=0.0)
        params = {'w': np.array([[1.5, -2.0]]), 'g_norm': np.ones(2)}
        grads = {name: np.zeros_like(v) for name, v in params.items()}

        new, _ = adamw_step(params, grads, AdamWState.zeros(params), 0.1, cfg)

        for name in params:
            np.testing.assert_array_equal(new[name], params[name])

    def test_first_step_identity(self):
        """Test the first bias-corrected step moves a scalar by -lr"""
        cfg = OptimizerConfig(weight_decay=0.0)
        params = {'w': np.array([[0.5]])}

        new, state = adamw_step(params, {'w': np.array([[1.0]])},
                                AdamWState.zeros(params), 0.1, cfg)

        self.assertAlmostEqual(float(new['w'][0, 0]), 0.4, places=7)
        self.assertEqual(state.step, 1)

    def test_norm_gains_not_decayed(self):
        """Test weight decay skips norm gains but shrinks matrices"""
        cfg = OptimizerConfig(weight_decay=0.1)
        params = {'layers.0.attn_norm': np.ones(3), 'w': np.ones((1, 3))}
        grads = {name: np.zeros_like(v) for name, v in params.items()}

        new, _ = adamw_step(params, grads, AdamWState.zeros(params), 0.1, cfg)

        np.testing.assert_array_equal(new['layers.0.attn_norm'], np.ones(3))
        np.testing.assert_allclose(new['w'], np.full((1, 3), 0.99))

    def test_convex_descent(self):
        """Test 100 steps on a quadratic strictly decrease the loss"""
        cfg = OptimizerConfig()
        target = np.array([[2.0, -3.0, 4.0]])
        params = {'w': np.zeros((1, 3))}
        state = AdamWState.zeros(params)
        losses = []
        for _ in range(100):
            diff = params['w'] - target
            losses.append(0.5 * float((diff * diff).sum()))
            params, state = adamw_step(params, {'w': diff}, state, 0.01, cfg)

        for before, after in zip(losses, losses[1:]):
            self.assertLess(after, before)

    def test_non_finite_gradient(self):
        """Test a NaN gradient aborts with the parameter name"""
        params = {'a': np.zeros((1, 1)), 'b': np.zeros((1, 2))}
        grads = {'a': np.zeros((1, 1)), 'b': np.array([[0.0, np.nan]])}

        with self.assertRaises(TrainingError) as ctx:
            adamw_step(params, grads, AdamWState.zeros(params), 0.1,
                       OptimizerConfig())

        self.assertEqual(ctx.exception.extra['param'], 'b')

    def test_inputs_untouched(self):
        """Test the update returns new arrays"""
        params = {'w': np.ones((2, 2))}
        state = AdamWState.zeros(params)

        adamw_step(params, {'w': np.ones((2, 2))}, state, 0.1,
                   OptimizerConfig())

        np.testing.assert_array_equal(params['w'], np.ones((2, 2)))
        np.testing.assert_array_equal(state.m['w'], np.zeros((2, 2)))
        self.assertEqual(state.step, 0)


class ClipTests(SimpleTestCase):
    """Test clip_by_global_norm"""

    def test_clips_large(self):
        """Test gradients above the limit scale down to it"""
        grads = {'a': np.array([[3.0]]), 'b': np.array([[4.0]])}

        clipped, norm = clip_by_global_norm(grads, 1.0)

        self.assertEqual(norm, 5.0)
        total = math.sqrt(sum(float((g * g).sum()) for g in clipped.values()))
        self.assertAlmostEqual(total, 1.0, places=12)

    def test_keeps_small(self):
        """Test gradients under the limit pass through"""
        grads = {'a': np.array([[0.3]])}

        clipped, _ = clip_by_global_norm(grads, 1.0)

        self.assertIs(clipped, grads)
