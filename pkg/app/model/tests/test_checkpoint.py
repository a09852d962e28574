"""Tests for checkpoint files"""
import json
import struct
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import CheckpointMismatchError, InputError
from datapipe.registry import default_registry, registry_from_dict
from model import checkpoint as ckpt
from model.config import ModelConfig
from model.params import init_params, replace_head
from tokenizer.vocab import byte_vocab, train_vocab


def make_checkpoint(stage=ckpt.PRETRAINED):
    vocab = byte_vocab()
    registry = default_registry()
    config = ModelConfig(vocab_size=vocab.size, n_labels=registry.size,
                         layers=1, d_model=8, heads=2, d_ff=16, max_seq=8)
    params = init_params(config, np.random.default_rng(0))
    if stage == ckpt.FINETUNED:
        params = replace_head(params, registry.size, 0.02,
                              np.random.default_rng(1))
    return ckpt.Checkpoint(
        params=params,
        stage=stage,
        vocab_hash=vocab.digest(),
        registry_hash=registry.digest(),
        meta={'seed': 4},
    )


class CheckpointFileTests(SimpleTestCase):
    """Test saving and loading checkpoints"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'model.cdnc'

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip(self):
        """Test a saved checkpoint loads with float32 precision"""
        original = make_checkpoint(ckpt.FINETUNED)

        ckpt.save_checkpoint(original, self.path)
        loaded = ckpt.load_checkpoint(self.path)

        self.assertEqual(loaded.params.config, original.params.config)
        self.assertEqual(loaded.stage, ckpt.FINETUNED)
        self.assertEqual(loaded.vocab_hash, original.vocab_hash)
        self.assertEqual(loaded.meta, {'seed': 4})
        for name, value in original.params.tensors.items():
            np.testing.assert_array_equal(
                loaded.params[name],
                value.astype(np.float32).astype(np.float64))

    def test_magic(self):
        """Test the file starts with the magic and a little-endian version"""
        data = ckpt.to_bytes(make_checkpoint())

        self.assertEqual(data[:4], b'CDNC')
        self.assertEqual(struct.unpack('<I', data[4:8])[0], 1)

    def test_deterministic_bytes(self):
        """Test equal checkpoints serialize to equal bytes"""
        self.assertEqual(ckpt.to_bytes(make_checkpoint()),
                         ckpt.to_bytes(make_checkpoint()))

    def test_not_a_checkpoint(self):
        """Test foreign files raise InputError"""
        self.path.write_bytes(b'PK\x03\x04 something else entirely')

        with self.assertRaises(InputError):
            ckpt.load_checkpoint(self.path)

    def test_missing_file(self):
        """Test a missing file raises InputError"""
        with self.assertRaises(InputError):
            ckpt.load_checkpoint(self.path)

    def test_shape_mismatch(self):
        """Test tensors disagreeing with the header config are rejected"""
        data = ckpt.to_bytes(make_checkpoint())
        _, version, size = struct.unpack_from('<4sII', data)
        header = json.loads(data[12:12 + size])
        header['config']['d_ff'] = 12
        raw = json.dumps(header).encode('utf-8')
        self.path.write_bytes(struct.pack('<4sII', b'CDNC', version, len(raw))
                              + raw + data[12 + size:])

        with self.assertRaises(CheckpointMismatchError) as ctx:
            ckpt.load_checkpoint(self.path)

        self.assertEqual(ctx.exception.exit_code, 2)

    def test_truncated_blob(self):
        """Test a truncated tensor section raises InputError"""
        self.path.write_bytes(ckpt.to_bytes(make_checkpoint())[:-10])

        with self.assertRaises(InputError):
            ckpt.load_checkpoint(self.path)


class CompatibilityTests(SimpleTestCase):
    """Test Checkpoint.check_compatible"""

    def test_matching_files(self):
        """Test matching vocab and registry pass"""
        make_checkpoint().check_compatible(byte_vocab(), default_registry())

    def test_vocab_mismatch(self):
        """Test a different vocabulary raises CheckpointMismatchError"""
        other = train_vocab(['aa aa aa'], 260)

        with self.assertRaises(CheckpointMismatchError):
            make_checkpoint().check_compatible(vocab=other)

    def test_registry_mismatch(self):
        """Test a different registry raises CheckpointMismatchError"""
        other = registry_from_dict({'classes': ['.', ','], 'focus': [0]})

        with self.assertRaises(CheckpointMismatchError):
            make_checkpoint().check_compatible(registry=other)
