"""
Checkpoint files.

Layout: the magic bytes ``CDNC``, a little-endian u32 format version, a u32
header length, the UTF-8 JSON header, then the tensor blobs as little-endian
float32. The header holds the model config, the vocab and registry hashes,
the training stage and a name/shape/offset table for the blobs (offsets
count from the first blob byte).
"""
import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from core.exceptions import (
    CheckpointMismatchError,
    ConfigError,
    InputError,
    ModelError,
)
from model.config import ModelConfig
from model.params import ModelParams

logger = logging.getLogger(__name__)

MAGIC = b'CDNC'
FORMAT_VERSION = 1
PRETRAINED = 'pretrained'
FINETUNED = 'finetuned'
STAGES = (PRETRAINED, FINETUNED)

_PREFIX = struct.Struct('<4sII')


@dataclass(frozen=True)
class Checkpoint:
    params: ModelParams
    stage: str
    vocab_hash: str
    registry_hash: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ModelError(f'unknown training stage {self.stage!r}')

    def check_compatible(self, vocab=None, registry=None):
        """Raise CheckpointMismatchError when the files disagree"""
        if vocab is not None and vocab.digest() != self.vocab_hash:
            raise CheckpointMismatchError(
                'vocabulary does not match the checkpoint',
                expected=self.vocab_hash, found=vocab.digest())
        if vocab is not None and vocab.size != self.params.config.vocab_size:
            raise CheckpointMismatchError(
                f'vocabulary has {vocab.size} tokens, model expects '
                f'{self.params.config.vocab_size}')
        if registry is not None and registry.digest() != self.registry_hash:
            raise CheckpointMismatchError(
                'label registry does not match the checkpoint',
                expected=self.registry_hash, found=registry.digest())


def to_bytes(checkpoint):
    tensors = checkpoint.params.tensors
    table, blobs, offset = [], [], 0
    for name in sorted(tensors):
        blob = np.ascontiguousarray(tensors[name], dtype='<f4').tobytes()
        table.append({
            'name': name,
            'shape': list(tensors[name].shape),
            'offset': offset,
            'nbytes': len(blob),
        })
        blobs.append(blob)
        offset += len(blob)
    header = {
        'config': checkpoint.params.config.to_dict(),
        'vocab_hash': checkpoint.vocab_hash,
        'registry_hash': checkpoint.registry_hash,
        'stage': checkpoint.stage,
        'meta': checkpoint.meta,
        'tensors': table,
    }
    raw = json.dumps(header, sort_keys=True, ensure_ascii=False)
    raw = raw.encode('utf-8')
    prefix = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(raw))
    return prefix + raw + b''.join(blobs)


def from_bytes(data, source='checkpoint'):
    if len(data) < _PREFIX.size:
        raise InputError(f'{source} is truncated')
    magic, version, size = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise InputError(f'{source} is not a checkpoint file')
    if version != FORMAT_VERSION:
        raise CheckpointMismatchError(
            f'{source} has format version {version}, '
            f'expected {FORMAT_VERSION}')
    start = _PREFIX.size + size
    try:
        header = json.loads(data[_PREFIX.size:start].decode('utf-8'))
        config = ModelConfig.from_dict(header['config'])
        table = header['tensors']
    except (ValueError, KeyError, TypeError, ConfigError) as exc:
        raise InputError(f'{source} has a malformed header: {exc}') from exc

    tensors = {}
    for entry in table:
        lo = start + entry['offset']
        hi = lo + entry['nbytes']
        shape = tuple(entry['shape'])
        if hi > len(data) or entry['nbytes'] != 4 * int(np.prod(shape)):
            raise InputError(f'{source}: tensor {entry["name"]} is truncated')
        tensors[entry['name']] = (
            np.frombuffer(data[lo:hi], dtype='<f4')
            .astype(np.float64)
            .reshape(shape)
        )
    try:
        params = ModelParams(config, tensors)
    except ModelError as exc:
        raise CheckpointMismatchError(
            f'{source} does not match its config: {exc.detail}') from exc
    return Checkpoint(
        params=params,
        stage=header.get('stage', PRETRAINED),
        vocab_hash=header.get('vocab_hash', ''),
        registry_hash=header.get('registry_hash', ''),
        meta=header.get('meta', {}),
    )


def save_checkpoint(checkpoint, path):
    data = to_bytes(checkpoint)
    Path(path).write_bytes(data)
    logger.info('Saved %s checkpoint to %s (%d bytes)', checkpoint.stage,
                path, len(data))
    return hashlib.sha256(data).hexdigest()


def load_checkpoint(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f'cannot read checkpoint {path}: {exc}') from exc
    checkpoint = from_bytes(data, source=str(path))
    logger.debug('Loaded %s checkpoint from %s', checkpoint.stage, path)
    return checkpoint


def checkpoint_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
