"""Corpus ingestion, preparation and JSONL files"""
import hashlib
import json
import logging
from collections import defaultdict
from pathlib import Path

from core.exceptions import InputError
from core.serializers import (
    CorpusRecordSerializer,
    TaggedSequenceSerializer,
    first_error,
)
from datapipe.labels import STRIP, TaggedSequence, align, extract
from tokenizer.vocab import encode, split_words

logger = logging.getLogger(__name__)


def _iter_lines(path):
    try:
        with open(path, encoding='utf-8') as fh:
            for number, line in enumerate(fh, start=1):
                if line.strip():
                    yield number, line
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f'cannot read {path}: {exc}') from exc


def _validated(path, serializer_class):
    for number, line in _iter_lines(path):
        try:
            data = json.loads(line)
        except ValueError as exc:
            raise InputError(f'{path}:{number}: invalid JSON: {exc}') from exc
        serializer = serializer_class(data=data)
        if not serializer.is_valid():
            key, message = first_error(serializer.errors)
            raise InputError(f'{path}:{number}: {key}: {message}')
        yield dict(serializer.validated_data)


def read_corpus(path):
    """Corpus records {lang, text, domain} in file order"""
    return list(_validated(path, CorpusRecordSerializer))


def read_prepared(path):
    return [TaggedSequence.from_dict(data)
            for data in _validated(path, TaggedSequenceSerializer)]


def write_jsonl(items, path):
    """Write dicts (or objects with to_dict) one per line"""
    with open(path, 'w', encoding='utf-8') as fh:
        for item in items:
            data = item.to_dict() if hasattr(item, 'to_dict') else item
            fh.write(json.dumps(data, ensure_ascii=False, sort_keys=True))
            fh.write('\n')


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def word_windows(plain, vocab, max_seq):
    """
    Split a plain text into word spans whose encodings fit `max_seq`.

    Returns (start, end) word index pairs. A word that alone exceeds
    `max_seq` tokens is skipped with a warning.
    """
    words = split_words(plain)
    spans = []
    start, used = 0, 0
    for index, word in enumerate(words):
        size = len(vocab.encode_word(word))
        if size > max_seq:
            logger.warning('Dropping a word of %d tokens (max_seq %d)',
                           size, max_seq)
            if start < index:
                spans.append((start, index))
            start, used = index + 1, 0
            continue
        if used + size > max_seq:
            spans.append((start, index))
            start, used = index, 0
        used += size
    if start < len(words):
        spans.append((start, len(words)))
    return spans


def prepare_document(record, registry, vocab, max_seq, policy=STRIP):
    """Tagged windows for one corpus record"""
    plain, labels = extract(record['text'], registry, policy)
    words = plain.split()
    out = []
    for start, end in word_windows(plain, vocab, max_seq):
        out.append(align(
            ' '.join(words[start:end]),
            labels[start:end],
            vocab,
            lang=record['lang'],
            domain=record.get('domain', 'written'),
        ))
    return out


def prepare_records(records, registry, vocab, max_seq, policy=STRIP):
    """Tagged sequences for every record, in input order"""
    out = []
    for record in records:
        out.extend(prepare_document(record, registry, vocab, max_seq, policy))
    return out


def encode_windows(text, vocab, max_seq):
    """Token id windows of raw text for language-model pretraining"""
    out = []
    for start, end in word_windows(text, vocab, max_seq):
        encoding = encode(' '.join(text.split()[start:end]), vocab)
        out.append(encoding.ids)
    return out


def group_by_lang(items, lang_of=lambda item: item.lang):
    grouped = defaultdict(list)
    for item in items:
        grouped[lang_of(item)].append(item)
    return dict(grouped)
