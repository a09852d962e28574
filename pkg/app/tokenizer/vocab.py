"""
Byte-fallback BPE tokenizer with word-boundary tracking.

Ids 0..255 are the single bytes, then the special tokens, then one id per
learned merge in training order. Merges never cross whitespace: text is
split into words first and every word is encoded on its own, so the last
subtoken of each word can carry that word's punctuation label.
"""
import base64
import hashlib
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from core.exceptions import TokenizerError

logger = logging.getLogger(__name__)

VOCAB_VERSION = 1

SPECIAL_TOKENS = ('PAD', 'MASK', 'BOS')

BYTE_COUNT = 256

# Distinct words remembered per vocabulary
WORD_CACHE_SIZE = 1 << 16


@dataclass(frozen=True)
class Vocab:
    """Immutable vocabulary: token byte-strings, merges and special ids"""
    tokens: tuple
    merges: tuple
    specials: tuple = tuple(
        (name, BYTE_COUNT + i) for i, name in enumerate(SPECIAL_TOKENS)
    )
    _ranks: dict = field(default=None, init=False, repr=False,
                         compare=False)
    _encode_cached: object = field(default=None, init=False, repr=False,
                                   compare=False)

    def __post_init__(self):
        object.__setattr__(self, '_ranks', {
            tuple(pair): rank for rank, pair in enumerate(self.merges)
        })
        object.__setattr__(self, '_encode_cached',
                           lru_cache(maxsize=WORD_CACHE_SIZE)(self._merge))

    @property
    def size(self):
        return len(self.tokens)

    @property
    def special_ids(self):
        return dict(self.specials)

    @property
    def mask_id(self):
        return self.special_ids['MASK']

    @property
    def first_merge_id(self):
        return BYTE_COUNT + len(self.specials)

    def to_dict(self):
        return {
            'version': VOCAB_VERSION,
            'tokens': [base64.b64encode(t).decode('ascii')
                       for t in self.tokens],
            'merges': [list(pair) for pair in self.merges],
            'specials': dict(self.specials),
        }

    def digest(self):
        """sha256 of the canonical JSON form"""
        payload = json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')
        return hashlib.sha256(payload).hexdigest()

    def encode_word(self, word):
        """Token ids for one word given as bytes"""
        return self._encode_cached(word)

    def _merge(self, word):
        ids = list(word)
        while len(ids) > 1:
            best = None
            for pair in zip(ids, ids[1:]):
                rank = self._ranks.get(pair)
                if rank is not None and (best is None or rank < best):
                    best = rank
            if best is None:
                break
            left, right = self.merges[best]
            merged_id = self.first_merge_id + best
            out = []
            i = 0
            while i < len(ids):
                if (i + 1 < len(ids) and ids[i] == left
                        and ids[i + 1] == right):
                    out.append(merged_id)
                    i += 2
                else:
                    out.append(ids[i])
                    i += 1
            ids = out
        return tuple(ids)


@dataclass(frozen=True)
class Encoding:
    """Token ids with the word structure they came from"""
    ids: tuple = ()
    word_final: tuple = ()
    word_index: tuple = ()

    def __len__(self):
        return len(self.ids)

    @property
    def word_count(self):
        return sum(self.word_final)


def byte_vocab():
    """Vocabulary with no merges"""
    tokens = [bytes([b]) for b in range(BYTE_COUNT)]
    tokens += [f'<{name.lower()}>'.encode('ascii') for name in SPECIAL_TOKENS]
    return Vocab(tokens=tuple(tokens), merges=())


def split_words(text):
    """Whitespace-delimited words as bytes"""
    if isinstance(text, (bytes, bytearray)):
        return bytes(text).split()
    words = []
    for word in text.split():
        try:
            words.append(word.encode('utf-8', 'surrogateescape'))
        except UnicodeEncodeError:
            words.append(word.encode('utf-8', 'surrogatepass'))
    return words


def train_vocab(corpus, target_size):
    """
    Learn merges by greedy pair frequency.

    Ties go to the lexicographically smaller pair of byte-strings. Training
    stops at `target_size` tokens or when no pair occurs twice.
    """
    base = byte_vocab()
    if target_size < base.size:
        raise TokenizerError(
            f'target_size must be at least {base.size}, got {target_size}'
        )
    word_counts = Counter()
    for text in corpus:
        word_counts.update(split_words(text))
    if not word_counts:
        raise TokenizerError('cannot train a vocabulary on an empty corpus')

    tokens = list(base.tokens)
    merges = []
    words = [list(word) for word in sorted(word_counts)]
    counts = [word_counts[bytes(word)] for word in words]

    pair_counts = Counter()
    where = defaultdict(set)
    for idx, word in enumerate(words):
        for pair in zip(word, word[1:]):
            pair_counts[pair] += counts[idx]
            where[pair].add(idx)

    while len(tokens) < target_size and pair_counts:
        best = min(
            pair_counts,
            key=lambda p: (-pair_counts[p], tokens[p[0]], tokens[p[1]], p),
        )
        if pair_counts[best] < 2:
            break
        new_id = len(tokens)
        tokens.append(tokens[best[0]] + tokens[best[1]])
        merges.append(best)

        for idx in sorted(where.pop(best, ())):
            word = words[idx]
            for pair in zip(word, word[1:]):
                pair_counts[pair] -= counts[idx]
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
            merged = []
            i = 0
            while i < len(word):
                if i + 1 < len(word) and (word[i], word[i + 1]) == best:
                    merged.append(new_id)
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            words[idx] = merged
            for pair in zip(merged, merged[1:]):
                pair_counts[pair] += counts[idx]
                where[pair].add(idx)

    logger.info('Trained vocabulary: %d tokens, %d merges',
                len(tokens), len(merges))
    return Vocab(tokens=tuple(tokens), merges=tuple(merges))


def encode(text, vocab):
    """Encode text; whitespace only separates words and is not emitted"""
    ids, word_final, word_index = [], [], []
    for index, word in enumerate(split_words(text)):
        pieces = vocab.encode_word(word)
        ids.extend(pieces)
        word_final.extend([False] * (len(pieces) - 1) + [True])
        word_index.extend([index] * len(pieces))
    return Encoding(tuple(ids), tuple(word_final), tuple(word_index))


def decode_bytes(ids, vocab, word_final):
    """Concatenate token bytes with one space after each word end"""
    if len(ids) != len(word_final):
        raise TokenizerError(
            f'{len(ids)} ids but {len(word_final)} word_final flags'
        )
    special = set(vocab.special_ids.values())
    out = bytearray()
    last = len(ids) - 1
    for pos, (token_id, final) in enumerate(zip(ids, word_final)):
        if not 0 <= token_id < vocab.size or token_id in special:
            raise TokenizerError(f'invalid token id {token_id}')
        out += vocab.tokens[token_id]
        if final and pos != last:
            out += b' '
    return bytes(out)


def decode(ids, vocab, word_final):
    """Decode to text; undecodable bytes survive as surrogate escapes"""
    return decode_bytes(ids, vocab, word_final).decode(
        'utf-8', 'surrogateescape'
    )


def save_vocab(vocab, path):
    Path(path).write_text(
        json.dumps(vocab.to_dict(), sort_keys=True, indent=1),
        encoding='utf-8',
    )


def load_vocab(path):
    """Read and validate a vocab file"""
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
        tokens = tuple(base64.b64decode(t) for t in data['tokens'])
        merges = tuple(tuple(pair) for pair in data['merges'])
        specials = tuple(sorted(data['specials'].items(),
                                key=lambda item: item[1]))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise TokenizerError(f'unreadable vocab file {path}: {exc}') from exc
    if data.get('version') != VOCAB_VERSION:
        raise TokenizerError(
            f'unsupported vocab version {data.get("version")}')

    vocab = Vocab(tokens=tokens, merges=merges, specials=specials)
    if [i for _, i in specials] != list(range(BYTE_COUNT,
                                              vocab.first_merge_id)):
        raise TokenizerError('special ids must follow the byte tokens')
    for b in range(BYTE_COUNT):
        if tokens[b] != bytes([b]):
            raise TokenizerError(f'token {b} is not the byte {b}')
    for rank, (left, right) in enumerate(merges):
        merged_id = vocab.first_merge_id + rank
        if (merged_id >= len(tokens) or left >= merged_id
                or right >= merged_id
                or tokens[merged_id] != tokens[left] + tokens[right]):
            raise TokenizerError(f'merge {rank} is inconsistent')
    if len(tokens) != vocab.first_merge_id + len(merges):
        raise TokenizerError('token count does not match merges')
    return vocab
