"""
Synthetic multilingual punctuated corpora.

Each language draws words from its own character inventory. Marks attach
to lexicon entries ("lexical", so punctuation is learnable from the words
around it) or independently per occurrence ("random"). Either way the
per-word mark frequency follows the language's mark map.

Every language gets its own generator derived from the invocation seed and
its code, so a language's lexicon and sentences do not depend on which
other languages are generated alongside it.
"""
import unicodedata
import zlib
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import ConfigError
from datapipe import languages
from datapipe.sampling import draw_index

LEXICAL = 'lexical'
RANDOM = 'random'

SCRIPT_RANGES = {
    'latin': (0x0061, 0x007A),
    'devanagari': (0x0905, 0x0939),
    'bengali': (0x0985, 0x09B9),
    'gurmukhi': (0x0A05, 0x0A39),
    'gujarati': (0x0A85, 0x0AB9),
    'oriya': (0x0B05, 0x0B39),
    'tamil': (0x0B85, 0x0BB9),
    'telugu': (0x0C05, 0x0C39),
    'kannada': (0x0C85, 0x0CB9),
    'malayalam': (0x0D05, 0x0D39),
    'arabic': (0x0627, 0x064A),
    'ol_chiki': (0x1C5A, 0x1C77),
}

_DANDA = {'।': 0.08, ',': 0.06, '?': 0.02, ':': 0.01, '!': 0.01}
_PERIOD = {'.': 0.08, ',': 0.06, '?': 0.02, ':': 0.01}

SCRIPT_MARKS = {
    'latin': {'.': 0.08, ',': 0.06, '?': 0.02, ':': 0.01, '!': 0.01,
              ';': 0.01, '."': 0.01},
    'devanagari': _DANDA,
    'bengali': _DANDA,
    'gurmukhi': _DANDA,
    'oriya': _DANDA,
    'gujarati': _PERIOD,
    'tamil': _PERIOD,
    'telugu': _PERIOD,
    'kannada': _PERIOD,
    'malayalam': _PERIOD,
    'arabic': {'۔': 0.08, '،': 0.06, '؟': 0.02, ':': 0.01},
    'ol_chiki': {'᱾': 0.08, ',': 0.06, '?': 0.02, '᱿': 0.01},
}

LANGUAGE_MARKS = {
    'sa': dict(_DANDA, **{'॥': 0.01}),
}

DEFAULT_WORD_LENGTHS = {2: 1.0, 3: 2.0, 4: 2.0, 5: 1.0, 6: 1.0}


@dataclass(frozen=True)
class LanguageSpec:
    code: str
    inventory: str
    marks: dict = field(default_factory=dict)
    word_lengths: dict = field(
        default_factory=lambda: dict(DEFAULT_WORD_LENGTHS))
    sentence_words: tuple = (4, 12)
    lexicon_size: int = 500
    attach: str = LEXICAL
    parent: str = None
    overlap: float = 0.0
    disfluency: float = 0.0

    def validate(self):
        key = f'synth.languages.{self.code}'
        if not self.code:
            raise ConfigError('language code is empty', key)
        if not self.inventory:
            raise ConfigError('empty character inventory', f'{key}.inventory')
        for char in self.inventory:
            if char.isspace() or unicodedata.category(char)[0] == 'P':
                raise ConfigError(f'inventory holds {char!r}',
                                  f'{key}.inventory')
        if (not self.word_lengths
                or any(int(n) < 1 or w < 0
                       for n, w in self.word_lengths.items())
                or sum(self.word_lengths.values()) <= 0):
            raise ConfigError('bad word length distribution',
                              f'{key}.word_lengths')
        if any(p < 0 for p in self.marks.values()) \
                or sum(self.marks.values()) > 1:
            raise ConfigError('mark frequencies must be >= 0 and sum <= 1',
                              f'{key}.marks')
        lo, hi = self.sentence_words
        if not 1 <= lo <= hi:
            raise ConfigError('bad sentence length range',
                              f'{key}.sentence_words')
        if self.lexicon_size < 1:
            raise ConfigError('lexicon_size must be positive',
                              f'{key}.lexicon_size')
        if self.attach not in (LEXICAL, RANDOM):
            raise ConfigError(f'unknown attach mode {self.attach!r}',
                              f'{key}.attach')
        if not 0 <= self.overlap <= 1:
            raise ConfigError('overlap must be in [0, 1]', f'{key}.overlap')
        if not 0 <= self.disfluency < 1:
            raise ConfigError('disfluency must be in [0, 1)',
                              f'{key}.disfluency')

    @property
    def domain(self):
        return 'extempore' if self.disfluency > 0 else 'written'


def script_letters(script):
    lo, hi = SCRIPT_RANGES[script]
    return [chr(c) for c in range(lo, hi + 1)
            if unicodedata.category(chr(c)) in ('Lo', 'Ll')]


def default_spec(code, inventory_size=24):
    """Spec for a known language code; shared scripts get rotated slices"""
    lang = languages.BY_CODE.get(code)
    if lang is None:
        raise ConfigError(f'no default spec for language {code!r}',
                          'synth.languages')
    letters = script_letters(lang.script)
    peers = [other.code for other in languages.LANGUAGES + languages.ZERO_SHOT
             if other.script == lang.script]
    offset = (peers.index(code) * 5) % len(letters)
    rotated = letters[offset:] + letters[:offset]
    marks = LANGUAGE_MARKS.get(code, SCRIPT_MARKS[lang.script])
    extra = {}
    if code == 'bho':
        extra = {'parent': 'hi', 'overlap': 0.8}
    return LanguageSpec(
        code=code,
        inventory=''.join(rotated[:inventory_size]),
        marks=dict(marks),
        **extra,
    )


def default_specs(codes=None):
    if codes is None:
        codes = languages.codes()
    return [default_spec(code) for code in codes]


def _language_rng(seed, code, stream):
    key = (zlib.crc32(code.encode('utf-8')), stream)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _mark_counts(marks, size):
    """Largest-remainder split of `size` lexicon entries across marks"""
    ordered = list(marks.items())
    exact = [p * size for _, p in ordered]
    counts = [int(np.floor(x)) for x in exact]
    target = int(round(sum(exact)))
    order = sorted(range(len(ordered)),
                   key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:max(0, target - sum(counts))]:
        counts[i] += 1
    return [(mark, n) for (mark, _), n in zip(ordered, counts)]


def _new_words(spec, rng, count, taken):
    lengths = sorted(int(n) for n in spec.word_lengths)
    weights = np.array([spec.word_lengths[n] for n in lengths], dtype=float)
    weights /= weights.sum()
    inventory = list(spec.inventory)
    words = []
    attempts = 0
    while len(words) < count:
        attempts += 1
        if attempts > 100 * count + 1000:
            raise ConfigError(
                'inventory too small for the requested lexicon',
                f'synth.languages.{spec.code}.lexicon_size',
            )
        length = lengths[rng.choice(len(lengths), p=weights)]
        word = ''.join(inventory[i]
                       for i in rng.integers(0, len(inventory), size=length))
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


def build_lexicon(spec, seed, resolve):
    """List of (word, mark) pairs; `resolve(code)` gives a parent lexicon"""
    rng = _language_rng(seed, spec.code, 0)
    entries = []
    if spec.parent:
        shared = int(round(spec.overlap * spec.lexicon_size))
        entries = list(resolve(spec.parent)[:shared])
    taken = {word for word, _ in entries}
    fresh = _new_words(spec, rng, spec.lexicon_size - len(entries), taken)
    marks = [''] * len(fresh)
    if spec.attach == LEXICAL:
        slots = iter(rng.permutation(len(fresh)))
        for mark, n in _mark_counts(spec.marks, len(fresh)):
            for _ in range(n):
                marks[next(slots)] = mark
    return entries + list(zip(fresh, marks))


def _random_mark(spec, rng):
    options = list(spec.marks)
    index = draw_index([spec.marks[m] for m in options], rng)
    return options[index] if index < len(options) else ''


def synth_generate(specs, seed, sentences=200):
    """Return a list of {lang, text, domain} records, deterministic per seed"""
    by_code = {}
    for spec in specs:
        spec.validate()
        by_code[spec.code] = spec
    lexicons = {}

    def resolve(code):
        if code not in lexicons:
            spec = by_code.get(code) or default_spec(code)
            if spec.parent == code:
                raise ConfigError('language is its own parent',
                                  f'synth.languages.{code}.parent')
            lexicons[code] = build_lexicon(spec, seed, resolve)
        return lexicons[code]

    records = []
    for spec in specs:
        lexicon = resolve(spec.code)
        rng = _language_rng(seed, spec.code, 1)
        lo, hi = spec.sentence_words
        for _ in range(sentences):
            words = []
            for idx in rng.integers(0, len(lexicon),
                                    size=int(rng.integers(lo, hi + 1))):
                word, mark = lexicon[idx]
                if spec.attach == RANDOM:
                    mark = _random_mark(spec, rng)
                if spec.disfluency and rng.random() < spec.disfluency:
                    words.append(word)
                words.append(word + mark)
            records.append({
                'lang': spec.code,
                'text': ' '.join(words),
                'domain': spec.domain,
            })
    return records
