"""
Label extraction, rendering and subword alignment.

Every class is a trailing mark: it is rendered right after its word.
A word's trailing run of punctuation is matched greedily, longest class
first; whatever is left over, and any leading punctuation, is handled by
the unregistered policy.
"""
import unicodedata
from dataclasses import dataclass

from core.exceptions import LabelError
from datapipe.registry import O_ID
from tokenizer.vocab import encode

STRIP = 'strip'
KEEP_AS_TEXT = 'keep-as-text'
POLICIES = (STRIP, KEEP_AS_TEXT)


@dataclass(frozen=True)
class TaggedSequence:
    """One fine-tuning example: token ids with a label per position"""
    lang: str
    ids: tuple
    labels: tuple
    word_final: tuple
    domain: str = 'written'

    def __post_init__(self):
        if not len(self.ids) == len(self.labels) == len(self.word_final):
            raise LabelError('ids, labels and word_final differ in length')
        for label, final in zip(self.labels, self.word_final):
            if label != O_ID and not final:
                raise LabelError('labels may only sit on word-final tokens')

    def __len__(self):
        return len(self.ids)

    def to_dict(self):
        return {
            'lang': self.lang,
            'domain': self.domain,
            'ids': list(self.ids),
            'labels': list(self.labels),
            'word_final': [int(f) for f in self.word_final],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            lang=data['lang'],
            ids=tuple(int(i) for i in data['ids']),
            labels=tuple(int(i) for i in data['labels']),
            word_final=tuple(bool(f) for f in data['word_final']),
            domain=data.get('domain', 'written'),
        )


def is_punct(char, registry):
    return char in registry.chars or unicodedata.category(char)[0] == 'P'


def _split_token(token, registry):
    """Return (leading run, core, trailing run) of one whitespace token"""
    start = 0
    while start < len(token) and is_punct(token[start], registry):
        start += 1
    if start == len(token):
        return '', '', token
    end = len(token)
    while end > start and is_punct(token[end - 1], registry):
        end -= 1
    return token[:start], token[start:end], token[end:]


def match_run(run, registry):
    """
    Greedy longest-first match of a trailing run.

    Returns (label id, residue). The first class found scanning from the
    start of the run is the label; every other character is residue.
    """
    i = 0
    while i < len(run):
        for size in range(min(registry.longest, len(run) - i), 0, -1):
            label = registry.ids.get(run[i:i + size])
            if label is not None:
                return label, run[:i] + run[i + size:]
        i += 1
    return O_ID, run


def extract(text, registry, policy=STRIP):
    """
    Split punctuated text into (plain text, one label id per word).

    Punctuation-only tokens join the previous word's trailing run (or are
    dropped at the start of the text).
    """
    if policy not in POLICIES:
        raise LabelError(f'unknown unregistered policy {policy!r}')
    words = []
    for token in text.split():
        leading, core, trailing = _split_token(token, registry)
        if not core:
            if words:
                words[-1][2] += trailing
            continue
        if policy == KEEP_AS_TEXT:
            core = leading + core
        words.append([core, '', trailing])

    plain_words, labels = [], []
    for core, _, run in words:
        label, residue = match_run(run, registry)
        if policy == KEEP_AS_TEXT:
            core += residue
        plain_words.append(core)
        labels.append(label)
    return ' '.join(plain_words), labels


def render(plain, word_labels, registry):
    """Append each word's mark right after it"""
    words = plain.split()
    if len(words) != len(word_labels):
        raise LabelError(
            f'{len(words)} words but {len(word_labels)} labels'
        )
    return ' '.join(word + registry.mark(label)
                    for word, label in zip(words, word_labels))


def align(plain, word_labels, vocab, lang='', domain='written'):
    """Encode plain text and put each word's label on its last subtoken"""
    encoding = encode(plain, vocab)
    if encoding.word_count != len(word_labels):
        raise LabelError(
            f'{encoding.word_count} words but {len(word_labels)} labels'
        )
    labels = tuple(
        word_labels[index] if final else O_ID
        for index, final in zip(encoding.word_index, encoding.word_final)
    )
    return TaggedSequence(
        lang=lang,
        ids=encoding.ids,
        labels=labels,
        word_final=encoding.word_final,
        domain=domain,
    )
