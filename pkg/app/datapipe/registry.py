"""Punctuation label registry"""
import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from core.exceptions import ConfigError

REGISTRY_VERSION = 1

O_LABEL = 'O'
O_ID = 0

# Focus marks first: period, comma, colon, question mark, Devanagari danda,
# Urdu full stop, Urdu question mark, Arabic comma, Santali mucaad.
FOCUS_CLASSES = ('.', ',', ':', '?', '।', '۔', '؟',
                 '،', '᱾')

EXTRA_CLASSES = (
    '!', ';', '-', '…', '॥', '᱿', '؛',
    '"', "'", '”', '’', ')',
    '."', ',"', '?"', '!"', '।"',
    '...', '?!', '।।', '—',
)

DEFAULT_CLASSES = FOCUS_CLASSES + EXTRA_CLASSES


@dataclass(frozen=True)
class LabelRegistry:
    """
    Ordered punctuation classes. Id 0 is O; class i has id i + 1.
    `focus` holds label ids.
    """
    classes: tuple = DEFAULT_CLASSES
    focus: frozenset = frozenset(range(1, len(FOCUS_CLASSES) + 1))
    version: int = REGISTRY_VERSION

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ConfigError('registry classes must be unique', 'classes')
        for mark in self.classes:
            if not mark or len(mark) > 4 or any(c.isspace() for c in mark):
                raise ConfigError(f'invalid punctuation class {mark!r}',
                                  'classes')
        if not set(self.focus) <= set(range(1, self.size)):
            raise ConfigError('focus ids must name registry classes', 'focus')

    @property
    def size(self):
        """Number of labels including O"""
        return len(self.classes) + 1

    @property
    def labels(self):
        return (O_LABEL,) + tuple(self.classes)

    @cached_property
    def ids(self):
        return {mark: i + 1 for i, mark in enumerate(self.classes)}

    @cached_property
    def chars(self):
        """Every character used by some class"""
        return frozenset(''.join(self.classes))

    @cached_property
    def longest(self):
        return max(len(mark) for mark in self.classes)

    def label_id(self, mark):
        return self.ids[mark]

    def mark(self, label_id):
        return '' if label_id == O_ID else self.classes[label_id - 1]

    def to_dict(self):
        return {
            'version': self.version,
            'classes': list(self.classes),
            'focus': sorted(i - 1 for i in self.focus),
        }

    def digest(self):
        payload = json.dumps(self.to_dict(), sort_keys=True,
                             ensure_ascii=False).encode('utf-8')
        return hashlib.sha256(payload).hexdigest()


def default_registry():
    return LabelRegistry()


def registry_from_dict(data):
    """Registry from {version, classes, focus}; focus holds class indices"""
    try:
        classes = tuple(data['classes'])
        focus = frozenset(int(i) + 1 for i in data.get('focus', []))
        version = int(data.get('version', REGISTRY_VERSION))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f'malformed registry: {exc}', 'registry') from exc
    return LabelRegistry(classes=classes, focus=focus, version=version)


def load_registry(path):
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, ValueError) as exc:
        raise ConfigError(f'unreadable registry {path}: {exc}',
                          'registry') from exc
    return registry_from_dict(data)
