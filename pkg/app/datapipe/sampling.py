"""Temperature-weighted language sampling"""
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import ConfigError
from datapipe import languages


@dataclass(frozen=True)
class SamplerConfig:
    """
    Draw language l with probability n_l^alpha / sum_k n_k^alpha.

    alpha = 1 samples proportionally to corpus size; smaller values
    oversample low-resource languages.
    """
    counts: dict = field(default_factory=dict)
    alpha: float = 0.3

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ConfigError('alpha must be in (0, 1]', 'sampler.alpha')
        if not self.counts:
            raise ConfigError('sampler needs at least one language',
                              'sampler.counts')
        for lang, count in self.counts.items():
            if count <= 0:
                raise ConfigError(f'count for {lang} must be positive',
                                  f'sampler.counts.{lang}')

    @classmethod
    def from_sizes(cls, data, alpha):
        """Counts taken from the number of examples per language"""
        return cls(counts={lang: len(items) for lang, items in data.items()
                           if len(items)},
                   alpha=alpha)

    @classmethod
    def from_table(cls, data, alpha, counts=None):
        """
        Counts from the language table for every language with data.

        `counts` overrides single entries; languages missing from both
        fall back to their number of examples.
        """
        known = dict(languages.default_counts(), **(counts or {}))
        sizes = cls.from_sizes(data, alpha).counts
        return cls(counts={lang: known.get(lang, n)
                           for lang, n in sizes.items()},
                   alpha=alpha)

    def restricted(self, subset):
        """The same sampler over a subset of its languages"""
        counts = {lang: n for lang, n in self.counts.items()
                  if lang in subset}
        return SamplerConfig(counts=counts, alpha=self.alpha)

    def probabilities(self):
        """Sampling probability per language, in sorted language order"""
        weights = {lang: float(self.counts[lang]) ** self.alpha
                   for lang in sorted(self.counts)}
        total = sum(weights.values())
        return {lang: w / total for lang, w in weights.items()}


def draw_index(probabilities, rng):
    """Index of the bucket one uniform from `rng` falls into"""
    edges = np.cumsum(probabilities)
    return int(np.searchsorted(edges, rng.random(), side='right'))


def sample_language(cfg, rng):
    """Draw one language code using a single uniform from `rng`"""
    probs = cfg.probabilities()
    options = list(probs)
    index = draw_index(list(probs.values()), rng)
    return options[min(index, len(options) - 1)]
