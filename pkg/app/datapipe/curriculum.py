"""Language curriculum for continual pretraining"""
from collections import namedtuple
from dataclasses import dataclass

from core.exceptions import ConfigError
from datapipe import languages

PhaseAt = namedtuple('PhaseAt', ['index', 'mask_ratio', 'languages'])

# Share of total steps per phase; the last phase is the consolidation mix.
DEFAULT_SHARES = (0.30, 0.40, 0.20, 0.10)
DEFAULT_RATIOS = (0.30, 0.25, 0.15, 0.25)


@dataclass(frozen=True)
class Phase:
    languages: frozenset
    step_budget: int
    mask_ratio: float


@dataclass(frozen=True)
class CurriculumPlan:
    phases: tuple

    def __post_init__(self):
        if not self.phases:
            raise ConfigError('curriculum needs at least one phase',
                              'pretrain.phases')
        for i, phase in enumerate(self.phases):
            if not 0 < phase.mask_ratio < 1:
                raise ConfigError('mask_ratio must be in (0, 1)',
                                  f'pretrain.phases.{i}.mask_ratio')
            if phase.step_budget <= 0:
                raise ConfigError('step_budget must be positive',
                                  f'pretrain.phases.{i}.step_budget')
            if not phase.languages:
                raise ConfigError('phase has no languages',
                                  f'pretrain.phases.{i}.languages')
        union = frozenset().union(*(p.languages for p in self.phases))
        if self.phases[-1].languages != union:
            raise ConfigError('final phase must cover every language',
                              f'pretrain.phases.{len(self.phases) - 1}'
                              '.languages')

    @property
    def total_steps(self):
        return sum(phase.step_budget for phase in self.phases)

    def boundaries(self):
        """Half-open [start, end) step interval of each phase"""
        start = 0
        out = []
        for phase in self.phases:
            out.append((start, start + phase.step_budget))
            start += phase.step_budget
        return out

    def to_dict(self):
        return {'phases': [
            {'languages': sorted(p.languages),
             'step_budget': p.step_budget,
             'mask_ratio': p.mask_ratio}
            for p in self.phases
        ]}


def default_plan(total_steps, tiers=None):
    """
    Four phases: foundation, mid/high resource, low resource, then all
    languages for the final 10% of steps.
    """
    if total_steps < 10:
        raise ConfigError('default plan needs at least 10 steps',
                          'pretrain.total_steps')
    if tiers is None:
        tiers = [languages.codes(1), languages.codes(2), languages.codes(3)]
    tiers = [frozenset(t) for t in tiers]
    final = round(total_steps * DEFAULT_SHARES[3])
    first = round(total_steps * DEFAULT_SHARES[0])
    second = round(total_steps * DEFAULT_SHARES[1])
    third = total_steps - final - first - second
    budgets = (first, second, third, final)
    sets = tiers + [frozenset().union(*tiers)]
    return CurriculumPlan(tuple(
        Phase(languages=langs, step_budget=budget, mask_ratio=ratio)
        for langs, budget, ratio in zip(sets, budgets, DEFAULT_RATIOS)
    ))


def phase_at(plan, step):
    """Phase whose [start, end) interval contains `step`"""
    if not 0 <= step < plan.total_steps:
        raise ValueError(
            f'step {step} outside plan of {plan.total_steps} steps'
        )
    for index, (phase, (start, end)) in enumerate(
            zip(plan.phases, plan.boundaries())):
        if start <= step < end:
            return PhaseAt(index, phase.mask_ratio, phase.languages)
