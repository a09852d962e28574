"""
Shared plumbing for the pipeline management commands.

Every command takes `--config` and `--seed`, turns pipeline errors into a
one-line JSON error with the matching exit code, and prints a one-line
JSON summary on success.
"""
import json
import logging
import sys

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from core.config import load_config
from core.exceptions import (
    CadenceError,
    CheckpointMismatchError,
    InputError,
    TokenizerError,
    UsageError,
)
from datapipe.registry import default_registry, load_registry
from model.checkpoint import load_checkpoint
from model.params import TAG_HEAD
from tokenizer.vocab import load_vocab
from trainer.state import save_state

logger = logging.getLogger(__name__)


class CadenceCommand(BaseCommand):
    """Base class; subclasses implement `run` and return a summary dict"""
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = self._usage_error
        return parser

    def _usage_error(self, message):
        error = UsageError(message)
        raise CommandError(error.as_json(), returncode=error.exit_code)

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self._fail(exc)

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except CommandError as exc:
            if not getattr(self, '_called_from_command_line', False):
                raise
            self._fail(exc)

    def _fail(self, exc):
        """Print the bare JSON error line and exit with its code"""
        self.stderr.write(str(exc))
        sys.exit(exc.returncode)

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON or TOML config file')
        parser.add_argument('--seed', type=int,
                            help='seed for every random draw')

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'])
            seed = options['seed']
            if seed is None:
                seed = config.get('seed', settings.CADENCE_DEFAULT_SEED)
            if seed < 0:
                raise UsageError('seed must be non-negative')
            summary = self.run(options, config, seed,
                               np.random.default_rng(seed))
        except CadenceError as exc:
            logger.error('%s failed: %s', self.name, exc.detail)
            raise CommandError(exc.as_json(),
                               returncode=exc.exit_code) from exc
        summary = dict(summary, command=self.name, seed=seed)
        self.summary_stream(options).write(
            json.dumps(summary, ensure_ascii=False, sort_keys=True))

    @property
    def name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def summary_stream(self, options):
        return self.stdout

    def run(self, options, config, seed, rng):
        raise NotImplementedError

    def registry(self, options):
        path = options.get('registry')
        return default_registry() if path is None else load_registry(path)

    def vocab(self, options):
        try:
            return load_vocab(options['vocab'])
        except TokenizerError as exc:
            raise InputError(exc.detail) from exc


def add_state_arguments(parser):
    parser.add_argument('--state',
                        help='training state file written every save_every '
                             'steps')
    parser.add_argument('--resume', help='training state to continue from')


def state_saver(path, every):
    """on_step hook writing the training state every `every` updates"""
    if not path or not every:
        return None

    def save(state, record):
        if state.step % every == 0:
            save_state(state, path)
    return save


def load_tagger(path, vocab, registry):
    """Fine-tuned checkpoint checked against the vocab and registry"""
    checkpoint = load_checkpoint(path)
    checkpoint.check_compatible(vocab=vocab, registry=registry)
    if TAG_HEAD not in checkpoint.params:
        raise CheckpointMismatchError(
            f'{path} has no tagging head; run finetune first')
    return checkpoint
