"""Restore punctuation line by line"""
import sys

from core.commands import CadenceCommand, load_tagger
from core.exceptions import InputError
from datapipe.labels import extract, render
from evaluator.predict import predict_word_labels


def read_lines(path):
    """Input lines without their line endings"""
    try:
        if path is None:
            return sys.stdin.read().splitlines()
        with open(path, encoding='utf-8') as fh:
            return fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f'cannot read {path or "stdin"}: {exc}') from exc


def punctuate_line(params, vocab, registry, line, policy):
    """Strip any marks already present and predict them again"""
    plain, _ = extract(line, registry, policy)
    if not plain:
        return ''
    return render(plain, predict_word_labels(params, vocab, plain), registry)


class Command(CadenceCommand):
    help = 'Punctuate text, one output line per input line'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--model', required=True)
        parser.add_argument('--vocab', required=True)
        parser.add_argument('--registry', help='label registry JSON')
        parser.add_argument('--input', help='UTF-8 text file (default stdin)')
        parser.add_argument('--out', help='output path (default stdout)')

    def summary_stream(self, options):
        # stdout carries the text itself when --out is not given
        return self.stdout if options['out'] else self.stderr

    def run(self, options, config, seed, rng):
        vocab = self.vocab(options)
        registry = self.registry(options)
        checkpoint = load_tagger(options['model'], vocab, registry)
        policy = config['data']['unregistered_policy']
        lines = read_lines(options['input'])
        out = [punctuate_line(checkpoint.params, vocab, registry, line,
                              policy)
               for line in lines]

        text = ''.join(line + '\n' for line in out)
        if options['out']:
            with open(options['out'], 'w', encoding='utf-8') as fh:
                fh.write(text)
        else:
            self.stdout.write(text, ending='')
        return {'out': options['out'], 'lines': len(out)}
