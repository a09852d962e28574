"""Generate a synthetic punctuated corpus"""
from dataclasses import replace

from core.commands import CadenceCommand
from core.exceptions import ConfigError
from datapipe import languages
from datapipe.corpus import file_digest, write_jsonl
from datapipe.synth import default_spec, synth_generate


class Command(CadenceCommand):
    help = 'Write a synthetic multilingual corpus as JSONL'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', required=True, help='corpus JSONL path')
        parser.add_argument('--languages',
                            help='comma separated codes (default: all)')
        parser.add_argument('--sentences', type=int,
                            help='sentences per language')

    def run(self, options, config, seed, rng):
        synth = config['synth']
        if options['languages']:
            codes = options['languages'].split(',')
        else:
            codes = synth.get('languages') or languages.codes()
        sentences = options['sentences'] or synth['sentences']
        if sentences < 1:
            raise ConfigError('sentences must be positive', 'synth.sentences')

        specs = [replace(default_spec(code),
                         lexicon_size=synth['lexicon_size'],
                         disfluency=synth['disfluency'])
                 for code in codes]
        records = synth_generate(specs, seed, sentences)
        write_jsonl(records, options['out'])
        return {
            'out': options['out'],
            'records': len(records),
            'languages': codes,
            'sha256': file_digest(options['out']),
        }
