"""Turn a punctuated corpus into tagged fine-tuning sequences"""
from collections import Counter

from core.commands import CadenceCommand
from datapipe.corpus import file_digest, prepare_records, read_corpus, \
    write_jsonl


class Command(CadenceCommand):
    help = 'Extract labels, align them to subtokens and window the text'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--corpus', required=True)
        parser.add_argument('--vocab', required=True)
        parser.add_argument('--registry', help='label registry JSON')
        parser.add_argument('--out', required=True,
                            help='prepared JSONL path')

    def run(self, options, config, seed, rng):
        registry = self.registry(options)
        vocab = self.vocab(options)
        records = read_corpus(options['corpus'])
        seqs = prepare_records(records, registry, vocab,
                               config['model']['max_seq'],
                               config['data']['unregistered_policy'])
        write_jsonl(seqs, options['out'])
        return {
            'out': options['out'],
            'sequences': len(seqs),
            'per_lang': dict(sorted(Counter(s.lang for s in seqs).items())),
            'sha256': file_digest(options['out']),
        }
