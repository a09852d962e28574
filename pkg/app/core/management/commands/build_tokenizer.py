"""Train the subword vocabulary on a corpus"""
from core.commands import CadenceCommand
from datapipe.corpus import read_corpus
from tokenizer.vocab import save_vocab, train_vocab


class Command(CadenceCommand):
    help = 'Train a byte-fallback subword vocabulary'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--corpus', required=True,
                            help='corpus JSONL with {lang, text}')
        parser.add_argument('--out', required=True, help='vocab JSON path')
        parser.add_argument('--vocab-size', type=int,
                            help='target vocabulary size')

    def run(self, options, config, seed, rng):
        records = read_corpus(options['corpus'])
        target = options['vocab_size'] or config['tokenizer']['vocab_size']
        vocab = train_vocab((r['text'] for r in records), target)
        save_vocab(vocab, options['out'])
        return {
            'out': options['out'],
            'size': vocab.size,
            'merges': len(vocab.merges),
            'sha256': vocab.digest(),
        }
