"""Score a fine-tuned checkpoint on a punctuated corpus"""
from core.commands import CadenceCommand, load_tagger
from datapipe.corpus import file_digest, read_corpus
from evaluator.report import evaluate_corpus, write_report
from model.checkpoint import checkpoint_digest


class Command(CadenceCommand):
    help = 'Per-class and macro F1 of a fine-tuned model'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--model', required=True)
        parser.add_argument('--corpus', required=True,
                            help='punctuated reference corpus JSONL')
        parser.add_argument('--vocab', required=True)
        parser.add_argument('--registry', help='label registry JSON')
        parser.add_argument('--focus-only', action='store_true',
                            help='score the focus classes only')
        parser.add_argument('--per-lang', action='store_true',
                            help='include the per-language breakdown')
        parser.add_argument('--report', help='report JSON path')

    def run(self, options, config, seed, rng):
        vocab = self.vocab(options)
        registry = self.registry(options)
        checkpoint = load_tagger(options['model'], vocab, registry)
        records = read_corpus(options['corpus'])
        report = evaluate_corpus(
            checkpoint.params, records, registry, vocab,
            focus_only=options['focus_only'],
            per_lang=options['per_lang'],
            include_zero_support=config['eval']['include_zero_support'],
            meta={'checkpoint': checkpoint_digest(options['model']),
                  'corpus': file_digest(options['corpus'])},
            policy=config['data']['unregistered_policy'],
        )
        if options['report']:
            write_report(report, options['report'])

        summary = {key: report[key] for key in (
            'macro_focus', 'macro_all', 'macro_focus_lang_avg',
            'macro_all_lang_avg', 'positions') if key in report}
        summary['report'] = options['report']
        return summary
