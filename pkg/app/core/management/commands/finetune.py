"""Fine-tune a pretrained checkpoint as a punctuation tagger"""
from core.commands import CadenceCommand, add_state_arguments, state_saver
from core.exceptions import UsageError
from datapipe.corpus import group_by_lang, read_prepared
from model.checkpoint import (
    FINETUNED,
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from model.config import BIDIRECTIONAL, ModelConfig
from model.params import ModelParams, init_params
from trainer.loops import JsonlLog, finetune, start_finetune
from trainer.optim import OptimizerConfig
from trainer.state import load_state


class Command(CadenceCommand):
    help = 'Replace the language-model head and train the tagging head'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--model', help='pretrained checkpoint')
        parser.add_argument('--from-scratch', action='store_true',
                            help='start from random weights instead')
        parser.add_argument('--data', required=True,
                            help='prepared JSONL from the prepare command')
        parser.add_argument('--vocab', required=True)
        parser.add_argument('--registry', help='label registry JSON')
        parser.add_argument('--out', required=True, help='checkpoint path')
        parser.add_argument('--log', help='training log JSONL path')
        add_state_arguments(parser)

    def _base_params(self, options, config, vocab, registry, rng):
        if options['from_scratch']:
            model_cfg = ModelConfig.from_settings(
                config['model'], vocab.size, registry.size
            ).with_mode(BIDIRECTIONAL)
            return init_params(model_cfg, rng)
        if not options['model']:
            raise UsageError('--model is required unless --from-scratch')
        checkpoint = load_checkpoint(options['model'])
        checkpoint.check_compatible(vocab=vocab, registry=registry)
        params = checkpoint.params
        return ModelParams(params.config.with_mode(BIDIRECTIONAL),
                           params.tensors)

    def run(self, options, config, seed, rng):
        vocab = self.vocab(options)
        registry = self.registry(options)
        settings = config['finetune']
        cfg = OptimizerConfig.from_settings(settings['optimizer'])
        data = group_by_lang(read_prepared(options['data']))

        if options['resume']:
            state = load_state(options['resume'])
        else:
            params = self._base_params(options, config, vocab, registry, rng)
            state = start_finetune(params, registry.size,
                                   settings['head_init_scale'], rng)

        on_step = state_saver(options['state'], settings['save_every'])
        log = JsonlLog(options['log']) if options['log'] else None
        try:
            state, records = finetune(
                state, data, cfg, settings['steps'],
                alpha=config['sampler']['alpha'], log=log, on_step=on_step,
                counts=config['sampler'].get('counts'))
        finally:
            if log is not None:
                log.close()

        checkpoint = Checkpoint(
            params=state.params,
            stage=FINETUNED,
            vocab_hash=vocab.digest(),
            registry_hash=registry.digest(),
            meta={'seed': seed, 'optimizer': cfg.to_dict(),
                  'steps': state.step},
        )
        digest = save_checkpoint(checkpoint, options['out'])
        return {
            'out': options['out'],
            'steps': state.step,
            'final_loss': records[-1]['loss'] if records else None,
            'sha256': digest,
        }
