"""Continual MNTP pretraining under the language curriculum"""
from core.commands import CadenceCommand, add_state_arguments, state_saver
from datapipe import languages
from datapipe.corpus import encode_windows, read_corpus
from datapipe.curriculum import CurriculumPlan, Phase, default_plan
from model.checkpoint import PRETRAINED, Checkpoint, save_checkpoint
from model.config import BIDIRECTIONAL, ModelConfig
from model.params import init_params
from trainer.loops import JsonlLog, pretrain
from trainer.optim import OptimizerConfig
from trainer.state import TrainState, load_state


def build_plan(settings, langs):
    """Configured phases, or the default plan over the tiers present"""
    if settings.get('phases'):
        return CurriculumPlan(tuple(
            Phase(languages=frozenset(p['languages']),
                  step_budget=p['step_budget'],
                  mask_ratio=p['mask_ratio'])
            for p in settings['phases']
        ))
    tiers = [[code for code in languages.codes(tier) if code in langs]
             for tier in (1, 2, 3)]
    return default_plan(settings['total_steps'], tiers=tiers)


class Command(CadenceCommand):
    help = 'Pretrain a bidirectional model with masked next token prediction'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--corpus', required=True)
        parser.add_argument('--vocab', required=True)
        parser.add_argument('--registry', help='label registry JSON')
        parser.add_argument('--out', required=True, help='checkpoint path')
        parser.add_argument('--log', help='training log JSONL path')
        add_state_arguments(parser)

    def run(self, options, config, seed, rng):
        vocab = self.vocab(options)
        registry = self.registry(options)
        settings = config['pretrain']
        max_seq = config['model']['max_seq']
        data = {}
        for record in read_corpus(options['corpus']):
            data.setdefault(record['lang'], []).extend(
                encode_windows(record['text'], vocab, max_seq))
        plan = build_plan(settings, set(data))
        cfg = OptimizerConfig.from_settings(settings['optimizer'])

        if options['resume']:
            state = load_state(options['resume'])
        else:
            model_cfg = ModelConfig.from_settings(
                config['model'], vocab.size, registry.size
            ).with_mode(BIDIRECTIONAL)
            state = TrainState.start(init_params(model_cfg, rng), rng)

        on_step = state_saver(options['state'], settings['save_every'])
        log = JsonlLog(options['log']) if options['log'] else None
        try:
            state, records = pretrain(
                state, plan, data, cfg, vocab.mask_id,
                alpha=config['sampler']['alpha'], log=log, on_step=on_step,
                counts=config['sampler'].get('counts'))
        finally:
            if log is not None:
                log.close()

        checkpoint = Checkpoint(
            params=state.params,
            stage=PRETRAINED,
            vocab_hash=vocab.digest(),
            registry_hash=registry.digest(),
            meta={'seed': seed, 'plan': plan.to_dict(),
                  'optimizer': cfg.to_dict(), 'steps': state.step},
        )
        digest = save_checkpoint(checkpoint, options['out'])
        return {
            'out': options['out'],
            'steps': state.step,
            'phases': len(plan.phases),
            'final_loss': records[-1]['loss'] if records else None,
            'sha256': digest,
        }
