"""Errors raised across the pipeline"""
import json


class CadenceError(Exception):
    """Base error; carries the process exit code used by the commands"""
    kind = 'error'
    exit_code = 1

    def __init__(self, detail, **extra):
        super().__init__(detail)
        self.detail = detail
        self.extra = extra

    def as_dict(self):
        """Return the machine-readable form of the error"""
        data = {'error': self.kind, 'detail': str(self.detail)}
        data.update(self.extra)
        data['code'] = self.exit_code
        return data

    def as_json(self):
        return json.dumps(self.as_dict(), ensure_ascii=False, sort_keys=True)


class ShapeError(CadenceError):
    kind = 'shape'


class NumericError(CadenceError):
    kind = 'numeric'


class TokenizerError(CadenceError):
    kind = 'tokenizer'


class LabelError(CadenceError):
    kind = 'label'


class ModelError(CadenceError):
    kind = 'model'


class TrainingError(CadenceError):
    kind = 'training'


class CheckpointMismatchError(CadenceError):
    kind = 'checkpoint-mismatch'
    exit_code = 2


class InputError(CadenceError):
    kind = 'input'
    exit_code = 3


class UsageError(CadenceError):
    kind = 'usage'
    exit_code = 64


class ConfigError(CadenceError):
    """Invalid configuration; `key` is the dotted path of the bad entry"""
    kind = 'config'
    exit_code = 65

    def __init__(self, detail, key=None):
        super().__init__(detail, key=key)
        self.key = key
