"""Loading and validating configuration files"""
import json
import logging
from pathlib import Path

from core.exceptions import ConfigError
from core.serializers import CadenceConfigSerializer, first_error

logger = logging.getLogger(__name__)


def _read(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f'cannot read config {path}: {exc}',
                          'config') from exc
    if path.suffix == '.toml':
        try:
            import tomllib
        except ImportError as exc:
            raise ConfigError('TOML configs need Python 3.11+',
                              'config') from exc
        try:
            return tomllib.loads(raw.decode('utf-8'))
        except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f'invalid TOML: {exc}', 'config') from exc
    try:
        return json.loads(raw.decode('utf-8'))
    except (UnicodeDecodeError, ValueError) as exc:
        raise ConfigError(f'invalid JSON: {exc}', 'config') from exc


def validate_config(data):
    """Return the validated config with every default filled in"""
    serializer = CadenceConfigSerializer(data=data)
    if not serializer.is_valid():
        key, message = first_error(serializer.errors)
        raise ConfigError(message, key)
    return json.loads(json.dumps(serializer.validated_data))


def load_config(path=None):
    """Validated config from a JSON/TOML file, or all defaults"""
    data = {} if path is None else _read(path)
    config = validate_config(data)
    logger.debug('Loaded config from %s', path or 'defaults')
    return config
