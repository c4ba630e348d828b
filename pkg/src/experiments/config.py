from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from pydantic import ValidationError

from db.data_access import read_config_file
from shared.errors import ConfigError
from shared.types import TrainConfig


def config_keys() -> List[Tuple[str, str]]:
    """(file key, CLI flag) for every TrainConfig field."""
    keys = []
    for name, field in TrainConfig.model_fields.items():
        key = field.alias or name
        keys.append((key, "--" + key.replace("_", "-")))
    return keys


def _normalize(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def parse_config(path: Optional[str | Path] = None, overrides: Optional[Mapping[str, Optional[str]]] = None, require_mode: bool = True) -> TrainConfig:
    """Defaults, then the key=value file, then flag overrides (None values are ignored)."""
    raw: Dict[str, str] = dict(read_config_file(path)) if path else {}
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[_normalize(k)] = v
    try:
        config = TrainConfig.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        key = str(err["loc"][0]) if err["loc"] else "config"
        raise ConfigError(key, err["msg"]) from None
    if require_mode and config.mode is None:
        raise ConfigError("mode", "required")
    return config
