import json
import logging
import math
import os
from typing import Any

import numpy as np
import yaml

YAML_EXTENSIONS = (".yaml", ".yml")
JSON_EXTENSIONS = (".json",)


class ConfigFileError(Exception):
    pass


def config_format(file: str) -> str:
    ext = os.path.splitext(file)[1].lower()
    if ext in YAML_EXTENSIONS:
        return "yaml"
    if ext in JSON_EXTENSIONS:
        return "json"
    raise ConfigFileError(
        f"Unexpected configuration file format: {ext or file}, "
        f"expected one of {YAML_EXTENSIONS + JSON_EXTENSIONS}"
    )


def read_json_config(file: str):
    with open(file) as f:
        return json.load(f)


def read_yaml_config(file: str):
    with open(file) as f:
        return yaml.safe_load(f)


def read_config_file(file: str):
    fmt = config_format(file)
    if not os.path.exists(file):
        raise ConfigFileError(f"Could not find configuration file {file}")
    try:
        if fmt == "json":
            return read_json_config(file)
        return read_yaml_config(file)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigFileError(f"Could not parse {file}: {e}")


def to_plain(value: Any) -> Any:
    """Convert numpy values and tuples to JSON/YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return to_plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no inf/nan literals
        return str(value)
    return value


def write_json_config(config: dict, file: str):
    with open(file, "w") as f:
        json.dump(to_plain(config), f, indent=2)


def write_yaml_config(config: dict, file: str):
    with open(file, "w") as f:
        yaml.safe_dump(to_plain(config), f, default_flow_style=False, sort_keys=False)


def write_config_file(config: dict, file: str):
    fmt = config_format(file)
    logging.debug(f"writing {fmt} file {file}")
    if fmt == "json":
        write_json_config(config, file)
    else:
        write_yaml_config(config, file)
