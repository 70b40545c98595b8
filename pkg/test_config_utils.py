import json
import math

import numpy as np
import pytest

from config_utils import (
    ConfigFileError,
    config_format,
    read_config_file,
    to_plain,
    write_config_file,
)


def test_config_format():
    assert config_format("cell.yaml") == "yaml"
    assert config_format("cell.YML") == "yaml"
    assert config_format("cell.json") == "json"
    with pytest.raises(ConfigFileError, match="Unexpected configuration file format: .cfg"):
        config_format("cell.cfg")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigFileError, match="Could not find configuration file"):
        read_config_file(str(tmp_path / "missing.yaml"))


def test_parse_error(tmp_path):
    file = tmp_path / "broken.json"
    file.write_text("{ not json")
    with pytest.raises(ConfigFileError, match="Could not parse"):
        read_config_file(str(file))


def test_reads_reference(reference_file: str):
    raw = read_config_file(reference_file)
    assert raw["geometry"]["L1"] == 1.0
    assert raw["kinetics"]["ocp"]["lambda_min"]["anode"] == [0.0, 8.61e-5]


def test_to_plain():
    value = {
        "array": np.array([1.0, 2.0]),
        "scalar": np.float64(0.5),
        "pair": (1, 2),
        "inf": math.inf,
        3: "key",
    }
    assert to_plain(value) == {
        "array": [1.0, 2.0],
        "scalar": 0.5,
        "pair": [1, 2],
        "inf": "inf",
        "3": "key",
    }


def test_written_json_is_standard(tmp_path):
    file = tmp_path / "out.json"
    write_config_file({"dt_max": math.inf, "cells": np.int64(15)}, str(file))
    assert json.loads(file.read_text()) == {"dt_max": "inf", "cells": 15}


def test_yaml_keeps_key_order(tmp_path):
    file = tmp_path / "out.yaml"
    write_config_file({"units": {"length": "m"}, "geometry": {"L": 1.0}}, str(file))
    assert list(read_config_file(str(file))) == ["units", "geometry"]
