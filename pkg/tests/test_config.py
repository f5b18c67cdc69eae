"""Tests for configuration loading and validation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest

from flrw_boltzmann.config import SimConfig, default_config, load_config
from flrw_boltzmann.diagnostics import NormSpec
from flrw_boltzmann.errors import ConfigError


def _write(tmp_path: Path, data: Any) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestDefaults:
    def test_empty_object_uses_defaults(self) -> None:
        config = SimConfig.from_dict({})
        assert config.lambda_ == 3.0
        assert config.scale_factor == "coupled"
        assert config.grid.n == 24
        assert config.picard.iters == 2
        assert config.norms == (NormSpec(2, 2),)
        assert config.sigma0 == "constant"

    def test_packaged_demo(self) -> None:
        config = default_config()
        assert config.initial.epsilon == 1e-3
        assert config.T == 10.0
        assert config.norms == (NormSpec(2, 2),)
        # coarser than the defaults so the full horizon fits a desk run
        assert (config.grid.extent, config.grid.n) == (6.0, 12)
        assert (config.sphere.polar_order, config.sphere.azimuth_order) == (4, 8)
        assert config.grid.n < SimConfig().grid.n

    def test_round_trip(self) -> None:
        config = SimConfig.from_dict(
            {
                "lambda": 1.5,
                "scale_factor": "desitter",
                "initial": {"kind": "shell", "epsilon": 0.01, "params": {"r0": 2.0}},
                "norms": [{"k": 1, "N": 0}, {"k": 3, "N": 1}],
                "seed": 42,
            }
        )
        assert SimConfig.from_dict(json.loads(config.to_json())) == config


class TestPicardKeys:
    def test_flat_iters_key(self) -> None:
        config = SimConfig.from_dict({"picard_iters": 12})
        assert config.picard.iters == 12
        assert config.picard.max_sweeps == 12

    def test_nested_takes_precedence(self) -> None:
        config = SimConfig.from_dict({"picard_iters": 3, "picard": {"iters": 4}})
        assert config.picard.iters == 4

    def test_max_sweeps_below_iters(self) -> None:
        with pytest.raises(ConfigError, match="max_sweeps"):
            SimConfig.from_dict({"picard": {"iters": 5, "max_sweeps": 2}})


class TestValidation:
    @pytest.mark.parametrize(
        "data",
        [
            {"lambda": 0.0},
            {"lambda": -1.0},
            {"dt": 0.0},
            {"T": -2.0},
            {"scale_factor": "milne"},
            {"grid": {"n": 4}},
            {"grid": {"extent": 500.0}},
            {"grid": {"extent": 4.0, "n": 8, "spacing": 1.0}},
            {"sphere": {"polar_order": 0}},
            {"initial": {"kind": "maxwell"}},
            {"initial": {"epsilon": -1e-3}},
            {"initial": {"params": {"width": "wide"}}},
            {"norms": [{"k": -1, "N": 0}]},
            {"norms": [{"k": 1}]},
            {"output": {"interval": 0.0}},
            {"sigma0": "hard_spheres"},
        ],
    )
    def test_invalid(self, data: dict[str, Any]) -> None:
        with pytest.raises(ConfigError):
            SimConfig.from_dict(data)

    def test_unknown_key(self) -> None:
        with pytest.raises(ConfigError, match="unknown config keys: gamma"):
            SimConfig.from_dict({"gamma": 1.0})

    def test_not_an_object(self) -> None:
        with pytest.raises(ConfigError):
            SimConfig.from_dict([1, 2, 3])  # type: ignore[arg-type]


class TestLoadConfig:
    def test_load(self, tmp_path: Path) -> None:
        config = load_config(_write(tmp_path, {"dt": 0.05, "T": 1.0}))
        assert config.dt == 0.05
        assert config.T == 1.0

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path: Path) -> None:
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)
