import math
from pathlib import Path

import pytest

from pcal import ConfigurationError, load_config, parse_config

CONFIGS = sorted((Path(__file__).resolve().parent.parent / "configs").glob("*.cfg"))


def test_parse_basic():
    cfg = parse_config("""
        # comment line
        experiment = pressure_ratios   # trailing comment
        grid.N = 64, 128
        sweep.families = besov
        sweep.s = 0.5
        sweep.q = 2, inf
        sweep.r = inf
        sweep.seeds = 3
    """)
    assert cfg.experiment == "pressure_ratios"
    assert cfg.grid_N == (64, 128)
    assert cfg.sweep_q == (2.0, math.inf)
    assert cfg.grid_n == 2 and cfg.grid_L == pytest.approx(2 * math.pi)
    assert [g.points for g in cfg.grids] == [64, 128]


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_echo_round_trip(path):
    cfg = load_config(path)
    again = parse_config(cfg.echo())
    assert again == cfg
    assert again.echo() == cfg.echo()


def test_overrides_win():
    cfg = parse_config("experiment = taylor_green\ngrid.N = 256\n", overrides={"grid.N": "64", "golden": "none"})
    assert cfg.grid_N == (64,) and cfg.golden is None


@pytest.mark.parametrize("text,match", [
    ("grid.N = 64\n", "experiment"),
    ("experiment = nope\n", "unknown name"),
    ("experiment = taylor_green\nbogus = 1\n", "unknown key"),
    ("experiment = taylor_green\ngrid.N = 64\ngrid.N = 128\n", "duplicate"),
    ("experiment = taylor_green\njust words\n", "key = value"),
    ("experiment = taylor_green\ngrid.N = 100\n", "power of two"),
    ("experiment = taylor_green\ngrid.n = 3\n", "dimension 2"),
    ("experiment = taylor_green\ngrid.L = 3\n", "period"),
    ("experiment = taylor_green\ngrid.N = sixty\n", "integer"),
    ("experiment = holder_besov\ngrid.n = 1\nsweep.alpha = 1.0\n", "outside"),
    ("experiment = pressure_ratios\nsweep.families = sob\nsweep.s = 0.5\nsweep.q = 0.5\n", "exponents"),
    ("experiment = divcurl\ngrid.n = 3\nsweep.s = 0.5\nsweep.p1 = 1\nsweep.p2 = 2\n", "outside"),
    ("experiment = formula_equivalence\ngen.band = nan\n", "NaN"),
    ("experiment = taylor_green\nseed = -1\n", "seed"),
])
def test_validation_errors(text, match):
    with pytest.raises(ConfigurationError, match=match):
        parse_config(text)


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.cfg")
