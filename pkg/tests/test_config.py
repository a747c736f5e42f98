import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbflab import ValidationError
from cbflab.config import (
    ModesSpec,
    NoneSpec,
    RandomSpec,
    build_field,
    parse_config,
    serialize_config,
)
MINIMAL = """
[grid]
dim = 2
N = 16

[physics]
mu = 1.0
beta = 1.0
r = 3.0
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.physics.darcy == 0.0
    assert cfg.grid.dealias_factor == 1.5
    assert cfg.solver.cfl_safety == 0.4
    assert cfg.grid.L == pytest.approx(2.0 * math.pi)
    assert isinstance(cfg.physics.forcing, NoneSpec)


def test_comments_and_blank_lines():
    cfg = parse_config("# leading comment\n" + MINIMAL + "\n# trailing\n")
    assert cfg.grid.N == 16


def test_3d_low_r_rejected():
    text = MINIMAL.replace("dim = 2", "dim = 3").replace("r = 3.0", "r = 2.0")
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    assert any("3D requires r >= 3" in v for v in err.value.violations)


def test_3d_additive_rejected():
    text = (
        MINIMAL.replace("dim = 2", "dim = 3")
        + "\n[noise]\nmode = additive\nepsilon = 0.1\nphi = random seed=1 hnorm=1 kmax=4\n"
    )
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    assert any("additive" in v for v in err.value.violations)


def test_all_violations_reported_at_once():
    bad = """
[grid]
dim = 5
N = 7
L = -1

[physics]
mu = -2
r = 0.5
"""
    with pytest.raises(ValidationError) as err:
        parse_config(bad)
    joined = "\n".join(err.value.violations)
    for frag in ("grid.dim", "grid.N", "grid.L", "physics.mu", "physics.r"):
        assert frag in joined


def test_syntax_errors_carry_line_numbers():
    bad = "[grid]\ndim 2\n[nosuch]\nx = 1\n"
    with pytest.raises(ValidationError) as err:
        parse_config(bad)
    msgs = err.value.violations
    assert any(m.startswith("line 2:") for m in msgs)
    assert any(m.startswith("line 3:") for m in msgs)


def test_unknown_key_rejected():
    with pytest.raises(ValidationError) as err:
        parse_config(MINIMAL + "\n[solver]\nwormhole = 3\n")
    assert any("unknown key solver.wormhole" in v for v in err.value.violations)


def test_round_trip_identity():
    text = (
        MINIMAL
        + """
[noise]
mode = multiplicative
epsilon = 0.1
eps_grid = 0.1,0.05,0.025
ou_alpha = 2.5
seed = 3
n_samples = 4

[physics]
forcing = modes k=(1,0) a=(0j,(0.2+0j)) | k=(0,1) a=((0.1+0j),0j)

[solver]
h = 0.005
initial = random seed=2 hnorm=1.0 kmax=4.0
"""
    )
    cfg = parse_config(text)
    assert parse_config(serialize_config(cfg)) == cfg


@settings(max_examples=30, deadline=None)
@given(
    mu=st.floats(0.01, 10.0),
    h=st.floats(1e-4, 0.5),
    seed=st.integers(0, 2**31),
    eps=st.floats(0.0, 1.0),
)
def test_round_trip_random_values(mu, h, seed, eps):
    text = (
        f"[grid]\ndim = 2\nN = 16\n\n[physics]\nmu = {mu!r}\nbeta = 1.0\nr = 3.0\n"
        f"\n[noise]\nmode = multiplicative\nepsilon = {eps!r}\nseed = {seed}\n"
        f"\n[solver]\nh = {h!r}\n"
    )
    cfg = parse_config(text)
    assert parse_config(serialize_config(cfg)) == cfg


def test_mode_spec_parsing_and_build(grid2d_small):
    cfg = parse_config(
        MINIMAL + "\n[physics]\nforcing = modes k=(1,0) a=(0j,(1+0j))\nforcing_h_norm = 0.25\n"
    )
    assert isinstance(cfg.physics.forcing, ModesSpec)
    f = build_field(cfg.physics.forcing, grid2d_small, cfg.physics.forcing_h_norm)
    from cbflab import h_norm

    assert h_norm(f) == pytest.approx(0.25, rel=1e-12)


def test_random_spec_build(grid2d_small):
    spec = RandomSpec(seed=5, hnorm=0.5)
    u = build_field(spec, grid2d_small)
    from cbflab import h_norm

    assert h_norm(u) == pytest.approx(0.5, rel=1e-12)


def test_bad_mode_entry_reported():
    with pytest.raises(ValidationError) as err:
        parse_config(MINIMAL + "\n[physics]\nforcing = modes k=(1 a=(1)\n")
    assert any("physics.forcing" in v for v in err.value.violations)


def test_file_spec_round_trip(tmp_path, grid2d_small):
    from cbflab import random_field, write_field

    u = random_field(grid2d_small, 3, h_norm=0.4)
    path = tmp_path / "f.cbff"
    write_field(path, u)
    cfg = parse_config(MINIMAL + f"\n[physics]\nforcing = file {path}\n")
    built = build_field(cfg.physics.forcing, grid2d_small)
    import numpy as np

    assert np.array_equal(built.coeffs, u.coeffs)
