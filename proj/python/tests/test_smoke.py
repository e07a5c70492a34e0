import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

import hybridmg

EXAMPLE1 = """
[problem]
example = example1
[method]
orders = 1, 2
[multigrid]
levels = 2..3
smoother = block_jacobi
"""


def test_config_round_trip():
    cfg = hybridmg.Config.parse(EXAMPLE1)
    assert cfg.example == "example1"
    assert cfg.scheme == "hdg"
    assert cfg.smoother == "block_jacobi"
    assert cfg.orders == [1, 2]
    assert cfg.levels == [2, 3]


def test_config_errors_name_the_key():
    with pytest.raises(hybridmg.ConfigError, match="multigrid.smoother"):
        hybridmg.Config.parse("[multigrid]\nsmoother = gauss\n")
    with pytest.raises(hybridmg.ParseError):
        hybridmg.Config.parse("[a]\nx = 1\nx = 2\n")


def test_sweep_converges():
    rows = hybridmg.run(hybridmg.Config.parse(EXAMPLE1))
    assert len(rows) == 8
    assert {r["mode"] for r in rows} == {"mg", "gmres+mg"}
    for r in rows:
        assert r["status"] == "converged"
        assert r["residual"] <= 1e-9


def test_instance_matches_scipy():
    inst = hybridmg.Instance(hybridmg.Config.parse(EXAMPLE1), 2, 3)
    A = inst.matrix
    assert A.shape == (inst.size, inst.size)
    assert inst.size == 3 * 2 * 8 * 7
    reference = spla.spsolve(A.tocsc(), inst.rhs)
    res = inst.solve("gmres+mg")
    assert res.status == "converged"
    assert np.linalg.norm(res.x - reference) < 1e-7 * np.linalg.norm(reference)
    assert np.allclose(inst.solve_direct(), reference, rtol=1e-9, atol=1e-12)
    assert abs(inst.conservation_defects(reference)).max() < 1e-10
    assert inst.l2_error(reference) < 1e-2


def test_vcycle_is_linear():
    inst = hybridmg.Instance(hybridmg.Config.parse(EXAMPLE1), 1, 3)
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(inst.size), rng.standard_normal(inst.size)
    lhs = inst.vcycle(2 * a - b)
    rhs = 2 * inst.vcycle(a) - inst.vcycle(b)
    assert np.linalg.norm(lhs - rhs) < 1e-11 * np.linalg.norm(rhs)
    assert inst.num_levels == 3
    assert inst.level_size(0) == 8


def test_convergence_rates():
    cfg = hybridmg.Config.parse("[method]\norders = 1\n[multigrid]\nlevels = 2..4\n")
    rows = hybridmg.converge(cfg)
    assert math.isnan(rows[0]["rate"])
    assert rows[-1]["rate"] == pytest.approx(2.0, abs=0.2)


def test_snapped_split():
    assert hybridmg.snapped_split(8) == 0.5
    assert hybridmg.snapped_split(16) == 0.5625
