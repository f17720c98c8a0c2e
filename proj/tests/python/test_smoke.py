"""Smoke tests for the python module against known exact values."""

import json
import math

import pytest

try:
    import fluct
except ImportError:
    import _fluct as fluct  # build-tree fallback


def test_rho_closed_form():
    assert fluct.rho_from(1.0, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert fluct.rho_from(1.5, 1.0) == pytest.approx(1.0 / 3, abs=1e-12)
    assert fluct.rho_from(1.5, -1.0) == pytest.approx(2.0 / 3, abs=1e-12)
    with pytest.raises(Exception):
        fluct.rho_from(1.0, 0.5)


def test_stable_density_gaussian():
    p = fluct.StableParams(2.0, 0.0, 0.5)
    assert p.density(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-8)
    assert p.rho == pytest.approx(0.5)
    assert fluct.calibrated_scale(2.0) == 0.5


def test_model_registry_and_norm():
    m = fluct.model("simple-rw")
    assert m.is_lattice
    assert m.span_h == 2.0
    assert m.shift_a == 1.0
    assert m.mu(3.0) == pytest.approx(1.0 / 9)
    assert fluct.norm_c(m, 100) == pytest.approx(10.0, abs=1e-8)
    info = fluct.lattice_info(m)
    assert info["span_h"] == 2.0


def test_sampler_deterministic():
    m = fluct.model("lazy-rw")
    a = m.sample(50, seed=7)
    b = m.sample(50, seed=7)
    assert a == b
    assert set(a) <= {-1.0, 0.0, 1.0}


def test_survival_table_and_tau():
    m = fluct.model("simple-rw")
    t = fluct.SurvivalTable(m, 16)
    assert t.survival(1) == pytest.approx(0.5)
    assert t.survival(2) == pytest.approx(0.25)
    pmf = t.tau_minus_pmf(16)
    assert pmf[1] == pytest.approx(0.5)
    assert pmf[2] == pytest.approx(0.25)
    assert pmf[3] == 0.0


def test_wiener_hopf_route():
    q = [0.0] + [0.5] * 64
    pmf = fluct.tau_pmf_from_positivity(q, 64, "plus")
    assert pmf[1] == pytest.approx(0.5, abs=1e-12)
    assert pmf[2] == pytest.approx(1.0 / 8, abs=1e-12)
    assert fluct.verify_factorization(pmf, pmf, 64) < 1e-12


def test_meander_normal():
    assert fluct.meander_density_normal(1.0) == pytest.approx(math.exp(-0.5))
    d = fluct.meander_fixed_point(2.0, 0.0)
    assert d["converged"]
    z, p = d["z"], d["p"]
    worst = max(
        abs(pi - zi * math.exp(-zi * zi / 2)) for zi, pi in zip(z, p) if 0 < zi <= 4.0
    )
    assert worst < 5e-3
    assert fluct.small_z_exponent(z, p, 1e-3, 1e-2) == pytest.approx(1.0, abs=0.05)


def test_monte_carlo_reproducible():
    m = fluct.model("simple-rw")
    a = fluct.simulate_conditioned(m, 16, 2000, seed=3, workers=2)
    b = fluct.simulate_conditioned(m, 16, 2000, seed=3, workers=2)
    assert a["terminal"] == b["terminal"]
    assert a["survival"] == b["survival"]
    assert min(a["terminal"]) > 0


def test_experiment_report_roundtrip():
    rep = json.loads(fluct.check_factorization(["simple-rw", "lazy-rw"], n_max=64))
    assert rep["verdict"] == "pass"
    assert rep["experiment"] == "factorization"
    assert all(row["residual"] < 1e-9 for row in rep["rows"])


def test_ladder_surface():
    lad = fluct.build_ladder(fluct.model("lazy-rw"), chi_n_max=2048, u_max=16, survival_n=512)
    assert lad.H(3.0) == pytest.approx(3.0, abs=1e-9)
    assert lad.descent_status == "finite"
    assert lad.descent_value == pytest.approx(0.25, abs=1e-9)
    assert lad.q_n_minus(10) == pytest.approx(0.5, rel=0.05)
