import math

import numpy as np
import pytest

import kwtorus as kw


def test_spectrum():
    t = kw.Torus(1.0, 1.0, 32)
    assert t.distinct_eigenvalue(1) == pytest.approx(4 * math.pi**2, rel=1e-14)
    assert kw.Torus(2.0, 1.0, 32).distinct_eigenvalue(1) == pytest.approx(math.pi**2, rel=1e-14)


def test_field_roundtrip_and_energy():
    t = kw.Torus(1.0, 1.0, 32)
    x = np.arange(32) / 32
    values = np.cos(2 * math.pi * x)[:, None] * np.ones(32)[None, :]
    u = kw.Field(t, values)
    np.testing.assert_allclose(u.grid(), values, atol=1e-13)
    # ∫|∇u|² = 4π² · ∫cos² = 2π².
    assert u.dirichlet_energy() == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert u.project_perp(1).l2_norm_squared() == pytest.approx(0.0, abs=1e-24)


def test_functional_at_zero():
    t = kw.Torus(1.0, 1.0, 32)
    h = kw.Weight.cosine(t, 0.5)
    p = kw.Params.subcritical(0.0, 0.5, h)
    u = kw.Field(t, np.zeros((32, 32)))
    # J(0) = −β log ∫h = 0 since ∫h = 1 on the unit torus.
    assert kw.eval_J(u, p) == pytest.approx(0.0, abs=1e-13)
    assert p.beta == pytest.approx(4 * math.pi)


def test_minimize_uniform_weight_stays_at_zero():
    t = kw.Torus(1.0, 1.0, 32)
    p = kw.Params.subcritical(0.0, 0.3, kw.Weight.uniform(t))
    r = kw.minimize(p)
    assert r.converged
    assert abs(r.J) < 1e-10
    assert kw.energy_identity_gap(r.u, p) < 1e-8


def test_green_methods_agree():
    t = kw.Torus(1.0, 1.0, 128)
    g = kw.green_solve(t, 0.0, (0.5, 0.5))
    a = g.robin_constant(kw.RobinMethod.split)
    b = g.robin_constant(kw.RobinMethod.extrapolate)
    assert abs(a - b) < 1e-4
    assert g.grid().shape == (128, 128)


def test_bubble_mass():
    assert kw.bubble_mass() == pytest.approx(8 * math.pi, rel=1e-8)


def test_run_writes_manifest(tmp_path):
    code, manifest = kw.run("torus.N = 32\nrun.pipeline = green\n", tmp_path / "r")
    assert code == 0
    assert "green.csv" in manifest["files"]
    assert (tmp_path / "r" / "manifest.json").exists()


def test_bad_config_raises():
    with pytest.raises(ValueError, match="run.alpha"):
        kw.run("run.pipeline = minimize\nrun.alpha = 50\nrun.eps = 0.1\n", "/tmp/kw_never")
