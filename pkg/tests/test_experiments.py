import math

import numpy as np
import pytest

from qscatter.errors import InputError
from qscatter.experiments import (
    DK_E_EXC,
    COUPLING_E_EXC,
    OK,
    SweepSpec,
    VerifyGrid,
    transmission_pipeline,
    dk_pipeline,
    coupling_pipeline,
    locate_features,
    run_sweep,
    run_verify,
)
from qscatter.scattering import ChannelAmplitudes, ScattererParams
from qscatter.twobody import TwoParticleInput, concurrence_postselected, plateau_limit


def local_minima(y):
    return [i for i in range(1, len(y) - 1) if y[i] <= y[i - 1] and y[i] <= y[i + 1]]


# --- sweep validation ---

@pytest.mark.parametrize("kwargs", [
    dict(kind="nope", lo=0, hi=1, steps=10),
    dict(kind="transmission_vs_k", lo=1, hi=1, steps=10),
    dict(kind="transmission_vs_k", lo=0.1, hi=1, steps=1),
    dict(kind="transmission_vs_k", lo=0.1, hi=math.inf, steps=10),
    dict(kind="concurrence_vs_dk", lo=0.1, hi=1, steps=10),
    dict(kind="concurrence_vs_g", lo=-1, hi=1, steps=10, fixed=(0.5, 1.5)),
    dict(kind="concurrence_vs_g", lo=0, hi=1, steps=10, fixed=(0.5, -1)),
])
def test_spec_validation(kwargs):
    with pytest.raises(InputError):
        SweepSpec(params=ScattererParams(1), **kwargs)


# --- transmission sweep ---

def test_transmission_sweep_regimes():
    res = run_sweep(transmission_pipeline())
    assert len(res.rows) == 256
    k, s = res.column("k"), res.column("sum")
    assert np.all(np.diff(k) > 0)
    below = k <= 1.0
    assert np.abs(s[below] - 1).max() < 1e-12
    assert np.all((s >= 0.5 - 1e-12) & (s <= 1 + 1e-12))
    assert s[~below].min() < 0.99  # absorption above threshold


def test_transmission_sweep_elastic():
    res = run_sweep(SweepSpec("transmission_vs_k", ScattererParams(1), 0.05, 3, 64))
    assert np.abs(res.column("sum") - 1).max() < 1e-12
    assert all(r.ok for r in res.rows)


# --- concurrence against dk ---

def test_dk_sweep_shape_and_flags():
    spec = SweepSpec("concurrence_vs_dk", ScattererParams(1, 0.5), -0.5, 0.5, 11,
                     fixed=(0.5,), extra=(0.0, 0.1))
    res = run_sweep(spec)
    assert res.names == ("eta_e0", "eta_e0.1")
    mid = res.rows[5]
    assert mid.x == 0 and mid.flags == ("skipped:EqualMomenta",) * 2
    assert all(math.isnan(v) for v in mid.values)
    assert not mid.ok and res.rows[1].ok
    # k2 = k1 + dk = 0 is not a momentum
    assert res.rows[0].flags == ("error:NonPositiveMomentum",) * 2


def test_dk_pipeline_regime_i_monotone():
    res = run_sweep(dk_pipeline(e_exc=(DK_E_EXC[0],)))
    eta = res.column(res.names[0])
    assert np.all(np.diff(eta) < 0)


def test_dk_pipeline_regime_ii_threshold_minimum():
    e = DK_E_EXC[1]
    spec = dk_pipeline(e_exc=(e,))
    res = run_sweep(spec)
    dk, eta = res.column("dk"), res.column(res.names[0])
    step = dk[1] - dk[0]
    dk_th = math.sqrt(e) - 0.5
    assert any(abs(dk[i] - dk_th) <= step for i in local_minima(eta))


def test_literal_regime_ii_value_has_no_threshold_minimum():
    # at e_exc = 0.8 the local minima are the channel-2 zeros, not the threshold
    res = run_sweep(dk_pipeline(e_exc=(0.8,)))
    dk, eta = res.column("dk"), res.column(res.names[0])
    step = dk[1] - dk[0]
    dk_th = math.sqrt(0.8) - 0.5
    assert not any(abs(dk[i] - dk_th) <= step for i in local_minima(eta))


def test_dk_pipeline_regime_iii_two_zeros_with_positive_maximum_between():
    e = DK_E_EXC[2]
    p = ScattererParams(1, 0.5, e)
    feats = {f.name: f for f in locate_features(p, 0.5)}
    k_t0 = feats["total_reflection"].k
    k_r0 = feats["reflection_zero"].k
    assert feats["total_reflection"].eta < 1e-8 and feats["reflection_zero"].eta < 1e-8
    # both zeros inside dk <= 2 with both momenta below threshold
    assert 0.5 < k_t0 < k_r0 <= 2.5 < p.k_threshold
    ks = np.linspace(k_t0, k_r0, 401)[1:-1]
    eta = np.array([concurrence_postselected(TwoParticleInput(p, 0.5, float(k))) for k in ks])
    assert eta.min() > 0
    assert eta.max() > 1e-3
    i = int(np.argmax(eta))
    assert 0 < i < len(eta) - 1


def test_literal_regime_iii_value_puts_zeros_out_of_range():
    p = ScattererParams(1, 0.5, 7.0)
    zeros = [f.k for f in locate_features(p, 0.5) if f.name != "threshold"]
    assert zeros and min(zeros) - 0.5 > 2.0


def test_dk_pipeline_pipeline_columns():
    res = run_sweep(dk_pipeline())
    assert len(res.rows) == 400 and len(res.names) == 3
    ok = np.array([v for r in res.rows for v, f in zip(r.values, r.flags) if f == OK])
    assert np.all((ok >= 0) & (ok <= 1 + 1e-12))


# --- concurrence against g ---

def test_coupling_pipeline_start_enhancement_plateau():
    res = run_sweep(coupling_pipeline())
    g = res.column("g")
    start = [res.column(n)[0] for n in res.names]
    assert g[0] == 0
    assert max(abs(v - 0.6) for v in start) < 1e-12
    eta_e125 = res.column("eta_e0.125")
    assert eta_e125.max() > eta_e125[0]
    assert g[-1] == 3.0


def test_coupling_pipeline_tail_matches_plateau_limit():
    for e in (0.0, 0.125):
        spec = SweepSpec("concurrence_vs_g", ScattererParams(1, 0, e), 0, 20, 41,
                         fixed=(0.5, 1.5), extra=(e,))
        res = run_sweep(spec)
        eta = res.column(res.names[0])
        limit = plateau_limit(TwoParticleInput(ScattererParams(1, 20, e), 0.5, 1.5))
        assert abs(eta[-1] - limit) < 1e-2


def _tail_step(g, e):
    a = concurrence_postselected(TwoParticleInput(ScattererParams(1, g, e), 0.5, 1.5))
    b = concurrence_postselected(TwoParticleInput(ScattererParams(1, 2 * g, e), 0.5, 1.5))
    return abs(a - b)


@pytest.mark.parametrize("e", [0.0, 0.125, 0.5])
def test_coupling_pipeline_tail_flat(e):
    for g in (10, 15, 25, 50):
        assert _tail_step(g, e) < 1e-3


def test_coupling_pipeline_tail_below_threshold_converges_slower():
    # k1 under threshold: the approach to the plateau is ~1/g^2 with a larger
    # coefficient, so the 1e-3 flatness is reached from g ~ 20 instead of 10
    assert _tail_step(10, 1.0) > 1e-3
    steps = [_tail_step(g, 1.0) for g in (20, 40, 80)]
    assert all(s < 1e-3 for s in steps)
    assert steps[0] / steps[1] == pytest.approx(4, rel=0.1)


def test_sweeps_are_deterministic_across_threads():
    for spec in (transmission_pipeline(steps=64), dk_pipeline(steps=64), coupling_pipeline(steps=64)):
        a = run_sweep(spec, threads=1)
        b = run_sweep(spec, threads=4)
        assert [(r.x, r.values, r.flags) for r in a.rows] == [(r.x, r.values, r.flags) for r in b.rows]


# --- features ---

def test_locate_features_example():
    feats = locate_features(ScattererParams(1, 0.5, 0.5), 0.25)
    by_name = {f.name: f for f in feats}
    assert by_name["threshold"].k == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert by_name["total_reflection"].k == pytest.approx(0.5, abs=1e-15)
    for f in feats:
        if f.name != "threshold":
            assert f.eta < 1e-8


def test_locate_features_elastic():
    feats = locate_features(ScattererParams(1, 0, 0.5), 0.25)
    assert [f.name for f in feats] == ["threshold"]


@pytest.mark.parametrize("k1", [0.1, 0.3, 1.7])
def test_zeros_vanish_against_any_partner(k1):
    for f in locate_features(ScattererParams(1, 0.5, 0.5), k1):
        if f.name != "threshold":
            assert f.eta < 1e-8


# --- verify ---

def test_verify_default_grid_passes():
    report = run_verify()
    assert report.passed, [(r.name, r.worst, r.errors[:1]) for r in report.results if not r.passed]
    assert all(r.checked > 0 for r in report.results)


def test_verify_fault_injection_fails():
    hit = []

    def fault(p, k, a):
        if not hit:
            hit.append(k)
            return ChannelAmplitudes(a.r, a.t + 1e-6, a.k)
        return a

    grid = VerifyGrid(g_values=(0.5,), e_values=(0.25,), k_values=(0.3, 1.0, 2.0))
    report = run_verify(grid, fault=fault)
    assert not report.passed
    assert not {r.name: r for r in report.results}["t_minus_r"].passed


def test_verify_unreachable_tolerance_fails():
    grid = VerifyGrid(g_values=(0.5,), e_values=(0.25,), k_values=(0.3, 1.0, 2.0))
    assert not run_verify(grid, tol=1e-30).passed


def test_empty_grid_is_an_error():
    with pytest.raises(InputError):
        VerifyGrid(g_values=())
