import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resetdf.approx import (FORE_LEAD_LIMIT_DEG, alpha_choice, approx_eval,
                            beta_choice, design_cglp, factor_F, gamma_max,
                            kappa_choice, sigma)
from resetdf.errors import InfeasibleError, ParameterError
from resetdf.hosidf import chain_harmonic, describing_function
from resetdf.reset_elements import (CgLpDesign, make_cglp, make_gfore,
                                    make_gsore)
from resetdf.stage import row_design


def test_factor_F():
    assert factor_F(1.0) == 0
    assert factor_F(0.0) == pytest.approx(4 / math.pi)
    assert factor_F(-0.2) == pytest.approx(1.90986, abs=1e-5)
    for bad in (-1.0, 1.5, -2.0):
        with pytest.raises(ParameterError):
            factor_F(bad)


def test_corrections():
    assert alpha_choice(1.0) == 1.0 and kappa_choice(1.0) == 1.0
    assert alpha_choice(0.0) == pytest.approx(0.6177, abs=1e-4)
    assert kappa_choice(0.0) == pytest.approx(math.sqrt(alpha_choice(0.0)))


def test_beta_choice():
    assert beta_choice(0.7856) == pytest.approx(0.6365, abs=1e-4)
    assert beta_choice(0.5) == 1.0
    k = kappa_choice(0.1)
    assert 4 * k**2 * beta_choice(k) ** 2 - 1 == pytest.approx(0, abs=1e-14)
    with pytest.raises(ParameterError):
        beta_choice(0.0)


def test_gamma_max():
    assert gamma_max(1e-9) == pytest.approx(1.0)
    assert gamma_max(40.0) == pytest.approx(0.2055, abs=1e-4)
    # The bound reproduces the target as the asymptotic lead atan(F).
    g = gamma_max(35.0)
    assert math.degrees(math.atan(factor_F(g))) == pytest.approx(35.0)
    with pytest.raises(InfeasibleError) as info:
        gamma_max(60.0)
    assert info.value.max_lead == pytest.approx(FORE_LEAD_LIMIT_DEG)


@pytest.mark.parametrize('name, printed', [('f2', 1.23e-4), ('f4', 8.14e-5)])
def test_sigma_table_rows(name, printed):
    assert sigma(row_design(name)) == pytest.approx(printed, rel=0.01)


def test_sigma_zero_for_linear():
    assert sigma(CgLpDesign(1, 1.0, 5.0, 50.0, 1.0)) == 0


def _design(order, gamma, wr=1.0, wf=1e4):
    return design_cglp(order, gamma, wr, wf)


def test_fore_examples():
    d = _design(1, 0.0)
    lf = approx_eval('CgLp-FORE', 'lf', 1, d, 0.01)
    assert (lf.magnitude, lf.phase) == (1.0, 0.0)
    hf = approx_eval('CgLp-FORE', 'hf', 1, d, 100.0)
    assert hf.magnitude == pytest.approx(1.0)
    assert hf.phase == pytest.approx(math.atan(4 / math.pi))
    h3 = approx_eval('CgLp-FORE', 'hf', 3, d, 100.0)
    assert h3.magnitude == pytest.approx(alpha_choice(0.0) * 4 / math.pi)
    assert h3.phase is None
    with pytest.raises(ValueError):
        h3.value


def test_sore_examples():
    d = _design(2, 0.0)
    k = kappa_choice(0.0)
    hf = approx_eval('CgLp-SORE', 'hf', 1, d, 100.0)
    assert hf.magnitude == pytest.approx(1.0)
    assert hf.phase == pytest.approx(math.pi + math.atan(4 / math.pi))
    assert approx_eval('CgLp-SORE', 'hf', 3, d, 100.0).magnitude == \
        pytest.approx(k**2 * 4 / math.pi)
    g = approx_eval('GSORE', 'hf', 1, d, 50.0)
    assert g.magnitude == pytest.approx(math.sqrt(1 + 16 / math.pi**2)
                                        * (k / 50) ** 2)
    # beta = 1/(2 kappa) removes the low-frequency harmonic estimate.
    assert approx_eval('GSORE', 'lf', 3, d, 0.01).magnitude == \
        pytest.approx(0, abs=1e-18)


def test_even_orders_and_errors():
    d = _design(1, 0.2)
    r = approx_eval('GFORE', 'hf', 4, d, 20.0)
    assert r.magnitude == 0 and r.formula == 'GFORE.hf.even'
    with pytest.raises(ParameterError):
        approx_eval('GFORE', 'lf', 3, d, 0.5)
    with pytest.raises(ParameterError):
        approx_eval('GFORE', 'hf', 3, d, 5.0)
    approx_eval('GFORE', 'hf', 3, d, 5.0, check_regime=False)
    with pytest.raises(ParameterError):
        approx_eval('FORE', 'hf', 3, d, 20.0)
    with pytest.raises(ParameterError):
        approx_eval('GSORE', 'hf', 3, d, 20.0)
    with pytest.raises(ParameterError):
        approx_eval('GFORE', 'mid', 3, d, 20.0)


@pytest.mark.parametrize('gamma', [-0.3, 0.0, 0.3])
def test_fore_formulas_converge_deep_in_regime(gamma):
    d = _design(1, gamma)
    el = make_gfore(1.0, gamma, d.gain_corr)
    for n in (1, 3):
        lo = describing_function(el, 1e-3, n)
        est = approx_eval('GFORE', 'lf', n, d, 1e-3)
        assert abs(lo) == pytest.approx(est.magnitude, rel=0.01)
        hi = describing_function(el, 1e4, n)
        est = approx_eval('GFORE', 'hf', n, d, 1e4)
        assert abs(hi) == pytest.approx(est.magnitude, rel=0.01)
    hf = approx_eval('CgLp-FORE', 'hf', 1, _design(1, gamma, wf=1e8), 1e3)
    exact = chain_harmonic(make_cglp(_design(1, gamma, wf=1e8)), 1e3)
    assert abs(exact - hf.value) < 0.01 * abs(exact)


def test_sore_low_frequency_formula_with_unit_beta():
    k = kappa_choice(0.0)
    d = CgLpDesign(2, 0.0, 1.0, 1e4, k, 1.0, 1.0)
    el = make_gsore(1.0, 0.0, k, 1.0)
    est = approx_eval('GSORE', 'lf', 3, d, 1e-3).magnitude
    assert abs(describing_function(el, 1e-3, 3)) == pytest.approx(est,
                                                                  rel=0.01)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.9, 0.99), st.floats(0.1, 10.0), st.integers(1, 4))
def test_lf_scales_with_frequency_squared(gamma, wr, k):
    d = _design(1, gamma, wr=wr, wf=1e3 * wr)
    w = wr / 100
    a = approx_eval('GFORE', 'lf', 2 * k + 1, d, w).magnitude
    b = approx_eval('GFORE', 'lf', 2 * k + 1, d, w / 2).magnitude
    assert a == pytest.approx(4 * b, rel=1e-12)


def test_sigma_orders_low_frequency_harmonics():
    # Ranking by sigma matches ranking by |G3| well below crossover.
    wl = 2 * math.pi * 100 / 100
    for names in (('f1', 'f2', 'f3', 'f4', 'f5'), ('s1', 's2', 's3', 's4')):
        designs = [row_design(n) for n in names]
        by_sigma = np.argsort([sigma(d) for d in designs])
        by_g3 = np.argsort([abs(chain_harmonic(make_cglp(d), wl, 3))
                            for d in designs])
        assert list(by_sigma) == list(by_g3)


def test_beta_sweep_minimum_near_choice():
    k = kappa_choice(0.0)
    betas = np.arange(0.3, 1.5001, 0.05)
    mags = [abs(describing_function(make_gsore(100.0, 0.0, k, b), 5.0, 3))
            for b in betas]
    best = betas[int(np.argmin(mags))]
    assert abs(best - beta_choice(k)) <= 0.05
    assert mags[0] > mags[int(np.argmin(mags))] < mags[-1]
