import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fernique.errors import DomainError
from fernique.lab.constants import (
    INTERPRETATIONS,
    bm_exponent_scale,
    c_uv,
    eta0_banach,
    eta0_bm,
    eta0_gaussian,
    eta0_generic,
    normal_cdf,
    normal_ppf,
    normal_sf,
    zeta,
)

mp.mp.dps = 40


def mp_base(a, interpretation):
    return mp.mpf("2.4") ** a if interpretation == "literal_2.4" else 2 * mp.mpf(4) ** a


def mp_eta0_gaussian(rho, p, interpretation):
    rho, p = mp.mpf(rho), mp.mpf(p)

    def c(u, v):
        a = 1 / u + 1 / v
        return mp_base(a, interpretation) * mp.zeta(a)

    inner = mp.sqrt(c(rho, rho)) ** p + mp.sqrt(c(rho, p)) ** p / mp.sqrt(2)
    return (mp.sqrt(2) * mp.mpf(3) ** (mp.mpf(1) / 2 - 1 / p) * inner ** (1 / p)) ** -2


def test_zeta_closed_forms():
    assert zeta(2.0) == pytest.approx(math.pi**2 / 6, rel=1e-15)
    assert zeta(4.0) == pytest.approx(math.pi**4 / 90, rel=1e-15)


def test_zeta_direct_summation_oracle():
    # 10^7 terms plus the integral tail bracket  N^{1-s}/(s-1) - ... <= tail <= N^{1-s}/(s-1)
    N, s = 10**7, 1.5
    n = np.arange(1, N + 1, dtype=float)
    head = math.fsum(n ** (-s))
    lo, hi = head + (N + 1) ** (1 - s) / (s - 1), head + N ** (1 - s) / (s - 1)
    z = zeta(s)
    assert lo <= z <= hi
    assert z == pytest.approx(float(mp.zeta(1.5)), rel=1e-14)


@given(st.floats(1.01, 50.0))
def test_zeta_against_mpmath(s):
    assert zeta(s) == pytest.approx(float(mp.zeta(s)), rel=1e-12)


def test_zeta_domain():
    for s in (1.0, 0.5, -2.0):
        with pytest.raises(DomainError):
            zeta(s)


def test_normal_distribution():
    assert normal_cdf(0.0) == 0.5
    z = np.linspace(-8, 8, 1601)
    np.testing.assert_allclose(normal_cdf(z) + normal_sf(z), 1.0, atol=1e-15)
    ref = np.array([float(mp.ncdf(v)) for v in z])
    np.testing.assert_allclose(normal_cdf(z), ref, rtol=1e-14)
    ref_sf = np.array([float(1 - mp.ncdf(v)) for v in z])
    np.testing.assert_allclose(normal_sf(z), ref_sf, rtol=1e-14)
    zp = np.linspace(0, 40, 4001)
    assert np.all(normal_sf(zp) <= np.exp(-zp**2 / 2))
    np.testing.assert_allclose(normal_cdf(normal_ppf(np.array([0.01, 0.3, 0.9]))), [0.01, 0.3, 0.9], rtol=1e-14)


def test_generic_examples():
    assert eta0_generic(1.0, 1.0).value == 0.5
    c = 1 + 1 / math.sqrt(2)
    assert eta0_generic(c, 1.0).value == pytest.approx(0.17157287525381, rel=1e-12)
    assert eta0_generic(1.3, 2.0).value == pytest.approx(eta0_generic(1.3, 1.0).value / 4)
    for bad in ((0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)):
        with pytest.raises(DomainError):
            eta0_generic(*bad)


@given(st.floats(0.5, 10), st.floats(0.1, 10), st.floats(1.01, 2.0))
def test_generic_decreasing(c, sigma, f):
    v = eta0_generic(c, sigma).value
    assert v > 0
    assert eta0_generic(c * f, sigma).value < v
    assert eta0_generic(c, sigma * f).value < v


def test_bm_constant_and_scale():
    assert eta0_bm().value == pytest.approx(1 / (1 + math.sqrt(2)), rel=1e-15)
    assert f"{eta0_bm().value:.12f}" == "0.414213562373"
    assert bm_exponent_scale(1.0, 2.5) == 1.0
    assert bm_exponent_scale(4.0, 4.0) == pytest.approx(2.0)
    for bad in ((1.0, 2.0), (0.0, 3.0)):
        with pytest.raises(DomainError):
            bm_exponent_scale(*bad)


def test_c_uv_examples():
    assert c_uv(1, 1, "two_times_4") == pytest.approx(32 * math.pi**2 / 6, rel=1e-14)
    assert c_uv(1, 1, "literal_2.4") == pytest.approx(2.4**2 * math.pi**2 / 6, rel=1e-14)
    assert c_uv(1, 1, "literal_2.4") == pytest.approx(9.4748, abs=1e-4)
    with pytest.raises(DomainError):
        c_uv(1, 1, "2.4")


@pytest.mark.parametrize("interp", INTERPRETATIONS)
@pytest.mark.parametrize("rho,p", [(1.0, 2.5), (1.25, 2.6), (1.4, 2.9), (1.0, 4.0)])
def test_gaussian_constant_high_precision(interp, rho, p):
    got = eta0_gaussian(rho, p, interpretation=interp).value
    assert got == pytest.approx(float(mp_eta0_gaussian(rho, p, interp)), rel=1e-12)


def test_gaussian_requires_interpretation_and_valid_params():
    with pytest.raises(TypeError):
        eta0_gaussian(1.0, 2.5)
    for rho, p in ((2.0, 5.0), (1.25, 2.4), (0.9, 3.0)):
        with pytest.raises(DomainError):
            eta0_gaussian(rho, p, interpretation="literal_2.4")
    k = eta0_gaussian(1.0, 2.5, 2.0, interpretation="literal_2.4")
    assert k.threshold_scale == 0.5
    assert "two_times_4" in k.notes


def test_gaussian_monotone_in_c():
    # the two_times_4 base is larger for every exponent in range, so eta0 is smaller
    for rho, p in ((1.0, 2.5), (1.25, 2.6), (1.4, 3.0)):
        assert eta0_gaussian(rho, p, interpretation="two_times_4").value < eta0_gaussian(rho, p, interpretation="literal_2.4").value


def test_banach_examples():
    assert eta0_banach(2).value == pytest.approx(1 / (2 + math.sqrt(2)), rel=1e-15)
    assert f"{eta0_banach(2).value:.12f}" == "0.292893218813"
    ref4 = (mp.sqrt(2) * mp.mpf(3) ** mp.mpf("0.25") * (1 + 1 / mp.sqrt(2)) ** mp.mpf("0.25")) ** -2
    assert eta0_banach(4).value == pytest.approx(float(ref4), rel=1e-14)
    assert eta0_banach(math.inf).value == pytest.approx(1 / 6, rel=1e-15)
    assert eta0_banach(1e12).value == pytest.approx(1 / 6, rel=1e-10)
    with pytest.raises(DomainError):
        eta0_banach(1.9)


@given(st.floats(2.0, 100.0))
def test_banach_continuous_positive(p):
    v = eta0_banach(p).value
    assert 1 / 6 < v <= 1 / (2 + math.sqrt(2)) + 1e-15
    assert eta0_banach(p * (1 + 1e-9)).value == pytest.approx(v, rel=1e-7)
