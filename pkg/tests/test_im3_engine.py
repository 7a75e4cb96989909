import math
import subprocess
import sys
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from im3kit import _kernels_py, kernels
from im3kit.channel_plan import NonlinearityModel, build_uniform_plan, equal_plan, gridify
from im3kit.closed_form import equal_power_aci
from im3kit.im3_engine import (AciProfile, ProductClass, aci_power, aci_power_coherent, aci_profile,
                               coherent_upper_bound, enumerate_products, power_db,
                               signal_term_amplitude)
from oracles import cube_products_at, cube_spectrum, products_at

UNIT = NonlinearityModel(0.0, 1.0)
amps_strategy = st.lists(st.floats(0.0, 3.0, allow_nan=False), min_size=1, max_size=9)


def plan_of(amps, f0=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_uniform_plan(100.0 if f0 is None else f0, 1.0, amps)


def test_three_channel_center():
    prods = enumerate_products(equal_plan(3), 2)
    assert len(prods) == 1
    (p,) = prods
    assert p.cls is ProductClass.TRIPLE
    assert p.signature == ((1, 1), (2, -1), (3, 1))
    assert p.amplitude == 1.5
    assert p.landing_channel() == 2


def test_three_channel_edge():
    (p,) = enumerate_products(equal_plan(3), 1)
    assert p.cls is ProductClass.DOUBLE
    assert p.source_indices == (2, 3)
    assert p.amplitude == 0.75
    assert p.signature == ((2, 2), (3, -1))


@pytest.mark.parametrize("N", [1, 2])
def test_no_products_below_three(N):
    for n in range(1, N + 1):
        assert enumerate_products(plan_of([1.3, 0.7][:N]), n) == []
        assert aci_power(plan_of([1.3, 0.7][:N]), UNIT, n) == 0


def test_product_invariants():
    plan = plan_of([1.0, 0.5, 2.0, 1.5, 0.2, 1.1, 0.9])
    for n in range(1, 8):
        for p in enumerate_products(plan, n):
            coeffs = p.coefficients(7)
            assert sum(coeffs) == 1
            assert sum(c * m for m, c in enumerate(coeffs)) == n - 1
            A = plan.amplitudes
            if p.cls is ProductClass.DOUBLE:
                i, k = p.source_indices
                assert p.amplitude == pytest.approx(0.75 * A[k - 1] * A[i - 1] ** 2, rel=1e-15)
            else:
                a, b, c = p.source_indices
                assert p.amplitude == pytest.approx(1.5 * A[a - 1] * A[b - 1] * A[c - 1], rel=1e-15)


def test_aci_power_examples():
    plan = equal_plan(3)
    assert aci_power(plan, UNIT, 2) == 9 / 8
    assert aci_power(plan, UNIT, 1) == 9 / 32
    assert aci_power(plan, UNIT, 2) / aci_power(plan, UNIT, 1) == 4
    assert aci_profile(plan, UNIT).powers.tolist() == [9 / 32, 9 / 8, 9 / 32]


def test_out_of_range():
    with pytest.raises(IndexError):
        aci_power(equal_plan(3), UNIT, 4)
    with pytest.raises(IndexError):
        enumerate_products(equal_plan(3), 0)
    with pytest.raises(ValueError):
        aci_power_coherent(equal_plan(3), UNIT, 1, [0.0, 0.0])


@pytest.mark.parametrize("N", range(1, 9))
def test_enumeration_matches_term_by_term_expansion(N):
    rng = np.random.default_rng(N)
    amps = list(rng.uniform(0.3, 2.0, N))
    plan = plan_of(amps)
    freqs = [100 + k for k in range(N)]
    for n in range(1, N + 1):
        ref = products_at(freqs, amps, 100 + n - 1)
        got = {tuple((m - 1, c) for m, c in p.signature): p.amplitude
               for p in enumerate_products(plan, n)}
        assert set(got) == set(ref)
        for s in ref:
            assert got[s] == pytest.approx(ref[s], rel=1e-13)


@pytest.mark.parametrize("N", range(1, 8))
def test_enumeration_matches_exponential_expansion(N):
    amps = list(np.random.default_rng(100 + N).uniform(0.3, 2.0, N))
    plan = plan_of(amps)
    for n in range(1, N + 1):
        ref = cube_products_at(amps, n - 1)
        got = {tuple((m - 1, c) for m, c in p.signature): p.amplitude
               for p in enumerate_products(plan, n)}
        assert set(got) == set(ref)
        for s in ref:
            assert got[s] == pytest.approx(ref[s], rel=1e-13)


@pytest.mark.parametrize("N", range(1, 7))
def test_signal_term_matches_exponential_expansion(N):
    amps = list(np.random.default_rng(7 + N).uniform(0.3, 2.0, N))
    plan = plan_of(amps)
    spec = cube_spectrum(amps)
    for k in range(N):
        vec = tuple(1 if m == k else 0 for m in range(N))
        assert signal_term_amplitude(plan, UNIT, k + 1) == pytest.approx(2 * spec[vec], rel=1e-13)


def test_signal_term_examples():
    assert signal_term_amplitude(plan_of([1.0]), UNIT, 1) == 0.75
    p3 = equal_plan(3)
    assert [signal_term_amplitude(p3, UNIT, k) for k in (1, 2, 3)] == [3.75] * 3
    assert signal_term_amplitude(plan_of([1.0, 0.0, 1.0]), UNIT, 2) == 0
    assert signal_term_amplitude(p3, NonlinearityModel(2.0, 0.0), 1) == 2.0


def test_sum_of_products_equals_kernel():
    plan = plan_of([1.0, 0.0, 2.0, 1.5, 0.0, 0.3, 1.1, 0.9, 2.2])
    for n in range(1, 10):
        s = 0.0
        for p in enumerate_products(plan, n):
            s += p.amplitude * p.amplitude * 0.5
        assert aci_power(plan, UNIT, n) == s


def test_backends_bit_identical():
    amps = list(np.random.default_rng(3).uniform(0.0, 2.0, 40)) + [0.0, 1.0]
    a = _kernels_py.profile_powers(amps, -1.7)
    b = kernels.profile_powers(amps, -1.7)
    assert a == b
    assert kernels.channel_power(amps, 7, 0.3) == _kernels_py.channel_power(amps, 7, 0.3)


def test_forced_fallback_backend():
    out = subprocess.run([sys.executable, "-c", "import im3kit; print(im3kit.BACKEND)"],
                         env={"IM3KIT_PURE_PYTHON": "1", "PATH": ""}, capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("N", [3, 4, 9, 10, 31])
def test_equal_amplitude_closed_form(N):
    plan = equal_plan(N, amplitude=1.3)
    model = NonlinearityModel(0.0, -0.7)
    for n in range(1, N + 1):
        assert aci_power(plan, model, n) == pytest.approx(
            equal_power_aci(N, n, 1.3, -0.7), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(amps_strategy, st.floats(0.1, 3.0))
def test_amplitude_scaling(amps, s):
    base = aci_profile(plan_of(amps), UNIT).powers
    scaled = aci_profile(plan_of([a * s for a in amps]), UNIT).powers
    np.testing.assert_allclose(scaled, base * s**6, rtol=1e-12, atol=1e-300)


@settings(max_examples=50, deadline=None)
@given(amps_strategy, st.floats(-3.0, 3.0).filter(lambda r: abs(r) > 1e-3))
def test_rho3_scaling(amps, r):
    base = aci_profile(plan_of(amps), UNIT).powers
    got = aci_profile(plan_of(amps), NonlinearityModel(5.0, r)).powers
    np.testing.assert_allclose(got, base * r * r, rtol=1e-12, atol=1e-300)


@settings(max_examples=50, deadline=None)
@given(amps_strategy)
def test_mirror_symmetry(amps):
    plan = plan_of(amps)
    fwd = aci_profile(plan, UNIT).powers
    rev = aci_profile(plan.reversed(), UNIT).powers
    np.testing.assert_allclose(rev, fwd[::-1], rtol=1e-13, atol=0)


@settings(max_examples=50, deadline=None)
@given(amps_strategy, st.integers(0, 4), st.integers(0, 4), st.integers(1, 3))
def test_pseudo_channel_neutrality(amps, pad_lo, pad_hi, refine):
    """Refining the grid and padding it with pseudo channels leaves real-channel ACI unchanged."""
    plan = plan_of(amps)
    grid = [0.0] * pad_lo
    for a in amps:
        grid += [a] + [0.0] * (refine - 1)
    grid = grid[: len(grid) - (refine - 1)] + [0.0] * pad_hi
    big = plan_of(grid)
    for k in range(1, len(amps) + 1):
        kb = pad_lo + (k - 1) * refine + 1
        assert aci_power(big, UNIT, kb) == pytest.approx(aci_power(plan, UNIT, k), rel=1e-13, abs=0)


def test_coherent_single_product_phase_independent():
    plan = equal_plan(3)
    for seed in range(5):
        th = np.random.default_rng(seed).uniform(0, 2 * np.pi, 3)
        assert aci_power_coherent(plan, UNIT, 2, th) == pytest.approx(1.125, rel=1e-14)


def test_coherent_all_equal_phases_is_upper_bound():
    plan = equal_plan(5)
    allzero = aci_power_coherent(plan, UNIT, 3, [0.0] * 5)
    amps = [p.amplitude for p in enumerate_products(plan, 3)]
    assert allzero == pytest.approx(sum(amps) ** 2 / 2, rel=1e-14)
    assert allzero == pytest.approx(coherent_upper_bound(plan, UNIT, 3))
    assert allzero >= aci_power(plan, UNIT, 3)


def test_coherent_expectation_converges():
    plan = plan_of([1.0, 0.6, 1.4, 0.9, 1.2, 0.7])
    rng = np.random.default_rng(11)
    for n in (1, 3, 6):
        draws = np.array([aci_power_coherent(plan, UNIT, n, rng.uniform(0, 2 * np.pi, 6))
                          for _ in range(4000)])
        se = draws.std(ddof=1) / math.sqrt(len(draws))
        assert abs(draws.mean() - aci_power(plan, UNIT, n)) <= 4 * se


def test_profile_container():
    prof = aci_profile(equal_plan(3), UNIT, normalization="per_N_squared")
    assert prof.powers.tolist() == [0.03125, 0.125, 0.03125]
    assert prof.raw.tolist() == [9 / 32, 9 / 8, 9 / 32]
    with pytest.raises(ValueError):
        AciProfile(np.zeros(2), 3)
    with pytest.raises(ValueError):
        AciProfile(np.zeros(3), 3, "db")


def test_power_db():
    assert power_db(2.0, 2.0) == 0.0
    assert power_db(10.0) == pytest.approx(10.0)
    assert power_db(0.0) == -math.inf


def test_section4_pseudo_slots_collect_products():
    plan = gridify([5, 7, 10, 14], [1, 2, 3, 4])
    prof = aci_profile(plan, UNIT)
    real = [k - 1 for k in plan.real_indices]
    assert prof.powers[real].tolist() == [0, 0, 0, 0]
    assert prof.powers.sum() > 0
