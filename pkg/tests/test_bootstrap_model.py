import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from encperf.bootstrap_model import (
    DomainError, ModuloApprox, bootstrap_error, build_modulo_approx, centered_mod,
    default_modulo_approx, form_value, load_modulo_approx, max_relative_error,
    reset_multiplier, sector_check, sector_multiplier,
)


@pytest.fixture(scope="module")
def modulo():
    return default_modulo_approx()


def _mp_reference(z, r, q=1.0):
    """``q/(2 pi) S(sin(2 pi (z + r q) / q)) - (z mod q)`` at 50 digits."""
    mpmath.mp.dps = 50
    s = mpmath.sin(2 * mpmath.pi * (mpmath.mpf(z) + r * q) / q)
    p = q / (2 * mpmath.pi) * (s + s**3 / 6 + 3 * s**5 / 40)
    zm = mpmath.mpf(z) - q * mpmath.floor(mpmath.mpf(z) / q + mpmath.mpf(1) / 2)
    return float(p - zm)


@given(st.floats(-50, 50, allow_nan=False), st.sampled_from([0.5, 1.0, 7.0]))
def test_centered_mod_range(z, q):
    m = float(centered_mod(z, q))
    assert -q / 2 <= m < q / 2
    k = (z - m) / q
    assert abs(k - round(k)) < 1e-9


def test_fixture_sector_bound_on_grid(modulo):
    assert modulo.gamma == pytest.approx(0.223)
    assert len(modulo.intervals) == 5
    samples = []
    for z in modulo.grid(10_000):
        zm = centered_mod(z, modulo.q)
        samples.extend((zi, ei) for zi, ei in zip(zm, modulo(z) - zm))
    assert sector_check(samples, sector_multiplier(modulo.gamma, 1))
    assert max_relative_error(modulo) <= modulo.gamma


def test_fixture_matches_rebuild(modulo):
    assert build_modulo_approx(degree=111) == modulo


@pytest.mark.parametrize("z,r", [(0.1, 0), (-0.2, 2), (0.05, -1), (0.24, -2)])
def test_residual_against_high_precision(modulo, z, r):
    assert float(bootstrap_error(modulo, z, r)[0]) == pytest.approx(_mp_reference(z, r), abs=1e-10)


def test_wide_window_example():
    # 0.3 q lies outside the default quarter-period windows, so widen them
    m = build_modulo_approx(half_width=0.35, degree=111, gamma=1.0)
    got = float(bootstrap_error(m, 0.3, 1)[0])
    assert got == pytest.approx(_mp_reference(0.3, 1), abs=1e-10)


def test_outside_windows_raises(modulo):
    with pytest.raises(DomainError):
        bootstrap_error(modulo, 0.3, 1)
    with pytest.raises(DomainError):
        bootstrap_error(modulo, 0.0, 3)


def test_zero_is_fixed_point(modulo):
    assert abs(float(bootstrap_error(modulo, 0.0, 0)[0])) < 1e-12


def test_round_trip(tmp_path, modulo):
    path = tmp_path / "m.json"
    modulo.save(path)
    again = load_modulo_approx(path)
    assert again == modulo
    assert np.array_equal(again(np.linspace(-2, 2, 7)), modulo(np.linspace(-2, 2, 7)))


def test_bad_format():
    with pytest.raises(ValueError):
        ModuloApprox.from_dict({"format": "other"})


def test_fit_that_cannot_meet_gamma():
    with pytest.raises(ValueError):
        build_modulo_approx(gamma=0.1, degree=111)


def test_sector_boundary_and_violation():
    g = 0.223
    M = sector_multiplier(g, 3)
    z = np.array([0.4, -1.0, 2.0])
    assert form_value(M, z, g * z) == pytest.approx(0.0, abs=1e-12)
    assert sector_check([(z, g * z), (z, -g * z), (z, 0.5 * g * z)], M)
    assert not sector_check([(z, 2 * g * z)], M)


def test_sector_zero_gamma_allows_only_zero_error():
    M = sector_multiplier(0.0, 1)
    assert sector_check([([1.0], [0.0])], M)
    assert not sector_check([([1.0], [1e-3])], M)


def test_negative_gamma_rejected():
    with pytest.raises(ValueError):
        sector_multiplier(-0.1, 2)


def test_reset_multiplier_accepts_only_minus_one():
    M = reset_multiplier(2)
    z = np.array([0.7, -1.3])
    accepted = [a for a in np.round(np.arange(-2, 2.0001, 0.05), 10)
                if sector_check([(z, a * z)], M)]
    assert accepted == [-1.0]


@settings(max_examples=50)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2),
       st.floats(-1, 1, allow_nan=False))
def test_sector_accepts_inside(z, frac):
    g = 0.223
    z = np.array(z)
    assert sector_check([(z, frac * g * z)], sector_multiplier(g, 2))
