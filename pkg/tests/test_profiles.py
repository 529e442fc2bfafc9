"""Profile representation, energy, and functional evaluation.

Frozen integrals were computed with mpmath quad at 40 digits.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtlab.core import ProblemParams
from mtlab.errors import (
    DegenerateProfileError,
    DomainError,
    FunctionalOverflowError,
)
from mtlab.profiles import RadialProfile, moser_coordinate, radius_from_moser


def ramp_profile():
    return RadialProfile(2, [0.0, 2.0, 10.0], [0.0, 0.9, 1.1])


def test_coordinate_conversions():
    assert moser_coordinate(2, 1.0) == 0.0
    assert math.isclose(moser_coordinate(2, 0.1), 4.605170185988092, rel_tol=1e-15)
    assert math.isclose(radius_from_moser(3, 3.0), math.exp(-1.0), rel_tol=1e-15)
    with pytest.raises(DomainError):
        moser_coordinate(2, 0.0)
    with pytest.raises(DomainError):
        moser_coordinate(2, 1.5)
    with pytest.raises(DomainError):
        radius_from_moser(2, -0.1)


def test_validation_rejects_bad_input():
    with pytest.raises(DomainError):
        RadialProfile(1, [0.0, 1.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        RadialProfile(2, [0.5, 1.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        RadialProfile(2, [0.0, 1.0], [0.1, 1.0])
    with pytest.raises(DomainError):
        RadialProfile(2, [0.0, 1.0, 1.0], [0.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        RadialProfile(2, [0.0, math.nan], [0.0, 1.0])
    with pytest.raises(DomainError):
        RadialProfile(2, [0.0], [0.0])


def test_profile_arrays_are_frozen():
    prof = ramp_profile()
    with pytest.raises(ValueError):
        prof.values[1] = 5.0


def test_height_interpolation_and_constant_extension():
    prof = ramp_profile()
    assert prof.height_at(0.0) == 0.0
    assert math.isclose(float(prof.height_at(1.0)), 0.45, rel_tol=1e-15)
    assert math.isclose(float(prof.height_at(6.0)), 1.0, rel_tol=1e-15)
    assert float(prof.height_at(50.0)) == 1.1


def test_dirichlet_energy_closed_form():
    prof = ramp_profile()
    # 4 pi (0.9^2 / 2 + 0.2^2 / 8) in dimension two
    assert math.isclose(prof.dirichlet_energy(), 5.152211951887261, rel_tol=1e-14)


def test_dirichlet_energy_matches_radius_space_quadrature():
    # finite differences of u(r) = height(-n log r) on a fine radial grid
    prof = ramp_profile()
    r = np.linspace(1e-9, 1.0, 200001)
    u = prof.height_at(-2.0 * np.log(r))
    du = np.diff(u) / np.diff(r)
    rmid = 0.5 * (r[:-1] + r[1:])
    oracle = 2.0 * math.pi * np.sum(du**2 * rmid * np.diff(r))
    assert math.isclose(prof.dirichlet_energy(), float(oracle), rel_tol=1e-4)


def test_functional_value_zero_profile_is_ball_volume():
    prof = RadialProfile(2, [0.0, 1.0], [0.0, 0.0])
    params = ProblemParams(2, 1, 0.9)
    assert math.isclose(prof.functional_value(params), math.pi, rel_tol=1e-12)


def test_functional_value_frozen_oracle():
    prof = RadialProfile(2, [0.0, 1.0, 3.0], [0.0, 0.8, 1.2])
    params = ProblemParams(2, 1, 0.7, beta=0.9 * 4.0 * math.pi)
    value = prof.functional_value(params, tol=1e-11)
    assert math.isclose(value, 2290165.145562215, rel_tol=1e-10)


def test_functional_value_ramp_oracle():
    params = ProblemParams(2, 1, 1.0)
    value = ramp_profile().functional_value(params)
    assert math.isclose(value, 28459.306725318806, rel_tol=1e-10)


def test_functional_dimension_mismatch():
    with pytest.raises(DomainError):
        ramp_profile().functional_value(ProblemParams(3, 1, 0.5))


def test_functional_overflow():
    prof = RadialProfile(2, [0.0, 1.0], [0.0, 9.0])
    with pytest.raises(FunctionalOverflowError):
        prof.functional_value(ProblemParams(2, 1, 1.0))


def test_normalize_hits_unit_energy():
    prof = ramp_profile().normalize()
    assert math.isclose(prof.dirichlet_energy(), 1.0, rel_tol=1e-14)
    flat = RadialProfile(2, [0.0, 1.0], [0.0, 0.0])
    with pytest.raises(DegenerateProfileError):
        flat.normalize()


def test_concentration_fraction_frozen_oracle():
    params = ProblemParams(2, 1, 1.0)
    frac = ramp_profile().concentration_fraction(params, radius=0.3)
    assert math.isclose(frac, 0.8068507432988838, rel_tol=1e-9)
    # split radius inside the constant extension
    frac = ramp_profile().concentration_fraction(params, radius=math.exp(-6.0))
    assert math.isclose(frac, 0.0027225237746367485, rel_tol=1e-11)


def test_eval_report_fields():
    params = ProblemParams(2, 1, 1.0)
    report = ramp_profile().eval_report(params, conc_radius=0.3)
    assert math.isclose(report["value"], 28459.306725318806, rel_tol=1e-10)
    assert math.isclose(report["energy"], 5.152211951887261, rel_tol=1e-14)
    assert report["peak"] == 1.1
    assert math.isclose(report["conc_fraction"], 0.8068507432988838, rel_tol=1e-9)


def test_save_load_round_trip(tmp_path):
    prof = ramp_profile().normalize()
    path = tmp_path / "profile.txt"
    prof.save(path)
    back = RadialProfile.load(path)
    assert back.n == prof.n
    assert np.array_equal(back.knots, prof.knots)
    assert np.array_equal(back.values, prof.values)
    # byte stability of the serialization itself
    again = tmp_path / "again.txt"
    back.save(again)
    assert path.read_bytes() == again.read_bytes()


def test_load_rejects_malformed_files(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("no header\n0 0\n")
    with pytest.raises(DomainError):
        RadialProfile.load(path)
    path.write_text("# moser-profile n=2\n0 0 0\n")
    with pytest.raises(DomainError):
        RadialProfile.load(path)
    path.write_text("")
    with pytest.raises(DomainError):
        RadialProfile.load(path)


def test_from_radial_round_trip():
    prof = ramp_profile()
    back = RadialProfile.from_radial(2, prof.radii, prof.values)
    np.testing.assert_allclose(back.knots, prof.knots, rtol=0, atol=1e-13)
    np.testing.assert_array_equal(back.values, prof.values)
    with pytest.raises(DomainError):
        RadialProfile.from_radial(2, [1.0, 1.5], [0.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.floats(min_value=0.01, max_value=2.0), min_size=2, max_size=8
    ),
    st.floats(min_value=0.1, max_value=3.0),
)
def test_energy_scales_with_power_n(steps, scale):
    knots = np.concatenate(([0.0], np.cumsum(steps)))
    rng = np.random.default_rng(7)
    values = np.concatenate(([0.0], rng.uniform(-1.0, 1.0, size=len(steps))))
    prof = RadialProfile(2, knots, values)
    if prof.dirichlet_energy() == 0.0:
        return
    scaled = RadialProfile(2, knots, values * scale)
    assert math.isclose(
        scaled.dirichlet_energy(),
        scale**2 * prof.dirichlet_energy(),
        rel_tol=1e-12,
    )
    assert math.isclose(scaled.normalize().dirichlet_energy(), 1.0, rel_tol=1e-12)
