import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hellmann.model import (
    InvalidParameters,
    ModelKind,
    PotentialParams,
    ScaledParams,
    StateLabel,
    continuum_threshold,
    from_scaled,
    potential_value,
    r2_potential_series,
    to_scaled,
)

TRUE, MOD = ModelKind.TRUE_HELLMANN, ModelKind.MODIFIED


@pytest.mark.parametrize(
    "A, B, C, k, b, lam",
    [
        (1, 0.5, 0.01, 1, 1.0, 0.01),
        (2, 1, 0.02, 2, 1.0, 0.02),
        (1, -0.3, 0.05, 1, -0.6, 0.05),
    ],
)
def test_to_scaled_examples(A, B, C, k, b, lam):
    p = to_scaled(A, B, C, k)
    assert p.b == pytest.approx(b, rel=1e-15)
    assert p.lam == pytest.approx(lam, rel=1e-15)


@pytest.mark.parametrize("A, k", [(0, 1), (-1, 1), (1, 0), (1, -2)])
def test_to_scaled_rejects_nonpositive(A, k):
    with pytest.raises(InvalidParameters):
        to_scaled(A, 0.5, 0.01, k)


@settings(max_examples=200, deadline=None)
@given(
    A=st.floats(1e-3, 1e3),
    B=st.floats(-1e3, 1e3),
    C=st.floats(0, 1e3),
    k=st.floats(1e-3, 1e3),
)
def test_to_scaled_round_trip(A, B, C, k):
    A2, B2, C2 = from_scaled(to_scaled(A, B, C, k), A, k)
    assert A2 == A
    assert B2 == pytest.approx(B, rel=1e-14, abs=1e-300)
    assert C2 == pytest.approx(C, rel=1e-14, abs=1e-300)


def test_param_invariants():
    with pytest.raises(InvalidParameters):
        PotentialParams(a=-1, b=0, lam=0.1)
    with pytest.raises(InvalidParameters):
        ScaledParams(b=1, lam=-0.1)
    with pytest.raises(InvalidParameters):
        StateLabel(1, 1)


def test_state_labels():
    lab = StateLabel.parse("4f")
    assert (lab.nu, lab.l, lab.n_r) == (4, 3, 0)
    assert StateLabel(3, 0).n_r == 2
    assert str(StateLabel(2, 1)) == "2p"


def test_true_potential_coulomb_tail():
    p = ScaledParams(1, 0.01)
    for r in (1e3, 1e4):
        v = potential_value(p, TRUE, 0, r)
        assert v < 0
        assert v == pytest.approx(-2.0 / r, rel=1e-3)


@pytest.mark.parametrize("l, limit", [(0, -0.02), (2, -0.0194)])
def test_modified_potential_limit(l, limit):
    # at lambda r = 100 the potential is at its asymptote to double precision
    p = ScaledParams(1, 0.01)
    assert potential_value(p, MOD, l, 1e4) == pytest.approx(limit, rel=1e-12)


def test_potential_rejects_origin():
    with pytest.raises(InvalidParameters):
        potential_value(ScaledParams(1, 0.01), TRUE, 0, 0.0)


def test_lambda_zero_both_kinds_coulomb():
    p = ScaledParams(0.5, 0.0)
    r = np.linspace(0.1, 10, 50)
    expected = 2 / r**2 + (0.5 - 2) / r
    assert np.allclose(potential_value(p, TRUE, 1, r), expected, rtol=1e-14)
    assert np.allclose(potential_value(p, MOD, 1, r), expected, rtol=1e-14)


@pytest.mark.parametrize(
    "lam, kind, l, expected",
    [(0.01, TRUE, 3, 0.0), (0.01, MOD, 0, -0.02), (0.5, MOD, 1, -0.5)],
)
def test_continuum_threshold(lam, kind, l, expected):
    assert continuum_threshold(ScaledParams(1, lam), kind, l) == pytest.approx(expected, abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(lam=st.floats(1e-6, 10), r=st.floats(1e-6, 1e3))
def test_substituted_forms_dominate(lam, r):
    g = lam / -math.expm1(-lam * r)
    assert g > 1 / r
    assert g * g > 1 / r**2


def test_difference_vanishes_and_grows_with_lambda():
    r = 2.0
    diffs = []
    for lam in (1e-9, 0.001, 0.01, 0.1, 0.5):
        p = ScaledParams(1, lam)
        diffs.append(abs(potential_value(p, TRUE, 1, r) - potential_value(p, MOD, 1, r)))
    assert abs(diffs[0]) < 1e-7
    assert all(a < b for a, b in zip(diffs[1:], diffs[2:]))


def test_modified_series_branch_continuous():
    p = ScaledParams(1, 1.0)
    for l in (0, 2):
        below = potential_value(p, MOD, l, 0.99999e-4)
        above = potential_value(p, MOD, l, 1.00001e-4)
        # the potential varies like l(l+1)/r^2 - 1/r; compare against its local slope
        scale = abs(potential_value(p, MOD, l, 1.0000e-4)) * 1e-4
        assert abs(below - above) < scale


@pytest.mark.parametrize("kind", [TRUE, MOD])
@pytest.mark.parametrize("l", [0, 1, 3])
def test_r2_series_matches_potential(kind, l):
    p = ScaledParams(0.7, 0.3)
    E = -0.4
    q = r2_potential_series(p, kind, l, E, 10)
    for r in (0.05, 0.2):
        direct = r * r * (potential_value(p, kind, l, r) - E)
        assert np.polyval(q[::-1], r) == pytest.approx(direct, rel=1e-12)
