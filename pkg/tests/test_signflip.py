"""Flip characterizations: direct signs, interval form, decision tree."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import make_models
from obdflip import (
    NonPositiveParameterError,
    alignment_holds,
    decision_tree_unexplained,
    decompose_both,
    explained_flip,
    pair_flip_masks,
    unbounded_gap_instance,
    unexplained_flip,
)
from obdflip.signflip import SIGN_RTOL

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def model_pairs(draw, d_max=3):
    d = draw(st.integers(1, d_max))
    vec = st.lists(finite, min_size=d, max_size=d)
    return make_models(
        draw(finite), draw(vec), draw(vec), draw(finite), draw(vec), draw(vec)
    )


def test_pair_flip_masks_cases():
    first = np.array([1.0, -1.0, 1.0, 0.0, 1e-20, 2.0])
    second = np.array([-1.0, -2.0, 1.0, 1.0, 1.0, 1e-20])
    flip, boundary = pair_flip_masks(first, second)
    assert flip.tolist() == [True, False, False, False, False, False]
    # exact zeros and magnitudes within tolerance of zero are boundaries
    assert boundary.tolist() == [False, False, False, True, True, True]


def test_pair_flip_masks_tolerance_scales():
    big = 1e12
    first = np.array([big, SIGN_RTOL * big / 2.0])
    second = np.array([-big, -big])
    flip, boundary = pair_flip_masks(first, second)
    assert flip.tolist() == [True, False]
    assert boundary.tolist() == [False, True]


def test_textbook_flip(textbook_models):
    mh, mk = textbook_models
    assert unexplained_flip(mh, mk).flip
    assert not explained_flip(mh, mk).flip
    assert not alignment_holds(mh, mk)
    report = decision_tree_unexplained(mh, mk)
    assert report.unexplained_flip and not report.explained_flip
    joined = " ".join(step.description for step in report.branch_trace)
    assert "10 < 10.4 < 10.8" in joined


def _interval_form(mh, mk):
    a = float(mh.mu @ (mh.beta - mk.beta))
    b = float(mk.mu @ (mh.beta - mk.beta))
    c = mh.alpha - mk.alpha
    return a != b and min(a, b) < -c < max(a, b)


def _remark_form(mh, mk):
    dmu = mh.mu - mk.mu
    eh, ek = float(dmu @ mh.beta), float(dmu @ mk.beta)
    return (eh > 0 > ek) or (eh < 0 < ek)


@given(model_pairs())
def test_unexplained_characterizations_agree(pair):
    mh, mk = pair
    direct = unexplained_flip(mh, mk)
    tree = decision_tree_unexplained(mh, mk)
    assert tree.unexplained_flip == direct.flip
    assert tree.unexplained_boundary == direct.boundary
    if not direct.boundary:
        assert direct.flip == _interval_form(mh, mk)


@given(model_pairs())
def test_explained_characterizations_agree(pair):
    mh, mk = pair
    direct = explained_flip(mh, mk)
    if not direct.boundary:
        assert direct.flip == _remark_form(mh, mk)


@given(model_pairs(), st.sampled_from([1.0, -1.0]), st.floats(0.01, 100.0))
def test_alignment_forbids_unexplained_flip(pair, sign, c_mag):
    mh, mk = pair
    dbeta = mh.beta - mk.beta
    a = float(mh.mu @ dbeta)
    b = float(mk.mu @ dbeta)
    scale = max(abs(a), abs(b), 1.0)
    if not (sign * a > SIGN_RTOL * scale and sign * b > SIGN_RTOL * scale):
        return  # construction needs mu'dbeta of one strict shared sign
    # pick dalpha with the same strict sign: all three quantities align
    mh2, mk2 = make_models(sign * c_mag * scale, mh.beta, mh.mu, 0.0, mk.beta, mk.mu)
    assert alignment_holds(mh2, mk2)
    verdict = unexplained_flip(mh2, mk2)
    assert not verdict.flip


def test_boundary_short_circuit():
    # mu_K'dbeta == -dalpha exactly: U_H is 0, the verdict is boundary
    mh, mk = make_models(2.0, [2.0], [3.0], 0.0, [1.0], [-2.0])
    verdict = unexplained_flip(mh, mk)
    assert verdict.boundary and not verdict.flip
    report = decision_tree_unexplained(mh, mk)
    assert report.unexplained_boundary
    assert "within sign tolerance" in report.branch_trace[0].description


def test_degenerate_sign_falls_back_to_interval():
    # dalpha = 0 with opposite-sign mu'dbeta: a zero enters the sign
    # bookkeeping, so the tree reports via the interval test
    mh, mk = make_models(0.0, [2.0], [1.0], 0.0, [1.0], [-1.0])
    report = decision_tree_unexplained(mh, mk)
    assert report.unexplained_flip
    assert any("interval test" in step.description for step in report.branch_trace)


def test_equal_projections_never_flip():
    # mu_H'dbeta == mu_K'dbeta: the unexplained component is reference-free
    mh, mk = make_models(5.0, [2.0], [1.5], 1.0, [1.0], [1.5])
    report = decision_tree_unexplained(mh, mk)
    assert not report.unexplained_flip


def test_unbounded_gap_instance_geometry():
    mh, mk = unbounded_gap_instance(20.0, 0.1)
    dual = decompose_both(mh, mk)
    assert dual.total_gap == 1.0
    assert dual.by_h.explained - dual.by_k.explained == pytest.approx(2.0, rel=1e-12)
    assert dual.by_h.unexplained == -dual.by_k.unexplained
    # growing separation leaves the total at 1 while the spread explodes
    wide = decompose_both(*unbounded_gap_instance(2000.0, 0.1))
    assert wide.total_gap == pytest.approx(1.0, abs=1e-9)
    assert wide.by_h.explained - wide.by_k.explained == pytest.approx(200.0, rel=1e-9)


def test_unbounded_gap_instance_validation():
    with pytest.raises(NonPositiveParameterError):
        unbounded_gap_instance(0.0, 0.1)
    with pytest.raises(NonPositiveParameterError):
        unbounded_gap_instance(10.0, -1.0)
