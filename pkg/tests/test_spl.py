import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realm_tta import robust_loss, spl
from realm_tta.spl import SplObjectiveSample


def test_closed_form_weights():
    assert spl.closed_form_weight(0.0, 0.4) == 1.0
    assert spl.closed_form_weight(1.0, 1.0) == pytest.approx(3 ** -0.5)
    assert spl.eata_closed_form_weight(1.0, 1.0) == 0.0
    assert spl.eata_closed_form_weight(1.5, 1.0) == 0.0
    assert spl.eata_closed_form_weight(1.0 - math.log(2), 1.0) == pytest.approx(2.0)


def test_brute_force_at_zero_loss():
    w, value = spl.brute_force_weight(SplObjectiveSample(0.0, 0.5))
    assert w == 1.0
    assert value == pytest.approx(0.0, abs=1e-12)


def test_brute_force_alpha_one():
    w, value = spl.brute_force_weight(SplObjectiveSample(1.0, 1.0))
    assert value == pytest.approx(math.sqrt(3) - 1, abs=1e-4)
    assert abs(w - 3 ** -0.5) <= 2e-4


def test_sample_validation():
    with pytest.raises(robust_loss.DomainError):
        SplObjectiveSample(-1.0, 0.5)
    with pytest.raises(robust_loss.DomainError):
        SplObjectiveSample(1.0, 0.5, w_grid_resolution=0.1)


def test_weight_grid_excludes_zero():
    w = spl.weight_grid(1e-2)
    assert w[0] == pytest.approx(0.01) and w[-1] == 1.0 and len(w) == 100


def test_equivalence_default_grid_passes():
    t = np.round(np.arange(0, 101) * 0.1, 10)
    rep = spl.equivalence_check(t, [0.15, 0.5, 1.0, 1.5, 1.9])
    assert rep.passed
    assert rep.max_value_dev <= 1e-4 and rep.max_w_dev <= 2e-4
    doc = json.loads(rep.to_json())
    assert doc["grid_dims"] == [101, 5] and doc["pass"] and doc["failures"] == []


def test_equivalence_zero_tolerance_fails():
    rep = spl.equivalence_check([0.5, 1.0, 3.3], [0.5, 1.0], tolerance=0.0)
    assert not rep.passed


def test_single_cell_at_zero_passes():
    assert spl.equivalence_check([0.0], [0.15], tolerance=1e-15).passed


def test_bad_alpha_recorded_not_raised():
    rep = spl.equivalence_check([0.0, 1.0], [0.5, 2.0])
    assert not rep.passed
    failures = json.loads(rep.to_json())["failures"]
    assert len(failures) == 2 and all("error" in f for f in failures)


@given(loss=st.floats(0.0, 3.0), lam=st.floats(0.01, 3.0))
def test_l1_regularizer_recovers_hard_threshold(loss, lam):
    # w * L - lam * w is linear in w, so the argmin is the hard indicator
    w = spl.brute_force_l1_weight(loss, lam)
    if loss < lam - 1e-9:
        assert w == 1.0
    elif loss > lam + 1e-9:
        assert w == 0.0


@given(t=st.floats(0.0, 10.0), alpha=st.floats(0.1, 1.9))
@settings(max_examples=30)
def test_brute_force_matches_closed_form(t, alpha):
    w, value = spl.brute_force_weight(SplObjectiveSample(t, alpha, 1e-3))
    assert value == pytest.approx(robust_loss.rho_canonical(t, alpha), abs=1e-4)
    assert value >= robust_loss.rho_canonical(t, alpha) - 1e-12  # grid can only overshoot the min
