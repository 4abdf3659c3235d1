from __future__ import annotations

import math
from dataclasses import replace

import pytest

from conftest import T0, days, make_vector
from smartvector.confidence import (
    ConfidenceParams,
    age_days,
    confidence,
    is_dormant,
    temporal_score,
)


@pytest.mark.parametrize(
    ("age", "expected"),
    [(0, 0.85), (30, 0.425), (60, 0.2125), (90, 0.10625), (180, 0.85 / 64)],
)
def test_decay_without_reinforcement(age, expected):
    assert confidence(make_vector(), days(age)) == pytest.approx(expected, abs=1e-12)


def test_feedback_and_access_by_hand():
    v = make_vector(positive_feedback=5, negative_feedback=2, access_count=10)
    decayed = 0.85 * 0.5
    clipped = min(1.0, max(0.01, decayed + 0.03 * 5 - 0.08 * 2))
    expected = min(1.0, clipped + 0.01 * math.log(11))
    assert expected == pytest.approx(0.438979, abs=1e-6)
    assert confidence(v, days(30)) == pytest.approx(expected, abs=1e-12)


def test_clipping_order():
    # the lower clip applies before the access bonus is added
    v = make_vector(base=0.2, negative_feedback=10, access_count=4)
    assert confidence(v, T0) == pytest.approx(0.01 + 0.01 * math.log(5))
    assert confidence(make_vector(base=0.99, positive_feedback=5, access_count=9), T0) == 1.0


def test_age_is_whole_days_and_clamped():
    v = make_vector()
    assert age_days(v, days(29.99)) == 29
    assert age_days(v, days(-5)) == 0
    assert confidence(v, days(-5)) == pytest.approx(0.85)


def test_temporal_score():
    v = make_vector(temporal_validity_start=T0, temporal_validity_end=days(60))
    assert temporal_score(v, T0) == 1.0
    assert temporal_score(v, days(30)) == 0.5
    assert temporal_score(v, days(61)) == 0.05
    assert temporal_score(v, days(-1)) == 0.05
    assert temporal_score(make_vector(), days(10_000)) > 0


def test_is_dormant():
    assert is_dormant(make_vector(), days(90))
    assert not is_dormant(make_vector(), T0)
    heavy = make_vector(access_count=50)
    assert confidence(heavy, days(90)) == pytest.approx(0.10625 + 0.01 * math.log(51))
    assert is_dormant(heavy, days(90))


def test_negative_outweighs_positive():
    base = make_vector()
    down = replace(base, negative_feedback=1)
    up = replace(base, positive_feedback=1)
    now = days(10)
    assert confidence(base, now) - confidence(down, now) > confidence(up, now) - confidence(base, now)
    both = replace(base, positive_feedback=1, negative_feedback=1)
    assert confidence(both, T0) == pytest.approx(0.85 - 0.05)


def test_vector_half_life_overrides_default():
    v = make_vector(half_life_days=10.0)
    assert confidence(v, days(10)) == pytest.approx(0.425)
    params = ConfidenceParams(half_life_days=60.0)
    assert confidence(make_vector(), days(60), params) == pytest.approx(0.425)


def test_params_validation_and_loading(tmp_path):
    with pytest.raises(ValueError):
        ConfidenceParams(alpha_pos=0.1, alpha_neg=0.05)
    with pytest.raises(ValueError):
        ConfidenceParams(half_life_days=0)
    with pytest.raises(ValueError):
        ConfidenceParams.from_mapping({"gamma": 1})
    kv = tmp_path / "params.conf"
    kv.write_text("# tuned\nhalf_life_days = 45\nbeta=0.02\n")
    assert ConfidenceParams.load(kv) == ConfidenceParams(half_life_days=45.0, beta=0.02)
    js = tmp_path / "params.json"
    js.write_text('{"dormant_threshold": 0.2}')
    assert ConfidenceParams.load(js).dormant_threshold == 0.2
