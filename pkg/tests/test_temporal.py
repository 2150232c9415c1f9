import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from qeraser import temporal
from qeraser.errors import DomainError, LayoutError
from qeraser.hilbert import Operator, StateVector, SystemLayout, fidelity


@pytest.mark.parametrize("make,ts", [
    (lambda: temporal.decay_state(0.8), [0.0, 0.5, 2.0]),
    (temporal.cat_state, [0.0, 0.4, 1.2]),
])
def test_closed_form_amplitudes_follow_unitary(make, ts):
    st_ = make()
    psi0 = st_.state(0.0)
    for t in ts:
        evolved = StateVector(st_.layout, st_.unitary_fn(t) @ psi0.amplitudes)
        assert fidelity(evolved, st_.state(t)) == pytest.approx(1, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.1, 5.0), t=st.floats(0.05, 3.0))
def test_decay_density(lam, t):
    s = temporal.decay_state(lam)
    assert temporal.detection_cdf(s, t) == pytest.approx(-math.expm1(-lam * t), rel=1e-12)
    assert temporal.detection_density(s, t) == pytest.approx(lam * math.exp(-lam * t), rel=1e-6)


def test_density_falls_back_to_one_sided_at_edges():
    cat = temporal.cat_state()
    assert temporal.detection_density(cat, 0.0) == pytest.approx(0.0, abs=1e-7)
    z = temporal.passive_zeno_state(2.0)
    assert temporal.detection_density(z, 2.0) == pytest.approx(0.25, rel=1e-6)


def test_conditional_total_mass_is_one():
    # all channels integrate with the never-detected remainder to one
    cat = temporal.cat_state()
    t0 = 0.3
    total = quad(lambda t: temporal.conditional_density(cat, t, t0, channel="all"), t0, temporal.CAT_END)[0]
    assert total + temporal.residual_mass(cat, t0) == pytest.approx(1, abs=1e-6)
    z = temporal.passive_zeno_state(2.0)
    total = quad(lambda t: temporal.conditional_density(z, t, 0.5), 0.5, 2.0)[0]
    assert total + temporal.residual_mass(z, 0.5) == pytest.approx(1, abs=1e-6)


def test_next_interval_first_order_agrees_for_small_dt():
    s = temporal.decay_state(1.0)
    dt = 1e-5
    assert temporal.next_interval_probability(s, 0.5, dt) == pytest.approx(
        temporal.next_interval_exact(s, 0.5, dt), rel=1e-4)


def test_conditional_state_excludes_detections():
    c = temporal.conditional_state(temporal.cat_state(), 0.7)
    assert np.allclose(c.amplitudes[temporal.cat_state().mask({"smile", "frown"})], 0)
    assert temporal.conditional_state(temporal.passive_zeno_state(1.0), 1.0) is not None


def test_domain_errors():
    with pytest.raises(DomainError):
        temporal.cat_state().amplitudes(2.0)
    with pytest.raises(DomainError):
        temporal.decay_state(-1)
    with pytest.raises(DomainError):
        temporal.conditional_density(temporal.decay_state(1.0), 0.1, 0.5)
    with pytest.raises(DomainError):
        temporal.residual_mass(temporal.decay_state(1.0), 0.1)


@pytest.mark.parametrize("n", [1, 2, 5, 10, 40])
def test_zeno_survival_law(n):
    T = math.pi / 2
    assert temporal.zeno_survival(n, T) == pytest.approx(math.cos(T / n) ** (2 * n), abs=1e-12)


def test_zeno_freezes_with_many_checks():
    assert temporal.zeno_survival(1000, math.pi / 2) > 0.99


def test_time_ordering_simple_case():
    layout = SystemLayout([("a", 2), ("b", 2)])
    psi = StateVector(layout, np.ones(4) / 2)
    p = Operator(SystemLayout([("x", 2)]), np.diag([1.0, 0.0]))
    dev = temporal.time_ordering_invariance(psi, [0.3, -1.1], p, ["a"], p, ["b"], ((0.1, 2.0), (3.0, 0.5)))
    assert dev < 1e-12
    with pytest.raises(LayoutError):
        temporal.time_ordering_invariance(psi, [0, 0], p, ["a"], p, ["a"], ((0, 1), (1, 0)))
