import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qeraser import experiments as ex
from qeraser.errors import DomainError
from qeraser.hilbert import StateVector, apply, fidelity
from qeraser.optics import (
    ScreenConfig,
    beam_splitter,
    incoherent_pattern,
    intensity,
    michelson,
    polarization_state,
    polarizer,
    raw_visibility,
    rotation,
    screen_amplitude,
    sum_patterns,
    visibility,
    wave_plate,
)

CFG = ScreenConfig()


def hand_intensity(theta, xs, a=2.0, s=3.0, k=1.5):
    """|f_u|^2 + |f_d|^2 + 2 cos(theta) Re(conj(f_u) f_d), written out directly."""
    fu = np.exp(-((xs - a) ** 2) / (4 * s * s) + 1j * k * xs)
    fd = np.exp(-((xs + a) ** 2) / (4 * s * s) - 1j * k * xs)
    return np.abs(fu) ** 2 + np.abs(fd) ** 2 + 2 * np.cos(theta) * np.real(np.conj(fu) * fd)


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0, np.pi))
def test_intensity_matches_hand_formula(theta):
    pat = intensity(ex.marked_state(theta), CFG)
    ref = hand_intensity(theta, CFG.xs)
    assert np.allclose(pat.intensity, ref / ref.sum(), atol=1e-14)
    assert abs(pat.intensity.sum() - 1) < 1e-12


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0, np.pi / 2))
def test_visibility_is_record_overlap(theta):
    # the polarization records are |up> and R(theta)|up>; their overlap bounds the fringes
    overlap = abs(np.vdot(polarization_state(0).amplitudes, polarization_state(theta).amplitudes))
    assert abs(intensity(ex.marked_state(theta), CFG).visibility - overlap) < 1e-9


def test_visibility_definitions():
    assert michelson(np.array([3.0, 1.0])) == pytest.approx(0.5)
    assert michelson(np.zeros(4)) == 0.0
    marked = intensity(ex.marked_state(np.pi / 2), CFG)
    assert visibility(marked) < 1e-12
    # without the split the Gaussian envelope slope alone gives a small raw value
    assert 0 < raw_visibility(marked) < 0.1


def test_incoherent_sum_keeps_split():
    a = incoherent_pattern({"upper": 0.5}, CFG)
    b = incoherent_pattern({"lower": 0.5}, CFG)
    s = sum_patterns([a, b])
    assert s.visibility < 1e-12
    assert s.intensity.sum() == pytest.approx(1.0)


def test_screen_amplitude_domain():
    assert abs(screen_amplitude(CFG, "upper", 2.0)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        screen_amplitude(CFG, "upper", 11.0)


def test_components_unitary_and_projective():
    assert beam_splitter().is_unitary()
    assert rotation(0.3).is_unitary()
    assert wave_plate("quarter", np.pi / 4).is_unitary()
    assert polarizer(0.7).is_projector()
    with pytest.raises(ValueError):
        wave_plate("third", 0.0)


def test_quarter_plate_twice_turns_polarization():
    up = polarization_state(0)
    q = wave_plate("quarter", np.pi / 4)
    twice = apply(q, apply(q, up))
    assert fidelity(twice, polarization_state(np.pi / 2)) == pytest.approx(1, abs=1e-12)


def test_beam_splitter_double_pass_is_identity():
    layout = beam_splitter().layout
    psi = StateVector.basis(layout, "u")
    bs = beam_splitter()
    assert fidelity(apply(bs, apply(bs, psi)), psi) == pytest.approx(1, abs=1e-14)
