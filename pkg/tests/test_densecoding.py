from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisy_sdc import reference as ref
from noisy_sdc.channels import ChannelKind, analytic_apply
from noisy_sdc.densecoding import (
    AZ_AFTER_BZ,
    AlphabetEnsemble,
    BracketError,
    EncodingCurve,
    Transmission,
    alphabet_amp_phase,
    alphabet_noisy_encoding,
    alphabet_pauli,
    capacity_bowen,
    capacity_closed,
    critical_omega,
    critical_time,
    first_maximum,
    holevo,
    transmission_value,
)
from noisy_sdc.entanglement import Noise
from noisy_sdc.qstate import Subsystem, bell_state, conjugate, negativity, on_qubit, pauli

from conftest import max_dev

PAULI_TX = st.sampled_from([ChannelKind.Z, ChannelKind.X, ChannelKind.XZ, ChannelKind.DEPOL])


def ideal_letters(rho):
    return AlphabetEnsemble(tuple(conjugate(rho, on_qubit(pauli(m), Subsystem.A)) for m in range(4)))


def test_holevo_examples():
    assert holevo(ideal_letters(bell_state())) == pytest.approx(2, abs=1e-12)
    assert holevo(AlphabetEnsemble((bell_state(),) * 4)) == pytest.approx(0, abs=1e-12)


def test_bowen_examples():
    assert capacity_bowen(bell_state()) == pytest.approx(2, abs=1e-12)
    assert capacity_bowen(np.eye(4) / 4) == pytest.approx(0, abs=1e-12)


def test_alphabet_needs_four_letters():
    with pytest.raises(ValueError):
        AlphabetEnsemble((bell_state(),) * 3)


def test_closed_capacity_limits():
    assert capacity_closed(ChannelKind.Z, 0.5, 0.0) == pytest.approx(2)
    assert capacity_closed(ChannelKind.XZ, 0.5, 0.0) == pytest.approx(2)
    assert capacity_closed(ChannelKind.Z, 1.0, 50.0) == pytest.approx(1, abs=1e-12)
    # the crossing sits at total time 0.124266, i.e. t0 = 0.062133 per leg
    assert capacity_closed(ChannelKind.XZ, 1.0, ref.CRITICAL_XZ / 2) == pytest.approx(1, abs=1e-5)


def test_closed_capacity_printed_expression():
    gamma, t0 = 0.7, 0.2
    e4, e8 = math.exp(-4 * gamma * t0), math.exp(-8 * gamma * t0)
    printed = (
        2
        + 0.5 * (1 - e8) * math.log2((1 - e8) / 4)
        + 0.5 * (1 - e4) ** 2 * math.log2((1 - e4) / 2)
        + 0.5 * (1 + e4) ** 2 * math.log2((1 + e4) / 2)
    )
    assert capacity_closed(ChannelKind.XZ, gamma, t0) == pytest.approx(printed, abs=1e-12)


@pytest.mark.parametrize("kind", [ChannelKind.Z, ChannelKind.X, ChannelKind.XZ])
def test_bowen_equivalence_grid(kind):
    for gamma in np.linspace(0.1, 2.0, 5):
        for t0 in np.linspace(0.0, 1.0, 5):
            h = holevo(alphabet_pauli(kind, gamma, t0))
            b = capacity_bowen(analytic_apply(kind, gamma, 2 * t0, bell_state()))
            c = capacity_closed(kind, gamma, t0)
            assert h == pytest.approx(b, abs=1e-8)
            assert h == pytest.approx(c, abs=1e-8)


def test_bit_flip_equals_phase_flip_capacity():
    for t0 in (0.1, 0.4, 1.2):
        assert holevo(alphabet_pauli(ChannelKind.X, 0.6, t0)) == pytest.approx(holevo(alphabet_pauli(ChannelKind.Z, 0.6, t0)), abs=1e-12)


def test_transmission_rejects_a_side_kind():
    with pytest.raises(ValueError):
        Transmission(ChannelKind.AZ, 1.0, 0.1)


def test_amp_phase_alphabet():
    assert holevo(alphabet_amp_phase(1.0, 0.0)) == pytest.approx(2, abs=1e-12)
    gamma, t0 = 0.8, 0.35
    assert max_dev(alphabet_amp_phase(gamma, t0).letters[0], ref.printed_az_after_bz(gamma, t0)) < 1e-12
    assert transmission_value(AZ_AFTER_BZ, 1.0, ref.CRITICAL_AMP_PHASE) == pytest.approx(1, abs=1e-4)


def test_amp_phase_is_not_a_bowen_form():
    gamma, t0 = 1.0, 0.1
    h = holevo(alphabet_amp_phase(gamma, t0))
    shared = alphabet_amp_phase(gamma, t0).letters[0]
    assert abs(h - capacity_bowen(shared)) > 1e-3


@pytest.mark.parametrize("family, expected", [(ChannelKind.XZ, ref.CRITICAL_XZ), (AZ_AFTER_BZ, ref.CRITICAL_AMP_PHASE)], ids=["XZ", "AZ_BZ"])
def test_critical_times(family, expected):
    ct = critical_time(family, 1.0)
    assert ct.tau_c == pytest.approx(expected, abs=1e-4)


def test_dephasing_has_no_critical_time():
    assert critical_time(ChannelKind.Z, 1.0).tau_c is None


@pytest.mark.parametrize("gamma", [0.25, 0.5, 1.0, 2.0])
def test_critical_time_precedes_sudden_death(gamma):
    ct = critical_time(ChannelKind.XZ, gamma)
    assert 3.0 < ct.ratio < 5.0
    assert negativity(analytic_apply(ChannelKind.XZ, gamma, ct.tau_c, bell_state())) > 0


def test_noiseless_encoding_is_perfect():
    for w in (0.5, 2.0):
        assert holevo(alphabet_noisy_encoding(Noise.PHASE, 0.0, w, math.pi / w)) == pytest.approx(2, abs=1e-8)


def test_noiseless_first_maximum():
    w = 1.0
    fm = first_maximum(EncodingCurve(Noise.PHASE, 0.0, w), 2 * math.pi / w, samples=400)
    assert fm.t == pytest.approx(math.pi / w, abs=1e-4)
    assert fm.value == pytest.approx(2, abs=1e-8)


def test_first_maximum_of_phase_encoding():
    fm = first_maximum(EncodingCurve(Noise.PHASE, ref.ENCODING_GAMMA, 1.0), 2 * math.pi)
    assert fm.value == pytest.approx(ref.ENCODING_FIRST_MAX, abs=2e-3)
    assert fm.t == pytest.approx(ref.ENCODING_FIRST_MAX_TIME, abs=5e-3)


def test_slow_encoding_stays_classical():
    fm = first_maximum(EncodingCurve(Noise.PHASE, 0.1, 0.5), 4 * math.pi)
    assert fm.found and fm.value < 1


def test_monotone_curve_has_no_maximum():
    fm = first_maximum(lambda t: t, 1.0, samples=50)
    assert not fm.found


@pytest.mark.parametrize("noise", [Noise.BIT_FLIP, Noise.BIT_PHASE_FLIP])
def test_other_pauli_encoding_noise_matches_phase(noise):
    times = np.linspace(0, 6, 61)
    ref_curve, _ = EncodingCurve(Noise.PHASE, 0.1, 1.0).sample(times)
    other, _ = EncodingCurve(noise, 0.1, 1.0).sample(times)
    assert max_dev(ref_curve, other) < 1e-8


def test_axis_two_letter_matches_axis_one():
    ens = alphabet_noisy_encoding(Noise.PHASE, 0.1, 1.0, 2.0)
    e1 = AlphabetEnsemble((ens.letters[0], ens.letters[1], ens.letters[1], ens.letters[3]))
    e2 = AlphabetEnsemble((ens.letters[0], ens.letters[2], ens.letters[2], ens.letters[3]))
    assert holevo(e1) == pytest.approx(holevo(e2), abs=1e-8)


def test_sampled_curve_matches_pointwise():
    curve = EncodingCurve(Noise.AMPLITUDE, 0.2, 1.5, Transmission(ChannelKind.XZ, 0.2, 0.1))
    times = np.linspace(0, 4, 9)
    sampled, _ = curve.sample(times)
    assert max_dev(sampled, [curve(t) for t in times]) < 1e-9


def test_critical_omega_grows_with_gamma():
    low = critical_omega(Noise.PHASE, 0.1)
    assert low.omega_c == pytest.approx(ref.CRITICAL_OMEGA, abs=1e-2)
    assert low.tau_c == pytest.approx(ref.CRITICAL_OMEGA_TIME, abs=5e-2)
    high = critical_omega(Noise.PHASE, 0.2, xtol=1e-3)
    assert high.omega_c > low.omega_c


def test_critical_omega_bracket_failure():
    with pytest.raises(BracketError, match="omega0"):
        critical_omega(Noise.PHASE, 0.1, scan=[0.1, 0.2])


def test_critical_omega_rejects_zero_gamma():
    with pytest.raises(ValueError):
        critical_omega(Noise.PHASE, 0.0)


@given(PAULI_TX, st.floats(0.05, 2.0), st.floats(0.0, 2.0))
def test_holevo_bounds_pauli(kind, gamma, t0):
    assert -1e-12 <= holevo(alphabet_pauli(kind, gamma, t0)) <= 2 + 1e-12


@given(st.floats(0.05, 2.0), st.floats(0.0, 2.0))
def test_holevo_bounds_amp_phase(gamma, t0):
    assert -1e-12 <= holevo(alphabet_amp_phase(gamma, t0).validate()) <= 2 + 1e-12


@given(st.sampled_from(list(Noise)), st.floats(0.0, 0.5), st.floats(0.2, 3.0), st.floats(0.0, 8.0))
def test_holevo_bounds_noisy_encoding(noise, gamma, w, t):
    ens = alphabet_noisy_encoding(noise, gamma, w, t).validate()
    assert -1e-12 <= holevo(ens) <= 2 + 1e-12


@pytest.mark.parametrize("kind", [ChannelKind.Z, ChannelKind.XZ, ChannelKind.BZ])
def test_combined_noise_below_each_single_noise(kind):
    gamma, w, t0 = 0.1, 1.0, 0.2
    times = np.linspace(0, 2 * math.pi, 63)
    combined, _ = EncodingCurve(Noise.PHASE, gamma, w, Transmission(kind, gamma, t0)).sample(times)
    encoding_only, _ = EncodingCurve(Noise.PHASE, gamma, w).sample(times)
    if kind is ChannelKind.BZ:
        transmission_only = holevo(alphabet_amp_phase(gamma, t0))
    else:
        transmission_only = holevo(alphabet_pauli(kind, gamma, t0))
    assert np.all(combined <= encoding_only + 1e-10)
    assert np.all(combined <= transmission_only + 1e-10)
