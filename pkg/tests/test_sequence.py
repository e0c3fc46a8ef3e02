import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvscope.sequence import (
    HALF_PI,
    PI,
    XY16_PHASES,
    Block,
    Delay,
    LaserInit,
    LaserRead,
    MwPulse,
    ParameterError,
    ParseError,
    PulseProgram,
    RfPulse,
    TimingError,
    build_correlation,
    build_fid,
    build_polarization_transient,
    build_pulsepol,
    build_pulsepol_spectrum_point,
    build_rabi,
    build_xy16,
    build_xy16_readout,
    flatten,
    format_sequence,
    parse_sequence,
    pulsepol_unit,
)

taus = st.floats(0.05, 5.0)
n16 = st.integers(1, 8).map(lambda k: 16 * k)


def test_xy16_phase_pattern_and_timing():
    p = build_xy16(16, 0.4115)
    assert p.n_pi == 16
    assert p.duration == pytest.approx(6.584)
    axes = [e.axis for e in p.flat() if isinstance(e, MwPulse)]
    assert tuple(axes) == XY16_PHASES
    times = p.pulse_times()
    assert times[0] == pytest.approx(0.4115 / 2)
    assert all(b - a == pytest.approx(0.4115) for a, b in zip(times, times[1:]))


@given(n16, taus)
def test_xy16_counts_and_duration(n, tau):
    p = build_xy16(n, tau)
    assert p.n_pi == n
    assert p.duration == pytest.approx(n * tau, rel=1e-12)


def test_xy16_rejects_bad_count():
    for n in (17, 0, -16, 8):
        with pytest.raises(ParameterError):
            build_xy16(n, 0.4)
    with pytest.raises(ParameterError):
        build_xy16(16, 0.0)


def test_xy16_readout_structure():
    p = build_xy16_readout(64, 0.4115)
    flat = list(p.flat())
    assert isinstance(flat[0], LaserInit) and isinstance(flat[-1], LaserRead)
    assert p.n_pi == 64 and p.n_half_pi == 2
    assert flat[1] == MwPulse("X", HALF_PI)
    assert flat[-2] == MwPulse("-X", HALF_PI)
    assert p.readout_axis == "X"
    assert p.duration == pytest.approx(64 * 0.4115)


def test_correlation_structure():
    p = build_correlation(0.4125, 10.0)
    assert p.n_pi == 64 and p.n_half_pi == 4
    delays = [e for e in p.flat() if isinstance(e, Delay) and e.dephase]
    assert len(delays) == 1 and delays[0].duration == 10.0
    assert p.duration == pytest.approx(64 * 0.4125 + 10.0)
    adjacent = build_correlation(0.4125, 0.0)
    # the storage interval is kept at zero length so P0 is continuous in t_corr
    stored = [e for e in adjacent.flat() if isinstance(e, Delay) and e.dephase]
    assert len(stored) == 1 and stored[0].duration == 0.0
    with pytest.raises(ParameterError):
        build_correlation(0.4, -1.0)


def test_pulsepol_unit_counts():
    unit = pulsepol_unit(2.4960 / 2)
    flat = list(flatten(unit.body))
    assert sum(isinstance(e, MwPulse) and e.angle == PI for e in flat) == 4
    assert sum(isinstance(e, MwPulse) and e.angle == HALF_PI for e in flat) == 8
    assert sum(isinstance(e, Delay) for e in flat) == 8
    assert unit.duration == pytest.approx(2.4960)


@given(st.floats(0.1, 10.0))
def test_polx_is_reversed_poly(tau_pol):
    y = pulsepol_unit(tau_pol, "PolY").body
    x = pulsepol_unit(tau_pol, "PolX").body
    assert x == tuple(reversed(y))
    assert tuple(reversed(tuple(reversed(y)))) == y


def test_pulsepol_programs():
    p = build_pulsepol(1.248, "PolY", 20)
    assert p.duration == pytest.approx(20 * 2.496)
    sp = build_pulsepol_spectrum_point(1.248)
    assert sp.n_readouts == 1
    tr = build_polarization_transient(1.248, 20, 20)
    assert tr.n_readouts == 20
    assert tr.count(LaserInit) == 20
    with pytest.raises(ParameterError):
        build_pulsepol(1.0, "PolZ")
    with pytest.raises(ParameterError):
        build_pulsepol(1.0, "PolY", 0)


def test_rabi_structure():
    p = build_rabi(10, 4.0, 1.2151, 57.7, 1.248)
    blocks = [e for e in p.elements if isinstance(e, Block)]
    assert sum(b.count for b in blocks) == 20
    assert p.count(RfPulse) == 1 and p.n_readouts == 10
    assert build_rabi(10, 0.0, 1.2151, 57.7, 1.248).count(RfPulse) == 0


def test_fid_structure():
    p = build_fid("PolY", 4.115, 50, 0.4115, 11.840, 1.2239, 57.7, 1.248)
    assert p.n_readouts == 50
    assert p.readout_axis == "Y"
    x2 = _detection_x2(p)
    assert len(x2) == 50
    assert all(b - a == pytest.approx(11.840, abs=1e-9) for a, b in zip(x2, x2[1:]))
    assert 1 / 11.840 == pytest.approx(0.08446, abs=1e-5)
    single = build_fid("PolX", 4.115, 1, 0.4115, 11.840, 1.2239, 57.7, 1.248)
    assert single.n_readouts == 1
    with pytest.raises(TimingError):
        build_fid("PolY", 4.115, 5, 0.4115, 6.0, 1.2239, 57.7, 1.248)


def _detection_x2(p):
    """Start times of the X/2 pulses that follow the rf pulse."""
    t, out, after_rf = 0.0, [], False
    for e in p.flat():
        after_rf |= isinstance(e, RfPulse)
        if after_rf and e == MwPulse("X", HALF_PI):
            out.append(t)
        t += e.duration
    return out


@given(st.floats(0.05, 1.0), st.floats(0.0, 5.0), st.integers(1, 8))
def test_fid_sampling_interval_exact(tau, extra, n):
    t_l = 16 * tau + extra
    p = build_fid("PolY", 1.0, n, tau, t_l, 1.0, 50.0, 1.0, polarize_reps=1, repeats=1)
    x2 = _detection_x2(p)
    assert len(x2) == n
    assert all(b - a == pytest.approx(t_l, rel=1e-12) for a, b in zip(x2, x2[1:]))


def test_element_validation():
    with pytest.raises(ParameterError):
        MwPulse("Z")
    with pytest.raises(ParameterError):
        MwPulse("X", 1.0)
    with pytest.raises(ParameterError):
        Delay(-1.0)
    with pytest.raises(ParameterError):
        RfPulse(1.0, 0.0, 1.0, 0.0)
    with pytest.raises(ParameterError):
        Block((Delay(1.0),), 0)
    with pytest.raises(ParameterError):
        PulseProgram((LaserRead(),))
    # a read re-initialises, so consecutive reads are fine
    PulseProgram((LaserInit(), LaserRead(), LaserRead()))


# -- text format -------------------------------------------------------------

def test_parse_readout_text_matches_builder():
    text = "L--X/2--(XY16-64 t=0.4115)---X/2--LRO"
    assert parse_sequence(text) == build_xy16_readout(64, 0.4115)
    assert format_sequence(build_xy16_readout(64, 0.4115)) == text


def test_parse_transient_text():
    text = "((PolX tau=1.248)^20--L)^20--((PolY tau=1.248)^20--LRO)^20"
    assert parse_sequence(text) == build_polarization_transient(1.248, 20, 20)
    assert format_sequence(parse_sequence(text)) == text


def test_parse_whitespace_and_comments():
    text = """# XY16 readout
    L -- X/2 --
      (XY16-16 t=0.4)   # sixteen pulses
    -- -X/2 -- LRO"""
    assert parse_sequence(text) == build_xy16_readout(16, 0.4)


def test_parse_delay_and_rf():
    p = parse_sequence("L--rf(T=4.0,f=1.2151,W=57.7,phi=0.5)--d(2.5,dephase)--Y/2--LRO")
    rf = p.elements[1]
    assert rf == RfPulse(1.2151, 0.5, 4.0, 57.7)
    assert p.elements[2] == Delay(2.5, True)


@pytest.mark.parametrize("text, token", [
    ("", ""),
    ("L--Z/2--LRO", "Z/2"),
    ("L--(X--Y--LRO", ""),
    ("L--(X--Y)^1.5--LRO", "1.5"),
    ("L--(X--Y)^0--LRO", "0"),
    ("L--X/2--(XY16-63 t=0.4)--X/2--LRO", "XY16-63"),
    ("L--d(-1)--LRO", "-1"),
    ("LRO--L", "LRO"),
    ("L--rf(f=1,phi=0,T=1)--LRO", "rf"),
])
def test_parse_errors(text, token):
    with pytest.raises(ParseError) as info:
        parse_sequence(text)
    assert info.value.token == token
    assert info.value.line >= 1 and info.value.column >= 1


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_sequence("L--X/2\n--Z/2--LRO")
    assert (info.value.line, info.value.column) == (2, 3)


builders = st.one_of(
    st.builds(build_xy16_readout, n16, taus),
    st.builds(build_xy16, n16, taus),
    st.builds(build_correlation, taus, st.floats(0.0, 100.0), n16),
    st.builds(build_pulsepol, st.floats(0.1, 5.0), st.sampled_from(["PolY", "PolX"]),
              st.integers(1, 30)),
    st.builds(build_polarization_transient, st.floats(0.1, 5.0), st.integers(1, 20),
              st.integers(1, 20)),
    st.builds(build_rabi, st.integers(1, 10), st.floats(0.0, 50.0), st.floats(0.1, 2.0),
              st.floats(1.0, 100.0), st.floats(0.1, 5.0)),
    st.builds(lambda tau, extra, n, pol: build_fid(pol, 4.0, n, tau, 16 * tau + extra, 1.2,
                                                   57.7, 1.248),
              taus, st.floats(0.0, 10.0), st.integers(1, 60), st.sampled_from(["PolY", "PolX"])),
)


@given(builders)
def test_round_trip(program):
    text = format_sequence(program)
    again = parse_sequence(text)
    assert again == program
    assert format_sequence(again) == text
    assert again.duration == pytest.approx(program.duration, rel=1e-12)


@given(builders)
def test_format_idempotent(program):
    once = format_sequence(parse_sequence(format_sequence(program)))
    assert format_sequence(parse_sequence(once)) == once
