import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bswave.signal import (
    Packet,
    SignalError,
    ToneBurst,
    decompose,
    detect_arrivals,
    envelope,
    group_velocity,
    locate_crack,
    toneburst_eval,
)

TB = ToneBurst()
DT = 1e-7


def burst_series(t_end=1e-3, delays=(0.0,), scales=(1.0,)):
    t = np.arange(0.0, t_end, DT)
    return sum(s * toneburst_eval(TB, t - d) for d, s in zip(delays, scales))


class TestToneBurst:
    def test_values(self):
        assert toneburst_eval(TB, 0.0) == 0.0
        assert abs(toneburst_eval(TB, TB.duration)) < 1e-15
        assert toneburst_eval(TB, 2.5e-6) == pytest.approx(0.5 * (1 - np.cos(0.1 * np.pi)), abs=1e-15)
        assert toneburst_eval(TB, 2.5e-6) == pytest.approx(0.02447, abs=5e-6)

    def test_zero_outside_window(self):
        assert toneburst_eval(TB, -1e-6) == 0.0
        assert toneburst_eval(TB, 6e-5) == 0.0

    def test_decomposition(self):
        segs = decompose(TB)
        assert [s.omega / (2 * np.pi) for s in segs] == pytest.approx([100e3, 120e3, 80e3])
        assert [s.r1 for s in segs] == [0.5, -0.25, -0.25]
        assert all(s.r2 == 0.0 and s.t_on == 0.0 and s.t_off == pytest.approx(5e-5) for s in segs)

    @pytest.mark.parametrize("n_cycles, amp", [(5, 1.0), (10, 2.5), (3, 0.1)])
    def test_decomposition_identity(self, n_cycles, amp):
        tb = ToneBurst(n_cycles=n_cycles, amplitude=amp)
        t = np.linspace(0, tb.duration, 10_000)
        total = sum(s.r1 * np.sin(s.omega * t) for s in decompose(tb))
        assert np.abs(total - toneburst_eval(tb, t)).max() < 1e-13 * amp

    def test_ten_cycles(self):
        tb = ToneBurst(n_cycles=10)
        assert tb.omega_m / (2 * np.pi) == pytest.approx(10e3)
        assert tb.duration == pytest.approx(1e-4)

    @pytest.mark.parametrize("kw", [{"f_c": 0.0}, {"n_cycles": 0}, {"f_c": -1e3}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ToneBurst(**kw)


class TestDetection:
    def test_self_detection(self):
        packets = detect_arrivals(burst_series(2e-4), DT)
        assert len(packets) == 1
        assert 0.0 <= packets[0].t_arrival < TB.period

    def test_two_packets(self):
        packets = detect_arrivals(burst_series(delays=(0.0, 4e-4), scales=(1.0, 0.3)), DT)
        assert len(packets) == 2
        assert packets[0].t_arrival < packets[1].t_arrival
        # A single global threshold crosses the weaker packet later in its rise.
        assert 4e-4 <= packets[1].t_arrival - packets[0].t_arrival < 4e-4 + TB.period
        assert packets[1].peak / packets[0].peak == pytest.approx(0.3, rel=0.02)

    def test_zero_series(self):
        assert detect_arrivals(np.zeros(100), DT) == []

    @given(st.integers(1, 3000))
    @settings(max_examples=25, deadline=None)
    def test_shift_equivariance(self, k):
        base = burst_series(3e-4, delays=(5e-5,))
        shifted = np.concatenate([np.zeros(k), base])
        p0 = detect_arrivals(base, DT)[0].t_arrival
        p1 = detect_arrivals(shifted, DT)[0].t_arrival
        assert p1 - p0 == pytest.approx(k * DT, rel=1e-9, abs=1e-18)

    def test_scale_invariance(self):
        base = burst_series(3e-4, delays=(5e-5,))
        assert detect_arrivals(7.5 * base, DT)[0].t_arrival == pytest.approx(
            detect_arrivals(base, DT)[0].t_arrival, rel=1e-12
        )

    def test_envelope_of_sine(self):
        t = np.arange(0, 2e-4, DT)
        env = envelope(np.sin(2 * np.pi * 1e5 * t), DT, 1e-5)
        assert env[200:-200] == pytest.approx(1.0, abs=1e-3)


class TestVelocity:
    def test_known_shift(self):
        ref = detect_arrivals(burst_series(2e-4), DT)[0].t_arrival
        v = group_velocity(burst_series(5e-4, delays=(2e-4,)), 1.0, dt=DT, reference_time=ref)
        assert v == pytest.approx(5000.0, rel=1e-9)

    def test_requires_dt(self):
        with pytest.raises(SignalError):
            group_velocity(np.ones(10), 1.0)

    def test_no_packet(self):
        with pytest.raises(SignalError):
            group_velocity(np.zeros(10), 1.0, dt=DT)


class TestLocateCrack:
    L, C = 1.5, 5063.0

    def test_geometry_inversion(self):
        est = locate_crack([self.L / self.C, (self.L + 2 * 0.75) / self.C], self.L, self.C)
        assert est.x_c == pytest.approx(0.75, rel=1e-12)

    def test_from_packets(self):
        pk = [Packet(1e-4, 1.0, 1.1e-4, 1.5e-4), Packet(3e-4, 0.2, 3.1e-4, 3.5e-4)]
        assert locate_crack(pk, self.L, self.C).x_c == pytest.approx(0.5 * self.C * 2e-4)

    def test_swapped(self):
        with pytest.raises(SignalError):
            locate_crack([(self.L + 1.5) / self.C, self.L / self.C], self.L, self.C)

    def test_single_packet(self):
        with pytest.raises(SignalError, match="no reflection"):
            locate_crack([1e-4], self.L, self.C)

    def test_beyond_length(self):
        with pytest.raises(SignalError):
            locate_crack([1e-4, 1e-2], self.L, self.C)
