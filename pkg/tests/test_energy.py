import numpy as np
from scipy.integrate import trapezoid
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwarfbench.energy import (
    EnergyReading,
    PowerProfile,
    RaplProvider,
    VirtualClock,
    energy_delta,
    load_power_profile,
    make_mock_provider,
    region_energy,
    select_provider,
)
from dwarfbench.errors import ConfigError, CounterWrap, NegativePower, NotAvailable


def _trapezoid(profile, t0_ns, t1_ns, steps=100_000):
    ts = np.linspace(t0_ns, t1_ns, steps + 1)
    watts = np.array([profile.power(int(round(t))) for t in ts])
    return float(trapezoid(watts, ts)) / 1000.0


def test_constant_10w_one_second():
    clock = VirtualClock()
    p = make_mock_provider(10.0, clock=clock)
    _, uj = region_energy(p, clock.sleep, 1.0)
    assert uj == 10_000_000


def test_absent_provider():
    result, uj = region_energy(None, lambda: 5)
    assert (result, uj) == (5, None)


class _Unavailable:
    name = "gone"
    resolution_uj = 1.0

    def read(self):
        raise NotAvailable("no counter")


def test_unavailable_provider_still_runs_work():
    assert region_energy(_Unavailable(), lambda: 3) == (3, None)


def test_linear_ramp_vs_trapezoid():
    clock = VirtualClock()
    prof = PowerProfile([(0.0, 0.0), (1.0, 10.0)])
    p = make_mock_provider(prof, clock=clock)
    _, uj = region_energy(p, clock.sleep, 1.0)
    oracle = _trapezoid(prof, 0, 1_000_000_000)
    assert uj == pytest.approx(5_000_000, rel=0.01)
    assert uj == pytest.approx(oracle, rel=0.01)


def test_zero_power():
    clock = VirtualClock()
    p = make_mock_provider(0.0, clock=clock)
    for _ in range(5):
        clock.advance(12345)
        assert p.read().cumulative_uj == 0


def test_negative_power():
    with pytest.raises(NegativePower):
        make_mock_provider([(0, 5), (1, -1)])
    with pytest.raises(NegativePower):
        make_mock_provider(-2.0)


def test_two_segment_boundary_closed_form():
    clock = VirtualClock()
    p = make_mock_provider([(0, 4.0), (2, 8.0), (3, 2.0)], clock=clock)
    clock.advance(2_000_000_000)
    # (4 + 8) / 2 W * 2 s = 12 J
    assert p.read().cumulative_uj == 12_000_000
    clock.advance(1_000_000_000)
    # + (8 + 2) / 2 W * 1 s = 5 J
    assert p.read().cumulative_uj == 17_000_000
    clock.advance(500_000_000)
    assert p.read().cumulative_uj == 18_000_000


def test_counter_wrap():
    with pytest.raises(CounterWrap):
        energy_delta(EnergyReading(0, 10.0), EnergyReading(1, 5.0))


knots = st.lists(
    st.tuples(st.integers(1, 2_000_000), st.floats(0, 300, allow_nan=False)),
    min_size=1, max_size=6)


@given(knots, st.integers(0, 5_000_000_000), st.integers(0, 3_000_000_000))
@settings(max_examples=150, deadline=None)
def test_mock_matches_analytic_integral(segs, start, length):
    t, pts = 0, []
    for dt_us, w in segs:
        pts.append((t / 1e6, w))
        t += dt_us
    prof = PowerProfile(pts)
    clock = VirtualClock()
    p = make_mock_provider(prof, clock=clock)
    clock.advance(start)
    _, uj = region_energy(p, clock.advance, length)
    exact = _piecewise_integral(pts, start, start + length)
    assert abs(uj - exact) <= 1.0 + 1e-9 * exact


def _piecewise_integral(pts, a_ns, b_ns):
    """Independent integral: sum exact trapezoids over breakpoints inside [a, b]."""
    times = [round(t * 1e9) for t, _ in pts]
    watts = [w for _, w in pts]

    def power(t):
        if t <= times[0]:
            return watts[0]
        if t >= times[-1]:
            return watts[-1]
        for i in range(len(times) - 1):
            if times[i] <= t <= times[i + 1]:
                return watts[i] + (t - times[i]) / (times[i + 1] - times[i]) * (watts[i + 1] - watts[i])

    cuts = sorted({a_ns, b_ns, *[x for x in times if a_ns < x < b_ns]})
    return sum((power(x) + power(y)) * (y - x) / 2000.0 for x, y in zip(cuts, cuts[1:]))


def test_monotone_readings():
    clock = VirtualClock()
    p = make_mock_provider([(0, 1.0), (1, 50.0), (2, 0.0)], clock=clock)
    prev = p.read()
    for _ in range(100):
        clock.advance(37_000_000)
        r = p.read()
        assert r.cumulative_uj >= prev.cumulative_uj and r.timestamp_ns >= prev.timestamp_ns
        prev = r


def test_profile_file(tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("# t watts\n0 0\n1 10\n")
    prof = load_power_profile(f)
    assert prof.energy_uj(1_000_000_000) == 5_000_000
    f.write_text("0 1\n1 -3\n")
    with pytest.raises(NegativePower):
        load_power_profile(f)
    f.write_text("0 1 2\n")
    with pytest.raises(ConfigError):
        load_power_profile(f)


def test_rapl_unwraps(tmp_path):
    (tmp_path / "max_energy_range_uj").write_text("1000\n")
    counter = tmp_path / "energy_uj"
    counter.write_text("900\n")
    p = RaplProvider(tmp_path)
    a = p.read()
    counter.write_text("100\n")
    b = p.read()
    assert b.cumulative_uj - a.cumulative_uj == 201


def test_rapl_missing_is_not_available(tmp_path):
    with pytest.raises(NotAvailable):
        RaplProvider(tmp_path / "nope").read()


def test_select_provider():
    assert select_provider("off") is None
    assert select_provider("mock").name == "mock"
    assert select_provider("mock:25").profile.watts == [25.0]
    with pytest.raises(ConfigError):
        select_provider("nvml")
