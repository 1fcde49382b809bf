"""Energy attribution with the mock provider on a virtual clock.

The same provider interface fronts RAPL counters on Linux; select it with
``select_provider("rapl")`` when /sys/class/powercap is readable.
"""

from dwarfbench.energy import PowerProfile, VirtualClock, make_mock_provider, region_energy

clock = VirtualClock()
# idle at 5 W, ramp to 45 W over 200 ms, hold, then drop back
profile = PowerProfile([(0.0, 5.0), (0.2, 45.0), (0.8, 45.0), (1.0, 5.0)])
meter = make_mock_provider(profile, clock=clock)

for label, seconds in [("warm-up", 0.2), ("steady", 0.6), ("cool-down", 0.2)]:
    _, uj = region_energy(meter, clock.sleep, seconds)
    print(f"{label:10} {seconds:.1f} s  {uj / 1e6:.3f} J  avg {uj / seconds / 1e6:.1f} W")

print("total:", profile.energy_uj(1_000_000_000) / 1e6, "J")
