#!/usr/bin/env python3
"""Beacon stereo rendering across the azimuth range.

Sweeps the head-relative azimuth and prints the constant-power pan,
interaural delay, and the behind flag, plus a short activation trace
showing the 25-degree hysteresis: the cue stays quiet while the walker
faces the waypoint and speaks up only when they drift past the
threshold.
"""

from navkit.beacon import BeaconConfig, BeaconState, render_azimuth, step_beacon
from navkit.geo import AngleDelta

print(f"{'azimuth':>8} {'gain L':>8} {'gain R':>8} {'itd (ms)':>9} behind")
for az in (-179, -135, -90, -60, -30, -10, 0, 10, 30, 60, 90, 135, 180):
    r = render_azimuth(AngleDelta(float(az)))
    print(f"{az:>8} {r.gain_left:>8.4f} {r.gain_right:>8.4f} "
          f"{r.itd_s * 1000:>9.3f} {r.behind}")

print("\nactivation trace (facing error over time):")
state = BeaconState()
for delta in (5, 15, 24, 26, 40, 90, 45, 26, 25, 10, 0):
    state = step_beacon(state, AngleDelta(float(delta)))
    marker = "AUDIBLE" if state.active else "quiet"
    print(f"  facing error {delta:>3} deg -> {marker}")

print("\nmono fallback (auditory-icon degradation):")
cfg = BeaconConfig(mono_fallback=True)
for az in (-60, -20, 20, 60, 120):
    # the state machine still gates activation; rendering shows the pulse contract
    r = render_azimuth(AngleDelta(float(az)), cfg)
    print(f"  azimuth {az:>4} deg -> pulse every {r.pulse_period_ms:>5.0f} ms, "
          f"pattern {r.pulse_pattern}")
