# Spatial-audio beacon: activation state machine plus the stereo
# rendering parameters handed to whatever actually plays sound.
#
# Rendering approximates ear-accurate filtering with a constant-power pan
# and a spherical-head interaural delay. With the folded head-relative
# azimuth a in [-90, +90]:
#
#   theta    = 45 + |a| / 2                    (degrees)
#   far gain = sin(theta), near gain = cos(theta), assigned by side
#   itd      = sign(a) * 0.00066 * sin(|a|)    (seconds, right ear leads
#                                               when positive)
#
# Azimuths behind the listener fold onto the same lateral pan with the
# `behind` flag set so a UI can apply a muffling filter; two channels
# alone cannot disambiguate front from back.

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .geo import AngleDelta

# Spherical head of radius ~9.5 cm: maximum interaural delay.
MAX_ITD_S = 0.00066

STEREO = "stereo"
MONO_PULSE = "mono-pulse"


class BeaconError(ValueError):
    pass


@dataclass(frozen=True)
class BeaconConfig:
    activate_deg: float = 25.0
    deactivate_deg: float = 25.0
    source_distance_m: float = 1.0
    loop_asset_id: str = "waterfall"
    mono_fallback: bool = False

    def __post_init__(self):
        if not 0 < self.deactivate_deg <= self.activate_deg:
            raise BeaconError(
                f"need 0 < deactivate ({self.deactivate_deg}) <= activate ({self.activate_deg})"
            )


@dataclass(frozen=True)
class RenderParams:
    gain_left: float
    gain_right: float
    itd_s: float
    cue_kind: str = STEREO
    behind: bool = False
    pulse_period_ms: Optional[float] = None
    pulse_pattern: Optional[str] = None


SILENT = RenderParams(gain_left=0.0, gain_right=0.0, itd_s=0.0)


@dataclass(frozen=True)
class BeaconState:
    active: bool = False
    azimuth_deg: AngleDelta = AngleDelta(0.0)
    render: RenderParams = SILENT


def fold_azimuth(azimuth_deg: float) -> tuple[float, bool]:
    """Fold a (-180, 180] azimuth onto the front hemisphere.

    Returns (lateral angle in [-90, 90], behind flag).
    """
    a = azimuth_deg
    if a > 90.0:
        return 180.0 - a, True
    if a < -90.0:
        return -180.0 - a, True
    return a, False


def render_azimuth(azimuth: AngleDelta, cfg: BeaconConfig = BeaconConfig()) -> RenderParams:
    """Stereo (or mono-fallback) rendering parameters for an active beacon.

    Gains are computed from the magnitude and assigned by side so mirror
    symmetry is exact: render(-a) swaps the gains and negates the delay.
    """
    folded, behind = fold_azimuth(azimuth.value)
    mag = abs(folded)

    if cfg.mono_fallback:
        pattern = "right" if azimuth.value >= 0 else "left"
        g = math.sqrt(0.5)
        return RenderParams(
            gain_left=g, gain_right=g, itd_s=0.0, cue_kind=MONO_PULSE, behind=behind,
            pulse_period_ms=200.0 + 8.0 * abs(azimuth.value),
            pulse_pattern=pattern,
        )

    theta = math.radians(45.0 + mag / 2.0)
    far = math.sin(theta)
    near = math.cos(theta)
    itd = MAX_ITD_S * math.sin(math.radians(mag))
    if folded >= 0.0:
        return RenderParams(gain_left=near, gain_right=far, itd_s=itd, behind=behind)
    return RenderParams(gain_left=far, gain_right=near, itd_s=-itd, behind=behind)


def step_beacon(state: BeaconState, delta: AngleDelta, cfg: BeaconConfig = BeaconConfig()) -> BeaconState:
    """Advance the beacon one observation of the facing error.

    Inactive becomes active when |delta| exceeds activate_deg; active
    becomes inactive when |delta| falls to deactivate_deg or below. The
    azimuth mirrors the latest delta either way, and the rendering is
    recomputed, zeroed while inactive.
    """
    mag = abs(delta.value)
    if state.active:
        active = mag > cfg.deactivate_deg
    else:
        active = mag > cfg.activate_deg
    render = render_azimuth(delta, cfg) if active else SILENT
    return BeaconState(active=active, azimuth_deg=delta, render=render)
