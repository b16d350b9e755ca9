# Geodesic and angular primitives shared by every other module.
# Pure functions on a spherical earth; no project-internal imports.

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

# Equirectangular local patches are only valid over short ranges.
LOCAL_PATCH_LIMIT_M = 10_000.0

_DEGENERATE_EPS_DEG = 1e-9


class GeoError(ValueError):
    """Base class for geodesic domain errors."""


class DegenerateBearing(GeoError):
    """Bearing requested between coincident points."""


class OutOfPatch(GeoError):
    """Point lies outside the valid local-projection patch."""


@dataclass(frozen=True)
class GeoPoint:
    """A WGS-style latitude/longitude pair in decimal degrees."""

    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.lat_deg) and math.isfinite(self.lon_deg)):
            raise GeoError(f"non-finite coordinate ({self.lat_deg}, {self.lon_deg})")
        if not -90.0 <= self.lat_deg <= 90.0:
            raise GeoError(f"latitude {self.lat_deg} outside [-90, 90]")
        if not -180.0 < self.lon_deg <= 180.0:
            raise GeoError(f"longitude {self.lon_deg} outside (-180, 180]")


def normalize_heading(value_deg: float) -> float:
    """Normalize an angle in degrees to [0, 360)."""
    v = math.fmod(value_deg, 360.0)
    if v < 0.0:
        v += 360.0
    return 0.0 if v == 360.0 else v


@dataclass(frozen=True)
class HeadingDeg:
    """Compass heading, degrees clockwise from true north, stored in [0, 360)."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", normalize_heading(self.value))


@dataclass(frozen=True)
class AngleDelta:
    """Signed rotation in degrees, (-180, 180]; positive means the target is to the right."""

    value: float

    def __post_init__(self):
        if not -180.0 < self.value <= 180.0:
            raise GeoError(f"delta {self.value} outside (-180, 180]")


def distance_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points, in meters.

    Haversine on a sphere of radius 6,371,000 m. Total function: returns 0
    for coincident points, symmetric in its arguments.
    """
    lat1, lon1 = math.radians(a.lat_deg), math.radians(a.lon_deg)
    lat2, lon2 = math.radians(b.lat_deg), math.radians(b.lon_deg)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return EARTH_RADIUS_M * 2.0 * math.asin(min(1.0, math.sqrt(h)))


def bearing_deg(origin: GeoPoint, target: GeoPoint) -> HeadingDeg:
    """Initial great-circle bearing from origin to target, clockwise from north.

    Raises:
        DegenerateBearing: when the two points coincide within 1e-9 degrees.
    """
    if (
        abs(origin.lat_deg - target.lat_deg) < _DEGENERATE_EPS_DEG
        and abs(origin.lon_deg - target.lon_deg) < _DEGENERATE_EPS_DEG
    ):
        raise DegenerateBearing(f"bearing undefined from {origin} to itself")
    lat1, lat2 = math.radians(origin.lat_deg), math.radians(target.lat_deg)
    dlon = math.radians(target.lon_deg - origin.lon_deg)
    y = math.sin(dlon) * math.cos(lat2)
    x = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return HeadingDeg(math.degrees(math.atan2(y, x)))


def signed_delta(heading: HeadingDeg | float, target_bearing: HeadingDeg | float) -> AngleDelta:
    """Minimal signed rotation from heading to target bearing.

    Positive means turn right. The 180-degree ambiguity is broken toward
    +180 so downstream consumers are deterministic.
    """
    h = heading.value if isinstance(heading, HeadingDeg) else normalize_heading(heading)
    t = target_bearing.value if isinstance(target_bearing, HeadingDeg) else normalize_heading(target_bearing)
    d = math.fmod(t - h, 360.0)
    if d < 0.0:
        d += 360.0
    if d > 180.0:
        d -= 360.0
    return AngleDelta(d)


def project_local(origin: GeoPoint, p: GeoPoint) -> tuple[float, float]:
    """Project p into a flat (east_m, north_m) frame centered on origin.

    Equirectangular: exactly invertible by unproject_local, adequate for
    patches under 10 km.

    Raises:
        OutOfPatch: when p is farther than 10 km from origin.
    """
    if distance_m(origin, p) >= LOCAL_PATCH_LIMIT_M:
        raise OutOfPatch(f"{p} farther than {LOCAL_PATCH_LIMIT_M} m from {origin}")
    east = math.radians(p.lon_deg - origin.lon_deg) * math.cos(math.radians(origin.lat_deg)) * EARTH_RADIUS_M
    north = math.radians(p.lat_deg - origin.lat_deg) * EARTH_RADIUS_M
    return east, north


def unproject_local(origin: GeoPoint, east_m: float, north_m: float) -> GeoPoint:
    """Inverse of project_local."""
    if math.hypot(east_m, north_m) >= LOCAL_PATCH_LIMIT_M:
        raise OutOfPatch(f"({east_m}, {north_m}) farther than {LOCAL_PATCH_LIMIT_M} m from origin")
    lat = origin.lat_deg + math.degrees(north_m / EARTH_RADIUS_M)
    lon = origin.lon_deg + math.degrees(east_m / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat_deg))))
    return GeoPoint(lat, lon)
