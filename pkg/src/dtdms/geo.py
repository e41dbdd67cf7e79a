"""Geodesic helpers. Coordinates are WGS84 degrees, distances spherical."""

from __future__ import annotations

import math

EARTH_RADIUS_KM = 6371.0

LatLon = tuple[float, float]


def haversine_km(a: LatLon, b: LatLon) -> float:
    """Great-circle distance in kilometres between two (lat, lon) points."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    # guard against rounding pushing the argument past 1.0
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def midpoint(a: LatLon, b: LatLon) -> LatLon:
    # arithmetic midpoint; adequate at city scale
    return ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
