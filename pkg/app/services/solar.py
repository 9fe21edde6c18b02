"""
Solar Reconstruction - sun position, beam projection and sky diffuse models

Two interchangeable diffuse models reconstruct the radiation on a tilted plane
from horizontal measurements:
- isotropic: d = dh * (1 + cos s) / 2
- willmott: isotropic part weighted by the anisotropy index F plus a
  circumsolar part, d = (F*C(s)*(1 + cos s)/2 + (1 - F)*max(cos i, 0)/sin h) * dh

Angles are radians. Azimuths are measured clockwise from north (east = pi/2),
for the sun and for surface normals alike.
"""
import enum
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Optional, Union

from app.core.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

SOLAR_CONSTANT = 1367.0  # W/m2
MAX_EXTRATERRESTRIAL = SOLAR_CONSTANT * 1.034
BEAM_CLAMP = 1.05 * SOLAR_CONSTANT
MIN_SOLAR_ALTITUDE = math.radians(5.0)
MIN_GLOBAL_FOR_ANISOTROPY = 1.0  # W/m2
STEFAN_BOLTZMANN = 5.670374419e-8
KELVIN = 273.15


class DiffuseModel(str, enum.Enum):
    """Sky diffuse reconstruction on tilted planes"""
    ISOTROPIC = "isotropic"
    WILLMOTT = "willmott"


class SkyTemperatureModel(str, enum.Enum):
    """Effective sky temperature for exterior longwave exchange"""
    OFFSET = "offset"
    SWINBANK = "swinbank"


@dataclass(frozen=True)
class SunPosition:
    altitude: float
    azimuth: float
    declination: float
    extraterrestrial_horizontal: float


@dataclass(frozen=True)
class SurfaceOrientation:
    """tilt 0 faces up, pi/2 is vertical, pi faces down"""
    tilt: float
    azimuth: float

    def flipped(self) -> "SurfaceOrientation":
        """Orientation of the opposite face of the same plane"""
        return SurfaceOrientation(
            tilt=math.pi - self.tilt,
            azimuth=(self.azimuth + math.pi) % (2.0 * math.pi),
        )


@dataclass(frozen=True)
class IrradianceSample:
    global_horizontal: float
    diffuse_horizontal: float

    @property
    def beam_horizontal(self) -> float:
        return max(self.global_horizontal - self.diffuse_horizontal, 0.0)


@dataclass(frozen=True)
class TiltedIrradiance:
    beam: float = 0.0
    sky_diffuse: float = 0.0
    ground_reflected: float = 0.0
    anisotropy_index: float = 1.0
    circumsolar_shape: float = 1.0

    @property
    def diffuse(self) -> float:
        """Total diffuse: sky plus ground reflection"""
        return self.sky_diffuse + self.ground_reflected

    @property
    def total(self) -> float:
        return self.beam + self.sky_diffuse + self.ground_reflected


# ============================================================================
# Sun position
# ============================================================================

def declination(day_of_year: int) -> float:
    return math.radians(23.45) * math.sin(2.0 * math.pi * (284 + day_of_year) / 365.0)


def equation_of_time(day_of_year: int) -> float:
    """Equation of time in minutes"""
    b = 2.0 * math.pi * (day_of_year - 1) / 365.0
    return 229.18 * (
        0.000075
        + 0.001868 * math.cos(b)
        - 0.032077 * math.sin(b)
        - 0.014615 * math.cos(2.0 * b)
        - 0.04089 * math.sin(2.0 * b)
    )


def eccentricity_factor(day_of_year: int) -> float:
    return 1.0 + 0.033 * math.cos(2.0 * math.pi * day_of_year / 365.0)


def solar_position(
    timestamp: datetime,
    latitude: float,
    longitude: float,
    utc_offset_hours: Optional[float] = None,
) -> SunPosition:
    """
    Sun position for a civil timestamp

    The UTC offset comes from the timestamp when it is timezone-aware,
    otherwise from `utc_offset_hours` (default 0, i.e. UTC).
    """
    if timestamp.tzinfo is not None and timestamp.utcoffset() is not None:
        offset = timestamp.utcoffset().total_seconds() / 3600.0
    else:
        offset = utc_offset_hours or 0.0

    day = timestamp.timetuple().tm_yday
    local_hours = timestamp.hour + timestamp.minute / 60.0 + timestamp.second / 3600.0
    solar_time = (
        local_hours - offset + math.degrees(longitude) / 15.0 + equation_of_time(day) / 60.0
    )
    hour_angle = math.radians(15.0 * (solar_time - 12.0))
    delta = declination(day)

    sin_h = (
        math.sin(latitude) * math.sin(delta)
        + math.cos(latitude) * math.cos(delta) * math.cos(hour_angle)
    )
    sin_h = min(max(sin_h, -1.0), 1.0)
    altitude = math.asin(sin_h)

    # Sun direction in east/north components
    east = -math.cos(delta) * math.sin(hour_angle)
    north = (
        math.sin(delta) * math.cos(latitude)
        - math.cos(delta) * math.sin(latitude) * math.cos(hour_angle)
    )
    azimuth = math.atan2(east, north) % (2.0 * math.pi)

    extraterrestrial = SOLAR_CONSTANT * eccentricity_factor(day) * max(sin_h, 0.0)
    return SunPosition(
        altitude=altitude,
        azimuth=azimuth,
        declination=delta,
        extraterrestrial_horizontal=extraterrestrial,
    )


def solar_noon(day: datetime, longitude: float, utc_offset_hours: float = 0.0) -> datetime:
    """Civil time of solar noon on the date of `day` (naive, in the given offset)"""
    day_of_year = day.timetuple().tm_yday
    hours = 12.0 - math.degrees(longitude) / 15.0 - equation_of_time(day_of_year) / 60.0
    hours += utc_offset_hours
    midnight = datetime(day.year, day.month, day.day)
    return midnight + timedelta(hours=hours)


# ============================================================================
# Projection on tilted planes
# ============================================================================

def incidence_cosine(sun: SunPosition, surf: SurfaceOrientation) -> float:
    cos_i = (
        math.cos(surf.tilt) * math.sin(sun.altitude)
        + math.sin(surf.tilt) * math.cos(sun.altitude) * math.cos(sun.azimuth - surf.azimuth)
    )
    return min(max(cos_i, -1.0), 1.0)


def beam_on_tilted(sample: IrradianceSample, sun: SunPosition, surf: SurfaceOrientation) -> float:
    if sun.altitude <= MIN_SOLAR_ALTITUDE:
        return 0.0
    cos_i = incidence_cosine(sun, surf)
    if cos_i <= 0.0:
        return 0.0
    beam = sample.beam_horizontal * cos_i / math.sin(sun.altitude)
    return min(max(beam, 0.0), BEAM_CLAMP)


def diffuse_isotropic(sample: IrradianceSample, surf: SurfaceOrientation) -> float:
    return sample.diffuse_horizontal * (1.0 + math.cos(surf.tilt)) / 2.0


def circumsolar_shape(tilt: float) -> float:
    """C(s), tilt in radians"""
    return 1.00115 - 3.54e-2 * tilt - 2.46e-6 * tilt ** 2


def anisotropy_index(sample: IrradianceSample, sun: SunPosition) -> float:
    gh = sample.global_horizontal
    clearness = min(gh / sun.extraterrestrial_horizontal, 1.0)
    f = 1.0 - clearness * (1.0 - sample.diffuse_horizontal / gh)
    return min(max(f, 0.0), 1.0)


def diffuse_willmott(
    sample: IrradianceSample, sun: SunPosition, surf: SurfaceOrientation
) -> TiltedIrradiance:
    """
    Anisotropic sky diffuse

    Below 5 degrees of solar altitude, or when the horizontal global is below
    1 W/m2, the circumsolar term is undefined and the isotropic value is
    returned (reported with F = 1, C(s) = 1).
    """
    if (
        sun.altitude < MIN_SOLAR_ALTITUDE
        or sample.global_horizontal <= MIN_GLOBAL_FOR_ANISOTROPY
        or sun.extraterrestrial_horizontal <= 0.0
    ):
        return TiltedIrradiance(sky_diffuse=diffuse_isotropic(sample, surf))

    f = anisotropy_index(sample, sun)
    c_s = circumsolar_shape(surf.tilt)
    isotropic_part = f * c_s * (1.0 + math.cos(surf.tilt)) / 2.0
    circumsolar_part = (1.0 - f) * max(incidence_cosine(sun, surf), 0.0) / math.sin(sun.altitude)
    d = (isotropic_part + circumsolar_part) * sample.diffuse_horizontal
    return TiltedIrradiance(
        sky_diffuse=max(d, 0.0),
        anisotropy_index=f,
        circumsolar_shape=c_s,
    )


def ground_reflected(sample: IrradianceSample, albedo: float, surf: SurfaceOrientation) -> float:
    return max(albedo * sample.global_horizontal * (1.0 - math.cos(surf.tilt)) / 2.0, 0.0)


def tilted_irradiance(
    sample: IrradianceSample,
    sun: SunPosition,
    surf: SurfaceOrientation,
    model: Union[DiffuseModel, str],
    albedo: float,
) -> TiltedIrradiance:
    """Beam, sky diffuse (selected model) and ground reflection on one plane"""
    model = _coerce(DiffuseModel, model, "diffuse model")
    if model is DiffuseModel.WILLMOTT:
        diffuse = diffuse_willmott(sample, sun, surf)
    else:
        diffuse = TiltedIrradiance(sky_diffuse=diffuse_isotropic(sample, surf))
    return TiltedIrradiance(
        beam=beam_on_tilted(sample, sun, surf),
        sky_diffuse=diffuse.sky_diffuse,
        ground_reflected=ground_reflected(sample, albedo, surf),
        anisotropy_index=diffuse.anisotropy_index,
        circumsolar_shape=diffuse.circumsolar_shape,
    )


# ============================================================================
# Sky temperature
# ============================================================================

def sky_temperature(dry_bulb: float, model: Union[SkyTemperatureModel, str]) -> float:
    """Effective sky temperature in K for an air temperature in degC"""
    model = _coerce(SkyTemperatureModel, model, "sky temperature model")
    air_kelvin = dry_bulb + KELVIN
    if model is SkyTemperatureModel.SWINBANK:
        return 0.0552 * air_kelvin ** 1.5
    return air_kelvin - 6.0


def linear_radiation_coefficient(emissivity: float, reference_kelvin: float = 293.0) -> float:
    """h_r = 4 * eps * sigma * T_ref^3, W/m2K"""
    return 4.0 * emissivity * STEFAN_BOLTZMANN * reference_kelvin ** 3


def sky_view_factor(surf: SurfaceOrientation) -> float:
    return (1.0 + math.cos(surf.tilt)) / 2.0


def _coerce(enum_type, value, label: str):
    if isinstance(value, enum_type):
        return value
    try:
        return enum_type(value)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_type)
        raise ConfigurationError(f"Unknown {label} '{value}' (expected one of: {allowed})")
