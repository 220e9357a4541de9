"""Sensor array geometries, imaging grids, steering vectors and delay laws.

All arrays live in the Z=0 plane and are centered on the origin so the
quadrant logic of the product beamformer applies unchanged to every kind.
Angles are radians everywhere inside the package; degrees appear only at
external interfaces (CLI, files, reports).
"""

from dataclasses import dataclass, field
import enum
import math

import numpy as np

from .errors import (
    InvalidArgumentError,
    InvalidDirectionError,
    InvalidGeometryError,
    InvalidGridError,
    NumericDomainError,
)

DIRECTION_TOL = 1e-12


class ArrayKind(enum.Enum):
    URA = "URA"
    RECT_PERIMETER = "RECT_PERIMETER"
    ELSA = "ELSA"
    CLSA = "CLSA"
    CSA = "CSA"
    DCSA = "DCSA"


class QuadrantId(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    AXIS_H = "AXIS_H"
    AXIS_V = "AXIS_V"
    CENTER = "CENTER"


OPEN_QUADRANTS = (QuadrantId.I, QuadrantId.II, QuadrantId.III, QuadrantId.IV)


@dataclass(frozen=True)
class SensorElement:
    """One receive sensor at (x, y, 0).

    index_m / index_n are 1-based lattice coordinates along x / y.
    """

    index_m: int
    index_n: int
    x: float
    y: float


@dataclass(frozen=True)
class ArrayGeometry:
    kind: ArrayKind
    M: int
    N: int
    spacing: float
    elements: tuple
    aperture_D: float

    def __post_init__(self):
        keys = {(e.index_m, e.index_n) for e in self.elements}
        if len(keys) != len(self.elements):
            raise InvalidGeometryError("duplicate (m, n) element indices")
        pos = {(e.x, e.y) for e in self.elements}
        if len(pos) != len(self.elements):
            raise InvalidGeometryError("duplicate element positions")

    @property
    def num_elements(self):
        return len(self.elements)

    @property
    def edge_budget(self):
        """Element count with perimeter edges counted independently.

        Physical corners are shared, so RECT_PERIMETER stores 2M+2N-4
        distinct sensors; the independent-edge budget 2(M+N) is what a
        per-edge hardware count would quote. Identical to num_elements
        for every other kind.
        """
        if self.kind is ArrayKind.RECT_PERIMETER:
            return 2 * (self.M + self.N)
        return self.num_elements

    def positions(self):
        """(K, 2) float array of element x, y coordinates, element order."""
        return np.array([(e.x, e.y) for e in self.elements], dtype=np.float64)

    def xs(self):
        return np.array([e.x for e in self.elements], dtype=np.float64)

    def ys(self):
        return np.array([e.y for e in self.elements], dtype=np.float64)


@dataclass(frozen=True)
class ImagingGrid:
    """Polar reconstruction grid: discrete steering angles and focus ranges.

    azimuths/elevations are radians; the *_deg twins are the authoritative
    external representation (files store degrees and must round-trip
    bit-exactly, which a rad->deg conversion would not).
    """

    azimuths: np.ndarray
    elevations: np.ndarray
    ranges: np.ndarray
    Mb: int
    Nb: int
    azimuths_deg: np.ndarray = field(default=None)
    elevations_deg: np.ndarray = field(default=None)

    def __post_init__(self):
        az = np.asarray(self.azimuths, dtype=np.float64)
        el = np.asarray(self.elevations, dtype=np.float64)
        rg = np.asarray(self.ranges, dtype=np.float64)
        object.__setattr__(self, "azimuths", az)
        object.__setattr__(self, "elevations", el)
        object.__setattr__(self, "ranges", rg)
        if self.azimuths_deg is None:
            object.__setattr__(self, "azimuths_deg", np.degrees(az))
        else:
            object.__setattr__(
                self, "azimuths_deg", np.asarray(self.azimuths_deg, dtype=np.float64)
            )
        if self.elevations_deg is None:
            object.__setattr__(self, "elevations_deg", np.degrees(el))
        else:
            object.__setattr__(
                self, "elevations_deg", np.asarray(self.elevations_deg, dtype=np.float64)
            )
        if len(az) != self.Mb or len(el) != self.Nb:
            raise InvalidGridError("Mb/Nb do not match angle list lengths")
        if len(az) > 1 and not np.all(np.diff(az) > 0):
            raise InvalidGridError("azimuths must be strictly increasing")
        if len(el) > 1 and not np.all(np.diff(el) > 0):
            raise InvalidGridError("elevations must be strictly increasing")
        if len(rg) == 0 or np.any(rg <= 0):
            raise InvalidGridError("ranges must be positive and non-empty")
        if len(rg) > 1 and not np.all(np.diff(rg) > 0):
            raise InvalidGridError("ranges must be strictly increasing")
        sa2 = np.sin(az)[:, None] ** 2
        sb2 = np.sin(el)[None, :] ** 2
        if np.any(sa2 + sb2 > 1.0 + DIRECTION_TOL):
            raise InvalidGridError(
                "grid contains directions with sin^2(alpha)+sin^2(beta) > 1"
            )

    @property
    def num_ranges(self):
        return len(self.ranges)


def _lattice(count, spacing):
    # centered lattice, symmetric about 0 (half-integer positions for even count)
    return (np.arange(count) - (count - 1) / 2.0) * spacing


def _origin_lattice(count, spacing):
    # lattice that contains the origin; one-sided surplus for even count
    return (np.arange(count) - (count - 1) // 2) * spacing


def build_array(kind, M, N, spacing):
    """Construct one of the six supported receive geometries.

    The URA footprint spans [-(M-1)s/2, +(M-1)s/2] x [-(N-1)s/2, +(N-1)s/2].
    ELSA = top edge row + right edge column of that footprint (shared corner);
    CLSA = two half-arms with the corner element at the origin; CSA = full
    central cross (arms of M and N elements through the origin); DCSA = the
    same cross with arms of 2M and 2N elements; RECT_PERIMETER = all four
    edges with corners deduplicated.
    """
    kind = ArrayKind(kind)
    if not (isinstance(M, (int, np.integer)) and isinstance(N, (int, np.integer))):
        raise InvalidGeometryError("M and N must be integers")
    if M < 2 or N < 2:
        raise InvalidGeometryError(f"M and N must be >= 2, got {M}x{N}")
    if not spacing > 0:
        raise InvalidGeometryError(f"spacing must be positive, got {spacing}")

    xs = _lattice(M, spacing)
    ys = _lattice(N, spacing)
    elements = []

    def add(m, n, x, y):
        elements.append(SensorElement(int(m), int(n), float(x), float(y)))

    if kind is ArrayKind.URA:
        for n in range(1, N + 1):
            for m in range(1, M + 1):
                add(m, n, xs[m - 1], ys[n - 1])
    elif kind is ArrayKind.RECT_PERIMETER:
        for n in range(1, N + 1):
            for m in range(1, M + 1):
                if m in (1, M) or n in (1, N):
                    add(m, n, xs[m - 1], ys[n - 1])
    elif kind is ArrayKind.ELSA:
        for m in range(1, M + 1):  # top edge row, y = y_max
            add(m, N, xs[m - 1], ys[N - 1])
        for n in range(1, N):  # right edge column minus the shared corner
            add(M, n, xs[M - 1], ys[n - 1])
    elif kind is ArrayKind.CLSA:
        hx = np.arange(M) * spacing
        vy = np.arange(N) * spacing
        for m in range(1, M + 1):
            add(m, 1, hx[m - 1], 0.0)
        for n in range(2, N + 1):  # origin element already placed by the row
            add(1, n, 0.0, vy[n - 1])
    elif kind is ArrayKind.CSA:
        hx = _origin_lattice(M, spacing)
        vy = _origin_lattice(N, spacing)
        zero_n = int(np.argmin(np.abs(vy))) + 1
        for m in range(1, M + 1):
            add(m, zero_n, hx[m - 1], 0.0)
        zero_m = int(np.argmin(np.abs(hx))) + 1
        for n in range(1, N + 1):
            if n != zero_n:
                add(zero_m, n, 0.0, vy[n - 1])
    elif kind is ArrayKind.DCSA:
        hx = _origin_lattice(2 * M, spacing)
        vy = _origin_lattice(2 * N, spacing)
        zero_n = int(np.argmin(np.abs(vy))) + 1
        for m in range(1, 2 * M + 1):
            add(m, zero_n, hx[m - 1], 0.0)
        zero_m = int(np.argmin(np.abs(hx))) + 1
        for n in range(1, 2 * N + 1):
            if n != zero_n:
                add(zero_m, n, 0.0, vy[n - 1])
    else:  # pragma: no cover - enum is exhaustive
        raise InvalidGeometryError(f"unsupported kind {kind}")

    exs = np.array([e.x for e in elements])
    eys = np.array([e.y for e in elements])
    span = max(exs.max() - exs.min(), eys.max() - eys.min())
    geom = ArrayGeometry(
        kind=kind,
        M=int(M),
        N=int(N),
        spacing=float(spacing),
        elements=tuple(elements),
        aperture_D=float(span + spacing),
    )
    expected = {
        ArrayKind.URA: M * N,
        ArrayKind.RECT_PERIMETER: 2 * M + 2 * N - 4,
        ArrayKind.ELSA: M + N - 1,
        ArrayKind.CLSA: M + N - 1,
        ArrayKind.CSA: M + N - 1,
        ArrayKind.DCSA: 2 * M + 2 * N - 1,
    }[kind]
    if geom.num_elements != expected:
        raise InvalidGeometryError(
            f"{kind.value} built {geom.num_elements} elements, expected {expected}"
        )
    return geom


def validate_direction(alpha, beta):
    s2 = math.sin(alpha) ** 2 + math.sin(beta) ** 2
    if s2 > 1.0 + DIRECTION_TOL:
        raise InvalidDirectionError(
            f"sin^2(alpha)+sin^2(beta) = {s2:.6f} > 1 for alpha={alpha}, beta={beta}"
        )


def steering_unit_vector(alpha, beta):
    """Unit direction vector (sin a, sin b, sqrt(cos^2 a - sin^2 b)).

    Raises InvalidDirectionError outside the sin^2+sin^2 <= 1 domain.
    """
    validate_direction(alpha, beta)
    sa = math.sin(alpha)
    sb = math.sin(beta)
    z2 = math.cos(alpha) ** 2 - sb * sb
    return np.array([sa, sb, math.sqrt(max(z2, 0.0))])


def delay_nearfield(sensor, r0, alpha, beta, c):
    """Steering delay for a focus point at (r0, alpha, beta), exact form.

    Evaluated as (2 r0 (x sin a + y sin b) - x^2 - y^2) / (c (r0 + sqrt(radicand))),
    algebraically identical to (r0 - sqrt(radicand))/c but free of the
    cancellation that otherwise caps accuracy near the far-field limit.
    """
    if r0 <= 0 or c <= 0:
        raise InvalidArgumentError(f"r0 and c must be positive (r0={r0}, c={c})")
    validate_direction(alpha, beta)
    x, y = sensor.x, sensor.y
    proj2 = 2.0 * r0 * (x * math.sin(alpha) + y * math.sin(beta))
    s2 = x * x + y * y
    radicand = r0 * r0 + s2 - proj2
    if radicand < 0:
        raise NumericDomainError(
            f"negative radicand {radicand} in near-field delay (r0={r0}, x={x}, y={y})"
        )
    return (proj2 - s2) / (c * (r0 + math.sqrt(radicand)))


def delay_farfield(sensor, alpha, beta, c):
    """Plane-wave steering delay (x sin a + y sin b)/c; positive = earlier arrival."""
    validate_direction(alpha, beta)
    return (sensor.x * math.sin(alpha) + sensor.y * math.sin(beta)) / c


def farfield_delays(xs, ys, sin_alpha, sin_beta, c):
    """Vectorized far-field delays.

    xs, ys: (K,) element coordinates. sin_alpha, sin_beta: broadcastable
    direction sines. Returns delays shaped broadcast(sin_alpha) x K.
    """
    sa = np.asarray(sin_alpha, dtype=np.float64)[..., None]
    sb = np.asarray(sin_beta, dtype=np.float64)[..., None]
    return (xs[None, :] * sa + ys[None, :] * sb) / c


def nearfield_delays(xs, ys, r0, sin_alpha, sin_beta, c):
    """Vectorized exact delays for focus range r0 (same shape rules as farfield).

    Same cancellation-free form as delay_nearfield so the scalar and
    vectorized paths agree bit for bit.
    """
    sa = np.asarray(sin_alpha, dtype=np.float64)[..., None]
    sb = np.asarray(sin_beta, dtype=np.float64)[..., None]
    proj2 = 2.0 * r0 * (xs[None, :] * sa + ys[None, :] * sb)
    s2 = xs[None, :] ** 2 + ys[None, :] ** 2
    radicand = r0 * r0 + s2 - proj2
    if np.any(radicand < 0):
        raise NumericDomainError("negative radicand in near-field delay")
    return (proj2 - s2) / (c * (r0 + np.sqrt(radicand)))


def farfield_valid(r0, D, lam):
    """True iff r0 lies strictly beyond the D^2/(2 lambda) far-field bound."""
    if r0 <= 0 or D <= 0 or lam <= 0:
        raise InvalidArgumentError("r0, D and lambda must all be positive")
    return r0 > (D * D) / (2.0 * lam)


def build_imaging_grid(az_span_deg, el_span_deg, Mb, Nb, ranges):
    """Uniform grid symmetric about broadside, endpoints included.

    Spans are full widths in degrees; Mb=Nb=60 with 59 degree spans gives the
    1-degree-pitch slice used throughout (angles -29.5 .. +29.5).
    """
    if Mb < 1 or Nb < 1:
        raise InvalidGridError("Mb and Nb must be >= 1")
    if az_span_deg < 0 or el_span_deg < 0:
        raise InvalidGridError("spans must be non-negative")
    az_deg = np.linspace(-az_span_deg / 2.0, az_span_deg / 2.0, Mb)
    el_deg = np.linspace(-el_span_deg / 2.0, el_span_deg / 2.0, Nb)
    ranges = np.asarray(list(ranges), dtype=np.float64)
    return ImagingGrid(
        azimuths=np.radians(az_deg),
        elevations=np.radians(el_deg),
        ranges=ranges,
        Mb=int(Mb),
        Nb=int(Nb),
        azimuths_deg=az_deg,
        elevations_deg=el_deg,
    )


def quadrant_of(alpha, beta):
    """Quadrant of a steering direction; exact zeros map to axis/center ids."""
    validate_direction(alpha, beta)
    if alpha == 0.0 and beta == 0.0:
        return QuadrantId.CENTER
    if beta == 0.0:
        return QuadrantId.AXIS_H
    if alpha == 0.0:
        return QuadrantId.AXIS_V
    if alpha > 0 and beta > 0:
        return QuadrantId.I
    if alpha < 0 and beta > 0:
        return QuadrantId.II
    if alpha < 0 and beta < 0:
        return QuadrantId.III
    return QuadrantId.IV
