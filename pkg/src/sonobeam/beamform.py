"""Time-domain DAS, quadrant-based orthogonal-L product beamforming, and a
frequency-domain direct-method baseline.

All beamformers share one delay convention: B(t) = sum_i w_i S_i(t - tau_i),
fractional delays realized by two-tap linear interpolation (time domain) or
exact phase ramps (frequency domain). Out-of-record lookups contribute zero.
Voxel extraction is max |B| over a +/- gate window centered at the round-trip
time of the voxel's range.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

from .errors import (
    InvalidArgumentError,
    InvalidGeometryError,
    OutOfRecordError,
)
from .geometry import (
    ArrayKind,
    QuadrantId,
    farfield_delays,
    nearfield_delays,
    quadrant_of,
)


class Method(enum.Enum):
    DAS_URA = "DAS_URA"
    PRODUCT_ELSA = "PRODUCT_ELSA"
    DAS_LINE_H = "DAS_LINE_H"
    DAS_LINE_V = "DAS_LINE_V"
    DM = "DM"


class FocusMode(enum.Enum):
    NEARFIELD = "NEARFIELD"
    FARFIELD = "FARFIELD"


@dataclass(frozen=True)
class Weights:
    """Per-sensor shading coefficients aligned with a geometry's element order."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )

    @classmethod
    def ones(cls, geom):
        return cls(np.ones(geom.num_elements))


@dataclass(frozen=True)
class BeamSignal:
    series: np.ndarray
    fs: float
    t0: float

    @property
    def num_samples(self):
        return len(self.series)


@dataclass(frozen=True)
class BeamVolume:
    """Voxel intensities indexed (range, azimuth p, elevation q)."""

    grid: object
    method: Method
    voxels: np.ndarray
    focus_mode: FocusMode

    def __post_init__(self):
        expected = (self.grid.num_ranges, self.grid.Mb, self.grid.Nb)
        if tuple(self.voxels.shape) != expected:
            raise InvalidArgumentError(
                f"voxel array {self.voxels.shape} does not match grid {expected}"
            )
        if np.any(self.voxels < 0):
            raise InvalidArgumentError("voxel intensities must be >= 0")


def _check_weights(w, count, geom=None):
    if w is None:
        return np.ones(count)
    vals = w.values
    if len(vals) != count:
        raise InvalidArgumentError(
            f"{len(vals)} weights for {count} elements"
        )
    return vals


def _delays(xs, ys, sa, sb, r0, c, focus):
    if focus is FocusMode.NEARFIELD:
        return nearfield_delays(xs, ys, r0, sa, sb, c)
    return farfield_delays(xs, ys, sa, sb, c)


def das_beam(cd, elements, w, r0, alpha, beta, focus_mode=FocusMode.FARFIELD):
    """Delay-and-sum one beam over an arbitrary element subset.

    Returns the full-length beam time series B(t) = sum w_i S_i(t - tau_i);
    no 1/(M N) normalization is applied here.
    """
    elements = list(elements)
    if not elements:
        raise InvalidArgumentError("empty element subset")
    index_of = {e: i for i, e in enumerate(cd.geometry.elements)}
    try:
        rows = np.array([index_of[e] for e in elements], dtype=np.intp)
    except KeyError as exc:
        raise InvalidArgumentError(
            f"element {exc.args[0]} is not part of the channel data geometry"
        ) from None
    weights = _check_weights(w, len(rows))

    xs = np.array([e.x for e in elements])
    ys = np.array([e.y for e in elements])
    sa, sb = math.sin(alpha), math.sin(beta)
    tau = _delays(xs, ys, np.array([sa]), np.array([sb]), r0, cd.c, focus_mode)[0]

    data = cd.data
    T = cd.num_samples
    shift = tau * cd.fs
    out = np.zeros(T, dtype=np.float64)
    base = np.arange(T, dtype=np.float64)
    for row, s, wi in zip(rows, shift, weights):
        idx = base - s
        lo = np.floor(idx).astype(np.int64)
        frac = idx - lo
        valid = (lo >= 0) & (lo <= T - 2)
        lo_c = np.clip(lo, 0, T - 2)
        ch = data[row].astype(np.float64)
        vals = ch[lo_c] * (1.0 - frac) + ch[lo_c + 1] * frac
        out += wi * np.where(valid, vals, 0.0)
    return BeamSignal(series=out, fs=cd.fs, t0=cd.t0)


def sample_at_range(bs, r0, c, gate):
    """max |B(t)| over +/- gate samples centered at the round-trip time 2 r0/c.

    gate is the half-width in samples; 0 degenerates to the nearest sample.
    The conventional default for scan volumes is signal.mainlobe_gate(pulse).
    """
    if gate < 0:
        raise InvalidArgumentError("gate must be >= 0")
    T = bs.num_samples
    t_r = 2.0 * r0 / c
    if not (bs.t0 <= t_r <= bs.t0 + T / bs.fs):
        raise OutOfRecordError(
            f"round-trip time {t_r} s outside record [{bs.t0}, {bs.t0 + T / bs.fs}] s"
        )
    kc = int(round((t_r - bs.t0) * bs.fs))
    if kc < 0 or kc > T - 1:
        raise OutOfRecordError("round-trip sample outside record")
    lo = max(0, kc - gate)
    hi = min(T - 1, kc + gate)
    return float(np.max(np.abs(bs.series[lo:hi + 1])))


def _windowed_beams(data, fs, xs, ys, sa, sb, r0, c, focus, kc, offsets, weights):
    """Beam values at integer sample indices kc + offsets for many directions.

    data: (K, T) float channel matrix (already conditioned); sa/sb: (D,)
    direction sines; returns (D, W) float64. Equivalent to evaluating
    das_beam at those samples: linear interpolation, zeros outside record.
    """
    T = data.shape[1]
    K = len(xs)
    W = len(offsets)
    D = len(sa)
    out = np.empty((D, W), dtype=np.float64)
    chunk = max(1, 4_000_000 // max(K * W, 1))
    for s in range(0, D, chunk):
        e = min(s + chunk, D)
        tau = _delays(xs, ys, sa[s:e], sb[s:e], r0, c, focus)  # (d, K)
        idx = kc + offsets[None, None, :] - (tau * fs)[:, :, None]
        lo = np.floor(idx).astype(np.int64)
        frac = idx - lo
        valid = (lo >= 0) & (lo <= T - 2)
        lo_c = np.clip(lo, 0, T - 2)
        rows = np.broadcast_to(np.arange(K)[None, :, None], lo_c.shape)
        vals = (
            data[rows, lo_c] * (1.0 - frac)
            + data[rows, np.minimum(lo_c + 1, T - 1)] * frac
        )
        vals = np.where(valid, vals, 0.0)
        out[s:e] = np.einsum("k,dkw->dw", weights, vals)
    return out


def _round_trip_center(grid_range, cd):
    t_r = 2.0 * grid_range / cd.c
    T = cd.num_samples
    if not (cd.t0 <= t_r <= cd.t0 + T / cd.fs):
        raise OutOfRecordError(
            f"range {grid_range} m maps to {t_r} s, outside the record"
        )
    kc = int(round((t_r - cd.t0) * cd.fs))
    return min(max(kc, 0), T - 1)


def das_volume(cd, geom, grid, w=None, focus_mode=FocusMode.FARFIELD, gate=2):
    """Conventional full-aperture DAS volume on a URA, scaled 1/(M N)."""
    if geom.kind is not ArrayKind.URA:
        raise InvalidGeometryError("das_volume requires a URA geometry")
    if geom is not cd.geometry and geom.num_elements != cd.geometry.num_elements:
        raise InvalidArgumentError("geometry does not match channel data")
    weights = _check_weights(w, geom.num_elements)
    xs, ys = geom.xs(), geom.ys()
    data = cd.data.astype(np.float64)
    sa = np.sin(grid.azimuths)
    sb = np.sin(grid.elevations)
    SA = np.repeat(sa, grid.Nb)
    SB = np.tile(sb, grid.Mb)
    offsets = np.arange(-gate, gate + 1)
    scale = 1.0 / (geom.M * geom.N)
    voxels = np.empty((grid.num_ranges, grid.Mb, grid.Nb), dtype=np.float64)
    for ri, r0 in enumerate(grid.ranges):
        kc = _round_trip_center(r0, cd)
        beams = _windowed_beams(
            data, cd.fs, xs, ys, SA, SB, r0, cd.c, focus_mode, kc, offsets, weights
        )
        voxels[ri] = (np.abs(beams).max(axis=1) * scale).reshape(grid.Mb, grid.Nb)
    return BeamVolume(grid=grid, method=Method.DAS_URA, voxels=voxels,
                      focus_mode=focus_mode)


def _arm_indices(geom):
    """Element indices of the horizontal/vertical line arms, by edge label.

    H arms run along x (beamform azimuth), V arms along y. For the perimeter
    the four edges are H1 (bottom), H2 (top), V1 (left), V2 (right); L/cross
    kinds expose their two arms under the labels that match their position.
    The shared element belongs to both arms of an L or cross.
    """
    xs, ys = geom.xs(), geom.ys()
    kind = geom.kind
    if kind is ArrayKind.RECT_PERIMETER:
        y_min, y_max = ys.min(), ys.max()
        x_min, x_max = xs.min(), xs.max()
        return {
            "H1": np.where(ys == y_min)[0],
            "H2": np.where(ys == y_max)[0],
            "V1": np.where(xs == x_min)[0],
            "V2": np.where(xs == x_max)[0],
        }
    if kind is ArrayKind.ELSA:
        y_max, x_max = ys.max(), xs.max()
        return {"H2": np.where(ys == y_max)[0], "V2": np.where(xs == x_max)[0]}
    if kind in (ArrayKind.CLSA, ArrayKind.CSA, ArrayKind.DCSA):
        return {"H": np.where(ys == 0.0)[0], "V": np.where(xs == 0.0)[0]}
    raise InvalidGeometryError(
        f"{kind.value} exposes no orthogonal line arms for product beamforming"
    )


def _pair_for_quadrant(arms, kind, quadrant):
    if kind is ArrayKind.RECT_PERIMETER:
        table = {
            QuadrantId.I: ("H2", "V2"),
            QuadrantId.II: ("H2", "V1"),
            QuadrantId.III: ("H1", "V1"),
            QuadrantId.IV: ("H1", "V2"),
        }
        h, v = table[quadrant]
        return arms[h], arms[v]
    if kind is ArrayKind.ELSA:
        return arms["H2"], arms["V2"]
    return arms["H"], arms["V"]


def _adjacent_quadrants(alpha, beta):
    """Open quadrants whose L-pairs contribute to an axis/center voxel."""
    q = quadrant_of(alpha, beta)
    if q in (QuadrantId.I, QuadrantId.II, QuadrantId.III, QuadrantId.IV):
        return (q,)
    if q is QuadrantId.CENTER:
        return (QuadrantId.I, QuadrantId.II, QuadrantId.III, QuadrantId.IV)
    if q is QuadrantId.AXIS_H:  # beta == 0, alpha != 0
        if alpha > 0:
            return (QuadrantId.I, QuadrantId.IV)
        return (QuadrantId.II, QuadrantId.III)
    # AXIS_V: alpha == 0, beta != 0
    if beta > 0:
        return (QuadrantId.I, QuadrantId.II)
    return (QuadrantId.III, QuadrantId.IV)


def signed_sqrt(x):
    """sign(x) * sqrt(|x|), elementwise."""
    return np.sign(x) * np.sqrt(np.abs(x))


def product_beamform(cd, geom, grid, w=None, focus_mode=FocusMode.FARFIELD, gate=2):
    """Quadrant-based orthogonal-L product beamforming.

    Per voxel: the horizontal and vertical line arms selected by the voxel's
    quadrant are beamformed independently; the per-sample signed square root
    of their product, scaled 1/(M N), is range-gated into the voxel value.
    Axis/center voxels average the signed-sqrt series of every adjacent
    quadrant's pair. On single-L kinds (ELSA/CLSA/CSA/DCSA) all quadrants
    share the one pair.
    """
    arms = _arm_indices(geom)  # raises for URA
    if geom is not cd.geometry and geom.num_elements != cd.geometry.num_elements:
        raise InvalidArgumentError("geometry does not match channel data")
    weights = _check_weights(w, geom.num_elements)
    xs, ys = geom.xs(), geom.ys()
    data = cd.data.astype(np.float64)
    scale = 1.0 / (geom.M * geom.N)
    offsets = np.arange(-gate, gate + 1)

    sa = np.sin(grid.azimuths)
    sb = np.sin(grid.elevations)
    SA = np.repeat(sa, grid.Nb)
    SB = np.tile(sb, grid.Mb)
    D = grid.Mb * grid.Nb

    # group flat voxel indices by the tuple of contributing quadrants
    groups = {}
    for d in range(D):
        al = grid.azimuths[d // grid.Nb]
        be = grid.elevations[d % grid.Nb]
        key = _adjacent_quadrants(al, be)
        groups.setdefault(key, []).append(d)

    voxels = np.empty((grid.num_ranges, grid.Mb, grid.Nb), dtype=np.float64)
    for ri, r0 in enumerate(grid.ranges):
        kc = _round_trip_center(r0, cd)
        flat = np.empty(D, dtype=np.float64)
        for quadrants, idx_list in groups.items():
            idx = np.array(idx_list, dtype=np.intp)
            acc = None
            cache = {}
            for q in quadrants:
                h_idx, v_idx = _pair_for_quadrant(arms, geom.kind, q)
                pair_key = (h_idx.tobytes(), v_idx.tobytes())
                if pair_key not in cache:
                    bh = _windowed_beams(
                        data[h_idx], cd.fs, xs[h_idx], ys[h_idx],
                        SA[idx], SB[idx], r0, cd.c, focus_mode, kc, offsets,
                        weights[h_idx],
                    )
                    bv = _windowed_beams(
                        data[v_idx], cd.fs, xs[v_idx], ys[v_idx],
                        SA[idx], SB[idx], r0, cd.c, focus_mode, kc, offsets,
                        weights[v_idx],
                    )
                    cache[pair_key] = signed_sqrt(bh * bv)
                series = cache[pair_key]
                acc = series if acc is None else acc + series
            acc = acc / len(quadrants)
            flat[idx] = np.abs(acc * scale).max(axis=1)
        voxels[ri] = flat.reshape(grid.Mb, grid.Nb)
    return BeamVolume(grid=grid, method=Method.PRODUCT_ELSA, voxels=voxels,
                      focus_mode=focus_mode)


def _block_plan(T, L, max_shift_samples):
    pad = int(math.ceil(max_shift_samples)) + 1
    valid = L - 2 * pad
    if valid < 1:
        raise InvalidArgumentError(
            f"block length {L} cannot absorb delay spread of {pad} samples per side"
        )
    starts = list(range(0, T, valid))
    return pad, valid, starts


def dm_volume(cd, geom, grid, w=None, block_len_L=1024, overlap_fraction=0.5,
              focus_mode=FocusMode.FARFIELD, gate=2):
    """Frequency-domain direct method.

    The record is cut into overlapping blocks of length L; each channel block
    is transformed, multiplied by exact per-frequency phase factors
    e^(-j 2 pi f tau) for the same steering delays as the time-domain path,
    summed over channels, inverse transformed, and the centers reassembled
    (overlap-discard). Matches das_volume within interpolation tolerance.

    overlap_fraction is accepted for interface compatibility; the discard
    margin is derived from the actual delay spread (at least one sample),
    the smallest margin that keeps block reassembly exact.
    """
    if block_len_L < 2 or (block_len_L & (block_len_L - 1)) != 0:
        raise InvalidArgumentError("block length must be a power of two >= 2")
    if not (0 <= overlap_fraction < 1):
        raise InvalidArgumentError("overlap fraction must be in [0, 1)")
    weights = _check_weights(w, geom.num_elements)
    xs, ys = geom.xs(), geom.ys()
    data = cd.data.astype(np.float64) * weights[:, None]
    T = cd.num_samples
    L = int(block_len_L)

    sa = np.sin(grid.azimuths)
    sb = np.sin(grid.elevations)
    SA = np.repeat(sa, grid.Nb)
    SB = np.tile(sb, grid.Mb)
    D = grid.Mb * grid.Nb
    scale = 1.0 / (geom.M * geom.N)

    if focus_mode is FocusMode.NEARFIELD:
        # per-range delays differ, so the whole series must be rebuilt per range
        range_groups = [[ri] for ri in range(grid.num_ranges)]
    else:
        range_groups = [list(range(grid.num_ranges))]

    voxels = np.empty((grid.num_ranges, grid.Mb, grid.Nb), dtype=np.float64)
    freqs = np.fft.rfftfreq(L, 1.0 / cd.fs)
    for ris in range_groups:
        tau = _delays(xs, ys, SA, SB, grid.ranges[ris[0]], cd.c, focus_mode)  # (D, K)
        max_shift = float(np.max(np.abs(tau))) * cd.fs
        pad, valid, starts = _block_plan(T, L, max_shift)
        series = np.zeros((D, T), dtype=np.float64)
        ura = geom.kind is ArrayKind.URA
        for s0 in starts:
            lo = s0 - pad
            block = np.zeros((data.shape[0], L), dtype=np.float64)
            src_lo = max(lo, 0)
            src_hi = min(lo + L, T)
            if src_hi > src_lo:
                block[:, src_lo - lo:src_hi - lo] = data[:, src_lo:src_hi]
            X = np.fft.rfft(block, axis=1)  # (K, F)
            if ura:
                Y = _dm_spectrum_ura(X, geom, freqs, SA, SB, cd.c)
            else:
                Y = _dm_spectrum_general(X, freqs, tau)
            beams = np.fft.irfft(Y, n=L, axis=1)
            n_keep = min(valid, T - s0)
            series[:, s0:s0 + n_keep] = beams[:, pad:pad + n_keep]
        for ri in ris:
            kc = _round_trip_center(grid.ranges[ri], cd)
            lo = max(0, kc - gate)
            hi = min(T - 1, kc + gate)
            window = np.abs(series[:, lo:hi + 1]) * scale
            voxels[ri] = window.max(axis=1).reshape(grid.Mb, grid.Nb)
    return BeamVolume(grid=grid, method=Method.DM, voxels=voxels,
                      focus_mode=focus_mode)


def _dm_spectrum_ura(X, geom, freqs, SA, SB, c):
    """Separable URA phase application: Y[d, f] = sum_k X[k, f] e^(-j2pi f tau)."""
    M, N = geom.M, geom.N
    F = len(freqs)
    D = len(SA)
    # element order is n outer, m middle
    Xg = X.reshape(N, M, F)
    x_row = np.array([e.x for e in geom.elements[:M]])
    y_col = np.array([geom.elements[n * M].y for n in range(N)])
    df = freqs[1] - freqs[0] if F > 1 else 0.0
    Wx = np.exp(-2j * np.pi * df * np.outer(SA, x_row) / c)  # (D, M)
    Wy = np.exp(-2j * np.pi * df * np.outer(SB, y_col) / c)  # (D, N)
    Px = np.ones_like(Wx)
    Py = np.ones_like(Wy)
    Y = np.empty((D, F), dtype=np.complex128)
    for fi in range(F):
        tmp = Py @ Xg[:, :, fi]          # (D, M)
        Y[:, fi] = np.einsum("dm,dm->d", Px, tmp)
        if fi < F - 1:
            Px = Px * Wx
            Py = Py * Wy
    return Y


def _dm_spectrum_general(X, freqs, tau):
    """Direct phase application for arbitrary geometries (small K or D)."""
    D, K = tau.shape
    F = len(freqs)
    Y = np.empty((D, F), dtype=np.complex128)
    df = freqs[1] - freqs[0] if F > 1 else 0.0
    W = np.exp(-2j * np.pi * df * tau)  # (D, K)
    cur = np.ones_like(W)
    for fi in range(F):
        Y[:, fi] = cur @ X[:, fi]
        if fi < F - 1:
            cur = cur * W
    return Y
