"""Transmit pulses, point-scatterer channel synthesis and receive conditioning.

The synthesis places each echo's energy centroid at its arrival time
t = 2 r0 / c - tau(sensor), where tau is the far-field steering delay with
the convention that positive tau means the wavefront reaches that sensor
earlier. The matched filter crops its output so a pulse whose centroid sits
at delay d produces a compressed peak at d; beamformers can then read voxel
values directly at the round-trip time with no per-method offset.
"""

from dataclasses import dataclass
import enum
import math
import warnings

import numpy as np
from scipy.signal import fftconvolve

from .errors import (
    DegeneratePulseError,
    FarFieldViolationWarning,
    InvalidArgumentError,
    SamplingRateError,
    TruncationError,
)
from .geometry import farfield_valid, farfield_delays, validate_direction


class PulseWindow(enum.Enum):
    RECT = "RECT"
    HANN = "HANN"


@dataclass(frozen=True)
class Pulse:
    fc: float
    cycles: float
    fs: float
    samples: np.ndarray
    window: PulseWindow

    @property
    def duration(self):
        return self.cycles / self.fc

    @property
    def num_samples(self):
        return len(self.samples)

    @property
    def energy(self):
        return float(np.sum(self.samples.astype(np.float64) ** 2))

    @property
    def centroid_index(self):
        """Nearest sample to the energy centroid sum(k s_k^2)/sum(s_k^2)."""
        s2 = self.samples.astype(np.float64) ** 2
        return int(round(float(np.sum(np.arange(len(s2)) * s2) / np.sum(s2))))


@dataclass(frozen=True)
class Scatterer:
    r0: float
    alpha: float
    beta: float
    reflectivity: float = 1.0

    def __post_init__(self):
        if self.r0 <= 0:
            raise InvalidArgumentError(f"scatterer range must be positive, got {self.r0}")
        if self.reflectivity < 0:
            raise InvalidArgumentError("reflectivity must be >= 0")
        validate_direction(self.alpha, self.beta)


@dataclass(frozen=True)
class ChannelData:
    """Per-sensor sampled time series.

    data is float32 shaped (num_elements, num_samples); row i belongs to
    geometry.elements[i]. c rides along as medium metadata so files can be
    written without re-supplying it.
    """

    geometry: object
    fs: float
    t0: float
    data: np.ndarray
    c: float

    def __post_init__(self):
        if self.data.ndim != 2:
            raise InvalidArgumentError("channel data must be 2-D (elements x time)")
        if self.data.shape[0] != self.geometry.num_elements:
            raise InvalidArgumentError(
                f"{self.data.shape[0]} rows for {self.geometry.num_elements} elements"
            )
        if self.fs <= 0:
            raise InvalidArgumentError("fs must be positive")

    @property
    def num_samples(self):
        return self.data.shape[1]

    @property
    def duration(self):
        return self.num_samples / self.fs


def make_pulse(fc, cycles, fs, window=PulseWindow.HANN):
    """Windowed sine burst, peak-normalized.

    Parameters
    ----------
    fc : float
        Center frequency in Hz.
    cycles : float
        Number of carrier cycles (pulse duration = cycles/fc).
    fs : float
        Sampling rate in Hz; must be at least 4 fc.
    window : PulseWindow
        RECT or HANN envelope.
    """
    if isinstance(window, str):
        window = PulseWindow(window.upper())
    else:
        window = PulseWindow(window)
    if fc <= 0 or cycles < 1:
        raise InvalidArgumentError("fc must be positive and cycles >= 1")
    if fs < 4 * fc:
        raise SamplingRateError(f"fs = {fs} undersamples fc = {fc} (need fs >= 4 fc)")
    n = int(round(cycles / fc * fs)) + 1
    t = np.arange(n) / fs
    if window is PulseWindow.HANN:
        env = np.hanning(n)
    else:
        env = np.ones(n)
    samples = env * np.sin(2.0 * math.pi * fc * t)
    peak = np.abs(samples).max()
    if peak == 0:
        raise DegeneratePulseError("pulse is identically zero")
    samples = samples / peak
    return Pulse(fc=float(fc), cycles=float(cycles), fs=float(fs),
                 samples=samples, window=window)


def pulse_bandwidth(pulse):
    """-3 dB width (Hz) of the magnitude spectrum around its peak.

    Spectrum computed on a zero-padded FFT at least 16x the pulse length;
    crossings located by linear interpolation.
    """
    s = np.asarray(pulse.samples, dtype=np.float64)
    if len(s) == 0:
        raise DegeneratePulseError("empty pulse")
    nfft = 1
    while nfft < 16 * len(s):
        nfft *= 2
    mag = np.abs(np.fft.rfft(s, nfft))
    freqs = np.fft.rfftfreq(nfft, 1.0 / pulse.fs)
    peak = int(np.argmax(mag))
    if peak == 0:
        raise DegeneratePulseError("spectral peak at DC; no carrier to measure")
    thr = mag[peak] * 10.0 ** (-3.0 / 20.0)

    def cross(inner, outer):
        # linear interpolation between the last sample above and first below
        m0, m1 = mag[inner], mag[outer]
        if m0 == m1:
            return freqs[inner]
        f = (m0 - thr) / (m0 - m1)
        return freqs[inner] + f * (freqs[outer] - freqs[inner])

    i = peak
    while i > 0 and mag[i - 1] >= thr:
        i -= 1
    lo = cross(i, i - 1) if i > 0 else freqs[0]
    j = peak
    while j < len(mag) - 1 and mag[j + 1] >= thr:
        j += 1
    hi = cross(j, j + 1) if j < len(mag) - 1 else freqs[-1]
    return float(hi - lo)


def spreading_gain(r0, exponent=2.0, r_ref=1.0):
    """Two-way spreading amplitude factor (r_ref/r0)^exponent."""
    return (r_ref / r0) ** exponent


def synth_channel_data(geom, scatterers, pulse, c, fs, duration, snr_db=None,
                       *, t0=0.0, seed=None, spreading_exponent=2.0):
    """Far-field point-scatterer synthesis.

    Each scatterer contributes reflectivity * g_spread(r0) * pulse placed so
    its energy centroid sits at 2 r0/c - tau_far(sensor) (positive tau =
    earlier arrival). Fractional sample positions use two-tap linear
    splitting. Echoes falling outside [t0, t0 + duration] raise
    TruncationError; scatterers violating the far-field bound only warn.

    snr_db, if given, adds white Gaussian noise with RMS set relative to the
    strongest echo's RMS over its support; pass a seed for reproducibility.
    """
    if fs != pulse.fs:
        raise InvalidArgumentError("pulse fs differs from requested channel fs")
    if duration <= 0:
        raise InvalidArgumentError("duration must be positive")
    num = int(round(duration * fs))
    if num < pulse.num_samples:
        raise TruncationError("record shorter than the pulse itself")

    xs = geom.xs()
    ys = geom.ys()
    K = len(xs)
    data = np.zeros((K, num), dtype=np.float64)
    p = pulse.samples.astype(np.float64)
    Lp = len(p)
    cent = pulse.centroid_index
    lam = c / pulse.fc

    peak_amp = 0.0
    for sc in scatterers:
        if not farfield_valid(sc.r0, geom.aperture_D, lam):
            warnings.warn(
                f"scatterer at r0={sc.r0} m violates the far-field bound for "
                f"D={geom.aperture_D} m",
                FarFieldViolationWarning,
            )
        amp = sc.reflectivity * spreading_gain(sc.r0, spreading_exponent)
        peak_amp = max(peak_amp, amp)
        tau = farfield_delays(xs, ys, math.sin(sc.alpha), math.sin(sc.beta), c)[0]
        # fractional start index of the pulse's first sample, per sensor
        k0 = (2.0 * sc.r0 / c - tau - t0) * fs - cent
        lo = np.floor(k0).astype(np.int64)
        frac = k0 - lo
        if np.any(lo < 0) or np.any(lo + Lp + 1 > num):
            raise TruncationError(
                "echo support exceeds the record; extend duration or shift t0"
            )
        for i in range(K):
            seg = data[i, lo[i]:lo[i] + Lp + 1]
            seg[:-1] += amp * (1.0 - frac[i]) * p
            seg[1:] += amp * frac[i] * p

    if snr_db is not None:
        if peak_amp == 0:
            raise InvalidArgumentError("cannot set SNR for an all-zero scene")
        echo_rms = peak_amp * float(np.sqrt(np.mean(p ** 2)))
        sigma = echo_rms / (10.0 ** (snr_db / 20.0))
        rng = np.random.default_rng(seed)
        data = data + rng.normal(0.0, sigma, size=data.shape)

    return ChannelData(geometry=geom, fs=float(fs), t0=float(t0),
                       data=data.astype(np.float32), c=float(c))


def matched_filter(cd, pulse):
    """Correlate every channel with the transmit pulse.

    Implemented as convolution with the time-reversed pulse, cropped to the
    input length and aligned on the pulse's energy centroid: an echo whose
    centroid sits at delay d compresses to a peak at d with value equal to
    the pulse energy.
    """
    if pulse.num_samples == 0:
        raise InvalidArgumentError("empty pulse")
    if pulse.num_samples > cd.num_samples:
        raise InvalidArgumentError("pulse longer than the channel record")
    kernel = pulse.samples[::-1].astype(np.float64)
    full = fftconvolve(cd.data.astype(np.float64), kernel[None, :], mode="full")
    start = pulse.num_samples - 1 - pulse.centroid_index
    out = full[:, start:start + cd.num_samples]
    return ChannelData(geometry=cd.geometry, fs=cd.fs, t0=cd.t0,
                       data=out.astype(np.float32), c=cd.c)


def tgc(cd, c, exponent, absorption_db_per_m, max_gain_db=80.0):
    """Time gain compensation.

    Gain at sample time t is (r/1m)^exponent * 10^(absorption*2r/20) with
    r = c t / 2, clamped at max_gain_db. Monotone non-decreasing in t for
    non-negative exponent/absorption.
    """
    if c <= 0:
        raise InvalidArgumentError("c must be positive")
    if exponent < 0 or absorption_db_per_m < 0:
        raise InvalidArgumentError("exponent and absorption must be >= 0")
    t = cd.t0 + np.arange(cd.num_samples) / cd.fs
    r = np.maximum(c * t / 2.0, 0.0)
    gain = r ** exponent * 10.0 ** (absorption_db_per_m * 2.0 * r / 20.0)
    gain = np.minimum(gain, 10.0 ** (max_gain_db / 20.0))
    out = cd.data.astype(np.float64) * gain[None, :]
    return ChannelData(geometry=cd.geometry, fs=cd.fs, t0=cd.t0,
                       data=out.astype(np.float32), c=cd.c)


def mainlobe_gate(pulse):
    """Default range gate: half the -3 dB mainlobe of the matched-filtered pulse.

    The matched-filtered pulse is the autocorrelation; its signed central
    lobe's -3 dB width (in samples) halved gives the +/- gate used by volume
    builders when the caller does not override it.
    """
    p = pulse.samples.astype(np.float64)
    ac = np.correlate(p, p, mode="full")
    mid = len(ac) // 2
    acn = ac / ac[mid]
    thr = 10.0 ** (-3.0 / 20.0)
    i = mid
    while i > 0 and acn[i - 1] >= thr:
        i -= 1
    j = mid
    while j < len(acn) - 1 and acn[j + 1] >= thr:
        j += 1
    width = j - i + 1
    return max(width // 2, 1)
