"""Shared fixtures: desk-scale scenes computed once per session.

The expensive artifacts (channel data, volumes, beam-pattern cuts) are
deterministic, so session scope is safe and keeps the suite fast.
"""

import numpy as np
import pytest

import sonobeam as sb

FS = 10e6
C = 1500.0
FC = 500e3
SPACING = 0.0015          # half wavelength at 500 kHz
R0 = 30.0
MARGIN = 600              # samples of pre/post padding used by every scene
T0 = 2 * R0 / C - MARGIN / FS
DURATION = 2 * MARGIN / FS


@pytest.fixture(scope="session")
def pulse():
    return sb.make_pulse(FC, 3, FS)


@pytest.fixture(scope="session")
def geoms():
    return {k: sb.build_array(k, 24, 24, SPACING) for k in sb.ArrayKind}


@pytest.fixture(scope="session")
def slice_grid():
    # the 1-degree-pitch 60x60 slice at 30 m used throughout
    return sb.build_imaging_grid(59.0, 59.0, 60, 60, [R0])


@pytest.fixture(scope="session")
def make_scene(pulse, geoms):
    """Factory for noiseless matched-filtered channel data at the 30 m shell."""
    cache = {}

    def build(kind, points):
        key = (kind, tuple((p.r0, p.alpha, p.beta, p.reflectivity) for p in points))
        if key not in cache:
            cd = sb.synth_channel_data(geoms[kind], points, pulse, C, FS,
                                       DURATION, t0=T0)
            cache[key] = sb.matched_filter(cd, pulse)
        return cache[key]

    return build


def point(alpha_deg, beta_deg, r0=R0, reflectivity=1.0):
    return sb.Scatterer(r0=r0, alpha=np.deg2rad(alpha_deg),
                        beta=np.deg2rad(beta_deg), reflectivity=reflectivity)


@pytest.fixture(scope="session")
def fig6_volumes(make_scene, geoms, slice_grid):
    """CM and PM reconstructions of the two-point resolvability scene."""
    pts = [point(5.0, 5.0), point(10.0, 10.0)]
    cm = sb.das_volume(make_scene(sb.ArrayKind.URA, pts),
                       geoms[sb.ArrayKind.URA], slice_grid)
    pm = sb.product_beamform(make_scene(sb.ArrayKind.ELSA, pts),
                             geoms[sb.ArrayKind.ELSA], slice_grid)
    return cm, pm


@pytest.fixture(scope="session")
def table1_metrics(geoms):
    """PSF metrics for every array kind at the (5, 5, 30 m) probe point."""
    pt = point(5.0, 5.0)
    out = {}
    for kind, method in (
        (sb.ArrayKind.URA, "das"),
        (sb.ArrayKind.ELSA, "proposed"),
        (sb.ArrayKind.CLSA, "proposed"),
        (sb.ArrayKind.CSA, "proposed"),
        (sb.ArrayKind.DCSA, "proposed"),
    ):
        out[kind] = sb.psf_metrics(geoms[kind], method, pt)
    return out
