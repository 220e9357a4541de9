"""Binary formats: golden-file byte stability, round trips, error reporting.

The golden artifacts under tests/golden/ were produced by generate.py from
exact dyadic inputs; a byte mismatch means the on-disk format changed, which
is a breaking change regardless of whether the round trip still works.
"""

import importlib.util
import json
import pathlib
import struct

import numpy as np
import pytest
from conftest import point

import sonobeam as sb
from sonobeam import (
    ArrayKind,
    FileFormatError,
    InvalidArgumentError,
    TruncatedPayloadError,
)
from sonobeam.io_formats import LAYOUT_DENSE, LAYOUT_EXPLICIT

GOLD = pathlib.Path(__file__).parent / "golden"

_spec = importlib.util.spec_from_file_location("golden_generate",
                                               GOLD / "generate.py")
gg = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(gg)


# --- golden files ------------------------------------------------------------

@pytest.mark.parametrize("name,writer", [
    ("channel.sbcd", lambda p: sb.write_channel_data(gg.channel_data(), p)),
    ("channel_dense.sbcd",
     lambda p: sb.write_channel_data(gg.channel_data(), p,
                                     layout=LAYOUT_DENSE)),
    ("volume.sbvl", lambda p: sb.write_volume(gg.beam_volume(), p)),
    ("cart.sbcv", lambda p: sb.write_cartesian(gg.cartesian_volume(), p)),
    ("image.pgm", lambda p: sb.write_pgm(gg.pgm_image(), p)),
])
def test_writers_reproduce_golden_bytes(tmp_path, name, writer):
    fresh = tmp_path / name
    writer(fresh)
    assert fresh.read_bytes() == (GOLD / name).read_bytes()


def test_mask_writer_reproduces_golden_bytes(tmp_path):
    fresh = tmp_path / "mask.bin"
    sb.write_mask(gg.segmented_volume(), fresh)
    assert fresh.read_bytes() == (GOLD / "mask.bin").read_bytes()
    assert (fresh.with_suffix(".bin.json").read_text()
            == (GOLD / "mask.bin.json").read_text())


def test_golden_channel_data_reads_back():
    ref = gg.channel_data()
    cd = sb.read_channel_data(GOLD / "channel.sbcd")
    assert cd.geometry.kind is ArrayKind.URA
    assert cd.geometry.elements == ref.geometry.elements
    assert cd.geometry.spacing == ref.geometry.spacing
    assert (cd.fs, cd.t0, cd.c) == (ref.fs, ref.t0, ref.c)
    np.testing.assert_array_equal(cd.data, ref.data)


def test_golden_dense_needs_spacing():
    cd = sb.read_channel_data(GOLD / "channel_dense.sbcd", spacing=0.0015)
    assert cd.geometry.elements == gg.channel_data().geometry.elements
    np.testing.assert_array_equal(cd.data, gg.channel_data().data)
    with pytest.raises(InvalidArgumentError):
        sb.read_channel_data(GOLD / "channel_dense.sbcd")


def test_golden_volume_reads_back():
    ref = gg.beam_volume()
    vol = sb.read_volume(GOLD / "volume.sbvl")
    assert vol.method is ref.method and vol.focus_mode is ref.focus_mode
    np.testing.assert_array_equal(vol.grid.azimuths_deg, ref.grid.azimuths_deg)
    np.testing.assert_array_equal(vol.grid.ranges, ref.grid.ranges)
    np.testing.assert_array_equal(
        vol.voxels, ref.voxels.astype(np.float32).astype(np.float64))


def test_golden_mask_and_pgm_read_back():
    seg = sb.read_mask(GOLD / "mask.bin")
    ref = gg.segmented_volume()
    np.testing.assert_array_equal(seg.mask, ref.mask)
    assert seg.k == 3 and seg.chosen_cluster_mean == 0.75
    assert seg.cluster_means == (0.125, 0.5, 0.75)
    np.testing.assert_array_equal(sb.read_pgm(GOLD / "image.pgm"),
                                  gg.pgm_image())


# --- round trips on real artifacts ---------------------------------------------

def test_channel_data_round_trip_bit_exact(tmp_path, make_scene):
    cd = make_scene(ArrayKind.ELSA, (point(5.0, 5.0),))
    p = tmp_path / "scene.sbcd"
    sb.write_channel_data(cd, p)
    back = sb.read_channel_data(p)
    np.testing.assert_array_equal(back.data, cd.data)
    assert back.geometry.elements == cd.geometry.elements
    assert back.geometry.kind is ArrayKind.ELSA
    assert back.geometry.aperture_D == cd.geometry.aperture_D
    assert (back.fs, back.t0, back.c) == (cd.fs, cd.t0, cd.c)


def test_dense_round_trip_requires_ura(tmp_path, make_scene, geoms):
    ura_cd = make_scene(ArrayKind.URA, (point(0.0, 0.0),))
    p = tmp_path / "dense.sbcd"
    sb.write_channel_data(ura_cd, p, layout=LAYOUT_DENSE)
    back = sb.read_channel_data(p, spacing=geoms[ArrayKind.URA].spacing)
    np.testing.assert_array_equal(back.data, ura_cd.data)
    assert back.geometry.elements == ura_cd.geometry.elements
    elsa_cd = make_scene(ArrayKind.ELSA, (point(0.0, 0.0),))
    with pytest.raises(InvalidArgumentError):
        sb.write_channel_data(elsa_cd, p, layout=LAYOUT_DENSE)
    with pytest.raises(InvalidArgumentError):
        sb.write_channel_data(ura_cd, p, layout=5)


def test_volume_round_trip(tmp_path, fig6_volumes):
    _, pm = fig6_volumes
    p = tmp_path / "pm.sbvl"
    sb.write_volume(pm, p)
    back = sb.read_volume(p)
    # payload is f32; the round trip is exact at that precision
    np.testing.assert_array_equal(
        back.voxels, pm.voxels.astype(np.float32).astype(np.float64))
    np.testing.assert_array_equal(back.grid.azimuths_deg,
                                  pm.grid.azimuths_deg)
    np.testing.assert_array_equal(back.grid.elevations_deg,
                                  pm.grid.elevations_deg)
    np.testing.assert_array_equal(back.grid.ranges, pm.grid.ranges)
    assert back.method is pm.method and back.focus_mode is pm.focus_mode


def test_cartesian_round_trip(tmp_path):
    ref = gg.cartesian_volume()
    p = tmp_path / "c.sbcv"
    sb.write_cartesian(ref, p)
    back = sb.read_cartesian(p)
    assert back.origin == ref.origin
    assert back.voxel_pitch == ref.voxel_pitch
    assert back.dims == ref.dims
    np.testing.assert_array_equal(
        back.values, ref.values.astype(np.float32).astype(np.float64))


def test_mask_round_trip_attaches_grid(tmp_path, fig6_volumes):
    _, pm = fig6_volumes
    seg = sb.kmeans_segment(pm, k=3)
    p = tmp_path / "m.bin"
    sb.write_mask(seg, p)
    back = sb.read_mask(p, grid=pm.grid)
    np.testing.assert_array_equal(back.mask, seg.mask)
    assert back.cluster_means == seg.cluster_means
    assert back.grid is pm.grid


def test_pgm_round_trip_and_comments(tmp_path):
    img = gg.pgm_image()
    p = tmp_path / "i.pgm"
    sb.write_pgm(img, p)
    np.testing.assert_array_equal(sb.read_pgm(p), img)
    # comment lines between header fields are legal P5
    commented = tmp_path / "c.pgm"
    commented.write_bytes(b"P5\n# made by hand\n5 4\n255\n" + img.tobytes())
    np.testing.assert_array_equal(sb.read_pgm(commented), img)


def test_pgm_validation(tmp_path):
    with pytest.raises(InvalidArgumentError):
        sb.write_pgm(np.zeros((2, 2)), tmp_path / "f.pgm")  # not uint8
    with pytest.raises(InvalidArgumentError):
        sb.write_pgm(np.zeros((2, 2, 2), dtype=np.uint8), tmp_path / "f.pgm")
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P4\n2 2\n255\n\x00\x00\x00\x00")
    with pytest.raises(FileFormatError):
        sb.read_pgm(bad)
    wide = tmp_path / "wide.pgm"
    wide.write_bytes(b"P5\n2 2\n65535\n" + b"\x00" * 8)
    with pytest.raises(FileFormatError):
        sb.read_pgm(wide)
    short = tmp_path / "short.pgm"
    short.write_bytes(b"P5\n4 4\n255\n\x00\x00")
    with pytest.raises(TruncatedPayloadError):
        sb.read_pgm(short)


# --- corruption reporting --------------------------------------------------------

def _patched(path, offset, fmt, value):
    buf = bytearray((GOLD / path).read_bytes())
    struct.pack_into(fmt, buf, offset, value)
    return bytes(buf)


def test_channel_data_corruption_reports(tmp_path):
    whole = (GOLD / "channel.sbcd").read_bytes()

    cut = tmp_path / "cut.sbcd"
    cut.write_bytes(whole[:-3])
    with pytest.raises(TruncatedPayloadError) as exc:
        sb.read_channel_data(cut)
    assert exc.value.actual_bytes == len(whole) - 3
    assert exc.value.expected_bytes > exc.value.actual_bytes

    magic = tmp_path / "magic.sbcd"
    magic.write_bytes(b"XXXX" + whole[4:])
    with pytest.raises(FileFormatError) as exc:
        sb.read_channel_data(magic)
    assert exc.value.offset == 0

    version = tmp_path / "version.sbcd"
    version.write_bytes(_patched("channel.sbcd", 4, "<H", 99))
    with pytest.raises(FileFormatError, match="version 99"):
        sb.read_channel_data(version)

    layout = tmp_path / "layout.sbcd"
    layout.write_bytes(_patched("channel.sbcd", 46, "<H", 9))
    with pytest.raises(FileFormatError, match="layout tag 9"):
        sb.read_channel_data(layout)

    # sensor table head sits after 48 header + 4*8*4 payload bytes
    stated = tmp_path / "stated.sbcd"
    stated.write_bytes(_patched("channel.sbcd", 176, "<I", 7))
    with pytest.raises(FileFormatError, match="states 7 elements"):
        sb.read_channel_data(stated)

    kind = tmp_path / "kind.sbcd"
    kind.write_bytes(_patched("channel.sbcd", 180, "<H", 77))
    with pytest.raises(FileFormatError, match="kind tag 77"):
        sb.read_channel_data(kind)


def test_volume_corruption_reports(tmp_path):
    whole = (GOLD / "volume.sbvl").read_bytes()

    method = tmp_path / "m.sbvl"
    method.write_bytes(_patched("volume.sbvl", 6, "<H", 99))
    with pytest.raises(FileFormatError, match="method tag 99"):
        sb.read_volume(method)

    focus = tmp_path / "f.sbvl"
    focus.write_bytes(_patched("volume.sbvl", 8, "<H", 7))
    with pytest.raises(FileFormatError, match="focus tag 7"):
        sb.read_volume(focus)

    cut = tmp_path / "cut.sbvl"
    cut.write_bytes(whole[: len(whole) - 5])
    with pytest.raises(TruncatedPayloadError):
        sb.read_volume(cut)

    notmagic = tmp_path / "x.sbvl"
    notmagic.write_bytes(b"SBCV" + whole[4:])
    with pytest.raises(FileFormatError):
        sb.read_volume(notmagic)


def test_cartesian_corruption_reports(tmp_path):
    whole = (GOLD / "cart.sbcv").read_bytes()
    cut = tmp_path / "cut.sbcv"
    cut.write_bytes(whole[:-1])
    with pytest.raises(TruncatedPayloadError):
        sb.read_cartesian(cut)


def test_mask_corruption_reports(tmp_path, fig6_volumes):
    _, pm = fig6_volumes
    seg = sb.kmeans_segment(pm, k=3)
    p = tmp_path / "m.bin"
    sb.write_mask(seg, p)
    payload = p.read_bytes()
    p.write_bytes(payload[: len(payload) // 2])
    with pytest.raises(TruncatedPayloadError):
        sb.read_mask(p)


def test_mask_sidecar_is_strict_json(tmp_path):
    sb.write_mask(gg.segmented_volume(), tmp_path / "m.bin")
    sidecar = json.loads((tmp_path / "m.bin.json").read_text())
    assert sidecar["shape"] == [2, 3, 3]
    assert sidecar["cluster_means"] == [0.125, 0.5, 0.75]
    assert sidecar["bit_order"] == "C-order, MSB first"
