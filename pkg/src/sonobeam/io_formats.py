"""Binary file formats: channel data (SBCD), beam volumes (SBVL),
Cartesian volumes (SBCV), packed segmentation masks, and PGM images.

Everything is little-endian with fixed-width fields; payloads are 32-bit
floats regardless of in-memory precision. Readers validate sizes before
touching payload bytes and report failures with byte offsets.
"""

import json
import struct

import numpy as np

from .beamform import BeamVolume, FocusMode, Method
from .errors import (
    FileFormatError,
    InvalidArgumentError,
    TruncatedPayloadError,
)
from .geometry import ArrayGeometry, ArrayKind, ImagingGrid, SensorElement
from .postproc import CartesianVolume, SegmentedVolume
from .signal import ChannelData

FORMAT_VERSION = 1

_SBCD_HEADER = struct.Struct("<4sHIIddQdH")
_SBCD_TABLE_HEAD = struct.Struct("<IHd")
_SBCD_TABLE_ROW = struct.Struct("<IIdd")
_SBVL_HEADER = struct.Struct("<4sHHHIII")
_SBCV_HEADER = struct.Struct("<4sHddddddIII")

LAYOUT_DENSE = 0
LAYOUT_EXPLICIT = 1

_KIND_TAGS = {
    ArrayKind.URA: 0,
    ArrayKind.RECT_PERIMETER: 1,
    ArrayKind.ELSA: 2,
    ArrayKind.CLSA: 3,
    ArrayKind.CSA: 4,
    ArrayKind.DCSA: 5,
}
_KIND_FROM_TAG = {v: k for k, v in _KIND_TAGS.items()}

_METHOD_TAGS = {
    Method.DAS_URA: 0,
    Method.PRODUCT_ELSA: 1,
    Method.DAS_LINE_H: 2,
    Method.DAS_LINE_V: 3,
    Method.DM: 4,
}
_METHOD_FROM_TAG = {v: k for k, v in _METHOD_TAGS.items()}

_FOCUS_TAGS = {FocusMode.FARFIELD: 0, FocusMode.NEARFIELD: 1}
_FOCUS_FROM_TAG = {v: k for k, v in _FOCUS_TAGS.items()}


def _read_exact(buf, offset, n, what):
    if offset + n > len(buf):
        raise TruncatedPayloadError(
            f"truncated {what}: need {n} bytes at offset {offset}, "
            f"file has {len(buf) - offset}",
            expected_bytes=offset + n,
            actual_bytes=len(buf),
        )
    return buf[offset:offset + n], offset + n


def _check_magic(buf, magic, name):
    if len(buf) < 4 or buf[:4] != magic:
        raise FileFormatError(
            f"not a {name} file (bad magic at offset 0)", offset=0
        )


def write_channel_data(cd, path, layout=LAYOUT_EXPLICIT):
    """Serialize channel data. EXPLICIT layout (default) appends the sensor
    table so the geometry round-trips exactly; DENSE omits it and is only
    valid for URA records (spacing must then be supplied on read)."""
    geom = cd.geometry
    if layout == LAYOUT_DENSE and geom.kind is not ArrayKind.URA:
        raise InvalidArgumentError("dense layout is defined for URA only")
    if layout not in (LAYOUT_DENSE, LAYOUT_EXPLICIT):
        raise InvalidArgumentError(f"unknown layout {layout}")
    header = _SBCD_HEADER.pack(
        b"SBCD", FORMAT_VERSION, geom.M, geom.N, cd.fs, cd.t0,
        cd.num_samples, cd.c, layout,
    )
    payload = np.ascontiguousarray(cd.data, dtype="<f4").tobytes()
    parts = [header, payload]
    if layout == LAYOUT_EXPLICIT:
        parts.append(_SBCD_TABLE_HEAD.pack(
            geom.num_elements, _KIND_TAGS[geom.kind], geom.spacing
        ))
        for e in geom.elements:
            parts.append(_SBCD_TABLE_ROW.pack(e.index_m, e.index_n, e.x, e.y))
    with open(path, "wb") as f:
        for p in parts:
            f.write(p)


def read_channel_data(path, spacing=None):
    with open(path, "rb") as f:
        buf = f.read()
    _check_magic(buf, b"SBCD", "channel-data")
    raw, off = _read_exact(buf, 0, _SBCD_HEADER.size, "header")
    magic, version, M, N, fs, t0, num_samples, c, layout = _SBCD_HEADER.unpack(raw)
    if version != FORMAT_VERSION:
        raise FileFormatError(
            f"unsupported channel-data version {version}", offset=4
        )
    if layout == LAYOUT_DENSE:
        if spacing is None:
            raise InvalidArgumentError(
                "dense channel-data files carry no sensor positions; "
                "pass the element spacing"
            )
        from .geometry import build_array

        geom = build_array(ArrayKind.URA, M, N, spacing)
    elif layout == LAYOUT_EXPLICIT:
        # table sits after the payload; element count lives in its head
        rest = len(buf) - off
        head_size = _SBCD_TABLE_HEAD.size
        row_size = _SBCD_TABLE_ROW.size
        sample_bytes = num_samples * 4
        # K * sample_bytes + head + K * row = rest
        if rest < head_size:
            raise TruncatedPayloadError(
                "file too short for the sensor table head",
                expected_bytes=off + head_size, actual_bytes=len(buf),
            )
        denom = sample_bytes + row_size
        if (rest - head_size) % denom != 0:
            whole = -(-(rest - head_size) // denom)  # next consistent size up
            raise TruncatedPayloadError(
                "payload plus sensor table does not divide into whole "
                "elements: the file is truncated or corrupt",
                expected_bytes=off + head_size + whole * denom,
                actual_bytes=len(buf),
            )
        K = (rest - head_size) // denom
        table_off = off + K * sample_bytes
        raw, _ = _read_exact(buf, table_off, head_size, "sensor table head")
        K_stated, kind_tag, spacing_read = _SBCD_TABLE_HEAD.unpack(raw)
        if K_stated != K:
            raise FileFormatError(
                f"sensor table states {K_stated} elements, file size implies {K}",
                offset=table_off,
            )
        if kind_tag not in _KIND_FROM_TAG:
            raise FileFormatError(
                f"unknown array kind tag {kind_tag}", offset=table_off + 4
            )
        rows_off = table_off + head_size
        elements = []
        o = rows_off
        for _ in range(K):
            raw, o = _read_exact(buf, o, row_size, "sensor table row")
            im, inn, x, y = _SBCD_TABLE_ROW.unpack(raw)
            elements.append(SensorElement(index_m=im, index_n=inn, x=x, y=y))
        exs = [e.x for e in elements]
        eys = [e.y for e in elements]
        span = max(max(exs) - min(exs), max(eys) - min(eys))
        geom = ArrayGeometry(
            kind=_KIND_FROM_TAG[kind_tag], M=M, N=N, spacing=spacing_read,
            elements=tuple(elements),
            aperture_D=float(span + spacing_read),
        )
    else:
        raise FileFormatError(f"unknown layout tag {layout}", offset=46)

    K = geom.num_elements
    expected = K * num_samples * 4
    payload, _ = _read_exact(buf, off, expected, "sample payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(K, num_samples)
    return ChannelData(geometry=geom, fs=fs, t0=t0, data=data.copy(), c=c)


def write_volume(vol, path):
    """Beam volume to SBVL: grid angles in degrees, payload f32 ordered
    (range outer, elevation middle, azimuth inner)."""
    grid = vol.grid
    header = _SBVL_HEADER.pack(
        b"SBVL", FORMAT_VERSION, _METHOD_TAGS[vol.method],
        _FOCUS_TAGS[vol.focus_mode], grid.Mb, grid.Nb, grid.num_ranges,
    )
    az = np.ascontiguousarray(grid.azimuths_deg, dtype="<f8").tobytes()
    el = np.ascontiguousarray(grid.elevations_deg, dtype="<f8").tobytes()
    rg = np.ascontiguousarray(grid.ranges, dtype="<f8").tobytes()
    payload = np.ascontiguousarray(
        np.transpose(vol.voxels, (0, 2, 1)), dtype="<f4"
    ).tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(az)
        f.write(el)
        f.write(rg)
        f.write(payload)


def read_volume(path):
    with open(path, "rb") as f:
        buf = f.read()
    _check_magic(buf, b"SBVL", "volume")
    raw, off = _read_exact(buf, 0, _SBVL_HEADER.size, "header")
    magic, version, method_tag, focus_tag, Mb, Nb, R = _SBVL_HEADER.unpack(raw)
    if version != FORMAT_VERSION:
        raise FileFormatError(f"unsupported volume version {version}", offset=4)
    if method_tag not in _METHOD_FROM_TAG:
        raise FileFormatError(f"unknown method tag {method_tag}", offset=6)
    if focus_tag not in _FOCUS_FROM_TAG:
        raise FileFormatError(f"unknown focus tag {focus_tag}", offset=8)
    raw, off = _read_exact(buf, off, Mb * 8, "azimuth list")
    az = np.frombuffer(raw, dtype="<f8")
    raw, off = _read_exact(buf, off, Nb * 8, "elevation list")
    el = np.frombuffer(raw, dtype="<f8")
    raw, off = _read_exact(buf, off, R * 8, "range list")
    rg = np.frombuffer(raw, dtype="<f8")
    raw, off = _read_exact(buf, off, R * Nb * Mb * 4, "voxel payload")
    vox = np.frombuffer(raw, dtype="<f4").reshape(R, Nb, Mb)
    grid = ImagingGrid(
        azimuths=np.deg2rad(az), elevations=np.deg2rad(el),
        ranges=rg.copy(), Mb=Mb, Nb=Nb,
        azimuths_deg=az.copy(), elevations_deg=el.copy(),
    )
    return BeamVolume(
        grid=grid, method=_METHOD_FROM_TAG[method_tag],
        voxels=np.transpose(vox, (0, 2, 1)).astype(np.float64),
        focus_mode=_FOCUS_FROM_TAG[focus_tag],
    )


def write_cartesian(cv, path):
    header = _SBCV_HEADER.pack(
        b"SBCV", FORMAT_VERSION,
        *cv.origin, *cv.voxel_pitch, *cv.dims,
    )
    payload = np.ascontiguousarray(cv.values, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)


def read_cartesian(path):
    with open(path, "rb") as f:
        buf = f.read()
    _check_magic(buf, b"SBCV", "Cartesian volume")
    raw, off = _read_exact(buf, 0, _SBCV_HEADER.size, "header")
    parts = _SBCV_HEADER.unpack(raw)
    version = parts[1]
    if version != FORMAT_VERSION:
        raise FileFormatError(f"unsupported version {version}", offset=4)
    origin = parts[2:5]
    pitch = parts[5:8]
    dims = parts[8:11]
    count = dims[0] * dims[1] * dims[2]
    raw, _ = _read_exact(buf, off, count * 4, "voxel payload")
    values = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float64)
    return CartesianVolume(origin=origin, voxel_pitch=pitch, dims=dims,
                           values=values)


def write_mask(seg, path):
    """Packed 1-bit mask plus a JSON sidecar (<path>.json) with shape and
    clustering metadata."""
    packed = np.packbits(seg.mask.astype(np.uint8).ravel())
    with open(path, "wb") as f:
        f.write(packed.tobytes())
    sidecar = {
        "shape": list(seg.mask.shape),
        "k": seg.k,
        "chosen_cluster_mean": seg.chosen_cluster_mean,
        "cluster_means": list(seg.cluster_means),
        "bit_order": "C-order, MSB first",
    }
    with open(str(path) + ".json", "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def read_mask(path, grid=None):
    with open(str(path) + ".json") as f:
        sidecar = json.load(f)
    shape = tuple(sidecar["shape"])
    count = int(np.prod(shape))
    with open(path, "rb") as f:
        packed = np.frombuffer(f.read(), dtype=np.uint8)
    expected = (count + 7) // 8
    if len(packed) < expected:
        raise TruncatedPayloadError(
            f"mask needs {expected} bytes, file has {len(packed)}",
            expected_bytes=expected, actual_bytes=len(packed),
        )
    bits = np.unpackbits(packed)[:count].astype(bool).reshape(shape)
    return SegmentedVolume(
        grid=grid, mask=bits, k=int(sidecar["k"]),
        chosen_cluster_mean=float(sidecar["chosen_cluster_mean"]),
        cluster_means=tuple(sidecar.get("cluster_means", ())),
    )


def write_pgm(img, path):
    """8-bit binary PGM (P5)."""
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 2:
        raise InvalidArgumentError("PGM writer expects a 2D uint8 image")
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(img).tobytes())


def read_pgm(path):
    with open(path, "rb") as f:
        buf = f.read()
    if not buf.startswith(b"P5"):
        raise FileFormatError("not a binary PGM (P5) file", offset=0)
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(buf[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise FileFormatError(f"unsupported maxval {maxval}", offset=2)
    raw, _ = _read_exact(buf, pos, w * h, "pixel payload")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w).copy()
