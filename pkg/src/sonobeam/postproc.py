"""Displayable artifacts from beam volumes: k-means segmentation,
polar-to-Cartesian scan conversion, max projections, dB images."""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateClusteringError,
    InvalidArgumentError,
)


@dataclass(frozen=True)
class SegmentedVolume:
    grid: object
    mask: np.ndarray           # bool, same shape as the source voxels
    k: int
    chosen_cluster_mean: float
    cluster_means: tuple = ()  # all final centroids, ascending


@dataclass(frozen=True)
class CartesianVolume:
    origin: tuple              # (x0, y0, z0) meters
    voxel_pitch: tuple         # meters per axis
    dims: tuple                # (nx, ny, nz)
    values: np.ndarray         # indexed [ix, iy, iz], >= 0

    def __post_init__(self):
        if len(self.origin) != 3 or len(self.voxel_pitch) != 3 or len(self.dims) != 3:
            raise InvalidArgumentError("origin, pitch, and dims must be 3-vectors")
        if any(p <= 0 for p in self.voxel_pitch):
            raise InvalidArgumentError("voxel pitch must be positive")
        if any(d < 1 for d in self.dims):
            raise InvalidArgumentError("dims must be >= 1")
        if tuple(self.values.shape) != tuple(self.dims):
            raise InvalidArgumentError("values shape must equal dims")
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "voxel_pitch",
                           tuple(float(v) for v in self.voxel_pitch))
        object.__setattr__(self, "dims", tuple(int(v) for v in self.dims))


def kmeans_segment(volume, k=3, seed=None, max_iter=100, tol=1e-6):
    """1D k-means over voxel intensities; mask = max-mean cluster membership.

    Initialization is deterministic (evenly spaced quantiles of the sorted
    intensity distribution), so identical inputs give identical masks; seed
    is accepted for interface parity with stochastic stages. Iterates until
    the largest centroid move falls under tol * (intensity spread).
    """
    if k < 2:
        raise InvalidArgumentError("k must be >= 2")
    if max_iter < 1:
        raise InvalidArgumentError("max_iter must be >= 1")
    vox = volume.voxels
    x = vox.ravel().astype(np.float64)
    spread = float(x.max() - x.min())
    if spread == 0.0:
        raise DegenerateClusteringError(
            "constant-intensity volume cannot be clustered"
        )
    centroids = np.quantile(x, (np.arange(k) + 0.5) / k)
    for _ in range(max_iter):
        assign = np.argmin(np.abs(x[:, None] - centroids[None, :]), axis=1)
        new = centroids.copy()
        for ci in range(k):
            sel = x[assign == ci]
            if len(sel):
                new[ci] = sel.mean()
        move = float(np.max(np.abs(new - centroids)))
        centroids = new
        if move < tol * spread:
            break
    assign = np.argmin(np.abs(x[:, None] - centroids[None, :]), axis=1)
    best = int(np.argmax(centroids))
    mask = (assign == best).reshape(vox.shape)
    return SegmentedVolume(grid=volume.grid, mask=mask, k=k,
                           chosen_cluster_mean=float(centroids[best]),
                           cluster_means=tuple(float(c) for c in np.sort(centroids)))


def _axis_index(values, n, coord):
    """Fractional index of coord on a uniform axis; NaN marks out-of-range."""
    if n == 1:
        # degenerate axis: project onto the single plane
        return np.zeros_like(coord)
    pitch = values[1] - values[0]
    t = (coord - values[0]) / pitch
    eps = 1e-9
    t = np.where((t >= -eps) & (t <= n - 1 + eps), np.clip(t, 0, n - 1), np.nan)
    return t


def _source_voxels(v):
    if hasattr(v, "voxels"):
        return v.voxels, v.grid
    if hasattr(v, "mask"):
        return v.mask.astype(np.float64), v.grid
    raise InvalidArgumentError("expected a beam volume or segmented volume")


def scan_convert(v, origin, voxel_pitch, dims):
    """Resample a polar volume onto a Cartesian grid (trilinear).

    Each Cartesian voxel center (x, y, z) maps back through r = |(x,y,z)|,
    alpha = asin(x/r), beta = asin(y/r); the sample is trilinearly
    interpolated in (range, azimuth, elevation) index space. Points outside
    the polar coverage (including z <= 0 and the r = 0 singularity) are 0.
    """
    vox, grid = _source_voxels(v)
    origin = tuple(float(a) for a in origin)
    voxel_pitch = tuple(float(a) for a in voxel_pitch)
    dims = tuple(int(a) for a in dims)
    nx, ny, nz = dims
    xs = origin[0] + voxel_pitch[0] * np.arange(nx)
    ys = origin[1] + voxel_pitch[1] * np.arange(ny)
    zs = origin[2] + voxel_pitch[2] * np.arange(nz)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    R = np.sqrt(X * X + Y * Y + Z * Z)
    ok = (R > 0) & (Z > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        A = np.arcsin(np.where(ok, X / np.where(R == 0, 1, R), 0.0))
        B = np.arcsin(np.where(ok, Y / np.where(R == 0, 1, R), 0.0))

    tr = _axis_index(grid.ranges, grid.num_ranges, R)
    ta = _axis_index(grid.azimuths, grid.Mb, A)
    tb = _axis_index(grid.elevations, grid.Nb, B)
    valid = ok & ~np.isnan(tr) & ~np.isnan(ta) & ~np.isnan(tb)
    tr = np.where(valid, tr, 0.0)
    ta = np.where(valid, ta, 0.0)
    tb = np.where(valid, tb, 0.0)

    out = np.zeros(dims, dtype=np.float64)
    i0 = np.floor(tr).astype(np.intp)
    j0 = np.floor(ta).astype(np.intp)
    k0 = np.floor(tb).astype(np.intp)
    i0 = np.minimum(i0, max(grid.num_ranges - 2, 0))
    j0 = np.minimum(j0, max(grid.Mb - 2, 0))
    k0 = np.minimum(k0, max(grid.Nb - 2, 0))
    fr, fa, fb = tr - i0, ta - j0, tb - k0
    i1 = np.minimum(i0 + 1, grid.num_ranges - 1)
    j1 = np.minimum(j0 + 1, grid.Mb - 1)
    k1 = np.minimum(k0 + 1, grid.Nb - 1)
    for di, wi in ((i0, 1 - fr), (i1, fr)):
        for dj, wj in ((j0, 1 - fa), (j1, fa)):
            for dk, wk in ((k0, 1 - fb), (k1, fb)):
                w = wi * wj * wk
                out += w * vox[di, dj, dk]
    out = np.where(valid, out, 0.0)
    return CartesianVolume(origin=origin, voxel_pitch=voxel_pitch, dims=dims,
                           values=out)


def default_cartesian_spec(grid, nx=64, ny=64, nz=64):
    """Bounding-box Cartesian spec covering a polar grid's coverage."""
    sa = np.sin(grid.azimuths)
    sb = np.sin(grid.elevations)
    r_lo, r_hi = float(grid.ranges[0]), float(grid.ranges[-1])
    x_cands = [r * s for r in (r_lo, r_hi) for s in (sa[0], sa[-1])]
    y_cands = [r * s for r in (r_lo, r_hi) for s in (sb[0], sb[-1])]
    z_min = r_lo
    for a in (sa[0], sa[-1], 0.0):
        for b in (sb[0], sb[-1], 0.0):
            root = 1.0 - a * a - b * b
            if root > 0:
                z_min = min(z_min, r_lo * np.sqrt(root))
    x0, x1 = min(x_cands), max(x_cands)
    y0, y1 = min(y_cands), max(y_cands)
    z0, z1 = z_min, r_hi
    def pitch(lo, hi, n):
        return (hi - lo) / max(n - 1, 1) if hi > lo else 1.0
    origin = (x0, y0, z0)
    voxel_pitch = (pitch(x0, x1, nx), pitch(y0, y1, ny), pitch(z0, z1, nz))
    return origin, voxel_pitch, (nx, ny, nz)


_PLANES = {"XY": 2, "XZ": 1, "YZ": 0}


def project_max(v, plane):
    """Maximum-intensity projection onto the named plane.

    Cartesian volumes project along the omitted axis of (x, y, z); beam
    volumes treat (azimuth, elevation, range) as (x, y, z). A 2D input is
    returned unchanged, which makes repeated projection idempotent.
    """
    plane = plane.upper() if isinstance(plane, str) else plane
    if plane not in _PLANES:
        raise InvalidArgumentError(f"plane must be one of {sorted(_PLANES)}")
    if isinstance(v, np.ndarray) and v.ndim == 2:
        return v
    if isinstance(v, CartesianVolume):
        vals = v.values                      # (x, y, z)
    else:
        vox, _ = _source_voxels(v)           # (range, az, el)
        vals = np.transpose(vox, (1, 2, 0))  # -> (x=az, y=el, z=range)
    return vals.max(axis=_PLANES[plane])


def to_db_image(img, dynamic_range_db):
    """Peak-normalized log compression to 8 bits.

    20 log10(v / max) clamped to [-DR, 0], mapped linearly onto [0, 255]
    with round-half-up. An all-zero image stays all zero.
    """
    if dynamic_range_db <= 0:
        raise InvalidArgumentError("dynamic range must be positive")
    img = np.asarray(img, dtype=np.float64)
    peak = img.max()
    if peak <= 0:
        return np.zeros(img.shape, dtype=np.uint8)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.where(img > 0, img, np.nan) / peak)
    db = np.where(np.isnan(db), -np.inf, db)
    db = np.clip(db, -dynamic_range_db, 0.0)
    scaled = (db + dynamic_range_db) / dynamic_range_db * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)
