"""Regenerate the golden binary artifacts in this directory.

Run from the repository root:

    python3 tests/golden/generate.py

The inputs are exact dyadic rationals, so the emitted bytes are identical
on any IEEE-754 platform; tests byte-compare fresh writes against these
files to lock the formats.
"""

import pathlib

import numpy as np

import sonobeam as sb

HERE = pathlib.Path(__file__).parent


def channel_data():
    geom = sb.build_array(sb.ArrayKind.URA, 2, 2, 0.0015)
    data = (np.arange(32, dtype=np.float32) / 4).reshape(4, 8)
    return sb.ChannelData(geometry=geom, fs=10e6, t0=0.04, data=data, c=1500.0)


def beam_volume():
    grid = sb.build_imaging_grid(4.0, 4.0, 3, 3, [29.0, 30.0])
    vox = (np.arange(18, dtype=np.float64) / 8).reshape(2, 3, 3)
    return sb.BeamVolume(grid=grid, method=sb.Method.PRODUCT_ELSA,
                         voxels=vox, focus_mode=sb.FocusMode.FARFIELD)


def cartesian_volume():
    vals = (np.arange(24, dtype=np.float64) / 8).reshape(2, 3, 4)
    return sb.CartesianVolume(origin=(-1.5, -1.5, 29.0),
                              voxel_pitch=(0.5, 0.5, 0.25),
                              dims=(2, 3, 4), values=vals)


def segmented_volume():
    mask = (np.arange(18) % 3 == 0).reshape(2, 3, 3)
    return sb.SegmentedVolume(grid=None, mask=mask, k=3,
                              chosen_cluster_mean=0.75,
                              cluster_means=(0.125, 0.5, 0.75))


def pgm_image():
    return (np.arange(20) * 13 % 256).reshape(4, 5).astype(np.uint8)


def main():
    sb.write_channel_data(channel_data(), HERE / "channel.sbcd")
    sb.write_channel_data(channel_data(), HERE / "channel_dense.sbcd",
                          layout=sb.io_formats.LAYOUT_DENSE)
    sb.write_volume(beam_volume(), HERE / "volume.sbvl")
    sb.write_cartesian(cartesian_volume(), HERE / "cart.sbcv")
    sb.write_mask(segmented_volume(), HERE / "mask.bin")
    sb.write_pgm(pgm_image(), HERE / "image.pgm")
    print("golden files written to", HERE)


if __name__ == "__main__":
    main()
