"""CLI contract: exit codes, CSV output, and stage chaining.

Everything runs in-process through cli_dispatch so stdout/stderr can be
asserted exactly; one subprocess test proves the installed entry point.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

import sonobeam as sb
from sonobeam.cli import cli_dispatch

OPCOUNT_HEADER = "method,N,Nb,L,additions,multiplications,sqrts,total,median_seconds"


def run(capsys, *argv):
    rc = cli_dispatch(list(argv))
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def write_config(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


# --- opcount --------------------------------------------------------------


def test_opcount_positional_form_exact_row(capsys):
    rc, out, err = run(capsys, "opcount", "proposed", "24", "60",
                       "--interp", "linear")
    assert rc == 0
    assert out == OPCOUNT_HEADER + "\nPROPOSED,24,60,,511200,349200,3600,864000,\n"
    assert "matches published total 864,000" in err


def test_opcount_flag_form_is_equivalent(capsys):
    rc, out, _ = run(capsys, "opcount", "--method", "proposed",
                     "--n", "24", "--nb", "60", "--interp", "linear")
    assert rc == 0
    assert "PROPOSED,24,60,,511200,349200,3600,864000," in out


def test_opcount_das_flags_published_discrepancy(capsys):
    rc, out, err = run(capsys, "opcount", "das", "24", "60",
                       "--interp", "linear")
    assert rc == 0
    assert "DAS,24,60,,6217200,4147200,0,10364400," in out
    assert "6,221,952" in err and "+66.6%" in err and "not fitted" in err


def test_opcount_dm_reports_block_length_fit(capsys):
    rc, out, err = run(capsys, "opcount", "dm", "24", "60")
    assert rc == 0
    assert "DM,24,60,1024,8586952704,8594325504,0,17181278208," in out
    assert "best-fit block length vs published total: L=1024 (-14.0%)" in err


def test_opcount_czt_small_case_quiet_off_reference(capsys):
    rc, out, err = run(capsys, "opcount", "czt", "1", "1", "--block-len", "2")
    assert rc == 0
    assert "CZT,1,1,2,116,140,0,256," in out
    assert err == ""          # reference notes only at the published scale


def test_opcount_writes_csv_file(tmp_path, capsys):
    dest = tmp_path / "ops.csv"
    rc, out, _ = run(capsys, "opcount", "proposed", "24", "60",
                     "--interp", "linear", "--out", str(dest))
    assert rc == 0 and out == ""
    assert dest.read_text() == (
        OPCOUNT_HEADER + "\nPROPOSED,24,60,,511200,349200,3600,864000,\n")


@pytest.mark.parametrize("argv", [
    ("opcount",),
    ("opcount", "proposed"),
    ("opcount", "warp", "2", "2"),
])
def test_opcount_usage_errors_exit_2(capsys, argv):
    rc, _, err = run(capsys, *argv)
    assert rc == 2
    assert err.startswith("usage error:")


def test_installed_entry_point_matches_dispatch():
    proc = subprocess.run(
        [sys.executable, "-m", "sonobeam.cli", "opcount", "proposed",
         "24", "60", "--interp", "linear"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == \
        "PROPOSED,24,60,,511200,349200,3600,864000,"


# --- parser-level behavior ------------------------------------------------


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(capsys, "warp")[0] == 2


def test_help_exits_zero(capsys):
    rc, out, _ = run(capsys, "synth", "--help")
    assert rc == 0
    assert "usage" in out


# --- synth / beamform / postproc chain ------------------------------------


def test_synth_requires_seed_when_noise_enabled(tmp_path, capsys):
    cfg = write_config(tmp_path, {"scene": {"snr_db": 20.0}})
    rc, _, err = run(capsys, "synth", "--config", cfg,
                     "--out", str(tmp_path / "x.sbcd"))
    assert rc == 2
    assert "--seed is required" in err


def test_chain_synth_beamform_segment_scanconvert_project(tmp_path, capsys):
    sbcd = str(tmp_path / "chan.sbcd")
    sbvl = str(tmp_path / "vol.sbvl")
    mask = str(tmp_path / "mask.bin")
    sbcv = str(tmp_path / "cart.sbcv")
    pgm = str(tmp_path / "img.pgm")

    rc, out, _ = run(capsys, "synth", "--out", sbcd)
    assert rc == 0 and "92 channels" in out
    cd = sb.read_channel_data(sbcd)
    assert cd.geometry.kind is sb.ArrayKind.RECT_PERIMETER

    assert run(capsys, "beamform", "--in", sbcd, "--out", sbvl)[0] == 0
    vol = sb.read_volume(sbvl)
    assert vol.method is sb.Method.PRODUCT_ELSA
    r, i, j = np.unravel_index(np.argmax(np.abs(vol.voxels)),
                               vol.voxels.shape)
    # default scene: one point at (5, 5) deg on the half-degree-offset grid
    assert abs(vol.grid.azimuths_deg[i] - 5.0) <= 0.5
    assert abs(vol.grid.elevations_deg[j] - 5.0) <= 0.5

    assert run(capsys, "segment", "--in", sbvl, "--out", mask)[0] == 0
    seg = sb.read_mask(mask, grid=vol.grid)
    assert seg.mask.shape == vol.voxels.shape and seg.mask.any()

    assert run(capsys, "scanconvert", "--in", sbvl, "--out", sbcv,
               "--dims", "24", "24", "8")[0] == 0
    cart = sb.read_cartesian(sbcv)
    assert cart.values.shape == (24, 24, 8)

    assert run(capsys, "project", "--in", sbcv, "--out", pgm)[0] == 0
    img = sb.read_pgm(pgm)
    assert img.dtype == np.uint8 and img.max() == 255


def test_beamform_das_on_perimeter_fails_with_stage_name(tmp_path, capsys):
    sbcd = str(tmp_path / "chan.sbcd")
    run(capsys, "synth", "--out", sbcd)
    rc, _, err = run(capsys, "beamform", "--in", sbcd,
                     "--out", str(tmp_path / "v.sbvl"), "--method", "das")
    assert rc == 1
    assert err.startswith("error in stage beamform:")


def test_beamform_rejects_compare_mode(tmp_path, capsys):
    sbcd = str(tmp_path / "chan.sbcd")
    run(capsys, "synth", "--out", sbcd)
    cfg = write_config(tmp_path, {"method": {"name": "compare"}})
    rc, _, err = run(capsys, "beamform", "--config", cfg, "--in", sbcd,
                     "--out", str(tmp_path / "v.sbvl"))
    assert rc == 1
    assert "pipeline mode" in err


def test_project_rejects_unknown_magic(tmp_path, capsys):
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"XXXX" + b"\0" * 64)
    rc, _, err = run(capsys, "project", "--in", str(junk),
                     "--out", str(tmp_path / "o.pgm"))
    assert rc == 1
    assert "neither SBCV nor SBVL" in err


# --- psf ------------------------------------------------------------------


def test_psf_writes_pattern_and_metrics(tmp_path, capsys):
    pat = tmp_path / "pattern.csv"
    met = tmp_path / "metrics.csv"
    rc, _, err = run(capsys, "psf", "--kind", "ELSA", "--span-deg", "16",
                     "--step-deg", "0.2", "--pattern-out", str(pat),
                     "--metrics-out", str(met))
    assert rc == 0

    lines = pat.read_text().splitlines()
    assert lines[0] == "angle_deg,value_db"
    assert len(lines) == 1 + 81                   # 16 deg span at 0.2 deg
    values = np.array([float(l.split(",")[1]) for l in lines[1:]])
    assert values.max() == 0.0                    # renormalized peak

    header, row = met.read_text().splitlines()
    assert header == "array_kind,method,mlw_az_deg,mlw_el_deg,psll_db"
    kind, method, mlw_az, mlw_el, psll = row.split(",")
    assert kind == "ELSA" and method == "PRODUCT_ELSA"
    assert 2.0 < float(mlw_az) < 4.0
    assert float(psll) < -5.0

    assert "angular resolution: 4.775 deg exact (5.000 deg by 60*lambda/D)" in err
    assert "along-track at r0: 2.5000 m" in err
    assert "pulse-echo convention c/(2 df)" in err


# --- bench ----------------------------------------------------------------


def test_bench_reports_counts_and_median(capsys):
    rc, out, err = run(capsys, "bench", "--method", "proposed",
                       "--reps", "3", "--seed", "1")
    assert rc == 0
    header, row = out.splitlines()
    assert header == OPCOUNT_HEADER
    cells = row.split(",")
    assert cells[0] == "proposed"
    assert cells[7] == "864000"                   # interpolated op total
    assert float(cells[8]) > 0.0
    assert "median" in err and "RECT_PERIMETER 24x24" in err


# --- pipeline -------------------------------------------------------------


def test_pipeline_rerun_is_byte_identical(tmp_path, capsys):
    cfg = write_config(tmp_path, {"scene": {"snr_db": 10.0}})
    dirs = [tmp_path / "a", tmp_path / "b"]
    names = None
    for d in dirs:
        rc, _, _ = run(capsys, "pipeline", "--config", cfg, "--seed", "42",
                       "--outdir", str(d))
        assert rc == 0
        produced = sorted(p.name for p in d.iterdir())
        assert names in (None, produced)
        names = produced
    assert "volume.sbvl" in names and "mask.bin.json" in names
    for name in names:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()


def test_pipeline_compare_mode_emits_resolvability_report(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "method": {"name": "compare"},
        "scene": {"scatterers": [
            {"r0_m": 30.0, "alpha_deg": 5.0, "beta_deg": 5.0},
            {"r0_m": 30.0, "alpha_deg": 10.0, "beta_deg": 10.0},
        ]},
    })
    outdir = tmp_path / "cmp"
    rc, _, _ = run(capsys, "pipeline", "--config", cfg,
                   "--outdir", str(outdir))
    assert rc == 0
    assert (outdir / "resolvability.csv").read_text() == \
        "method,resolvable\ncm,0\npm,1\n"
    cm = sb.read_volume(str(outdir / "volume_cm.sbvl"))
    pm = sb.read_volume(str(outdir / "volume_pm.sbvl"))
    assert cm.method is sb.Method.DAS_URA
    assert pm.method is sb.Method.PRODUCT_ELSA


def test_pipeline_failure_names_stage(tmp_path, capsys):
    # URA cannot feed the product beamformer: dies in stage "beamform"
    cfg = write_config(tmp_path, {"array": {"kind": "URA"}})
    rc, _, err = run(capsys, "pipeline", "--config", cfg,
                     "--outdir", str(tmp_path / "out"))
    assert rc == 1
    assert err.startswith("error in stage beamform:")
