"""Command-line interface.

Subcommands: synth, beamform, psf, opcount, bench, segment, scanconvert,
project, pipeline. Exit codes: 0 success, 1 stage failure (diagnostic names
the stage on stderr), 2 usage errors. Any stage that draws random numbers
requires --seed so reruns are byte-identical.
"""

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import analysis, beamform, complexity, io_formats, postproc, signal
from .config import RunConfig
from .errors import InvalidArgumentError, SonobeamError
from .geometry import ArrayKind, build_array

_OPCOUNT_COLUMNS = ("method", "N", "Nb", "L", "additions", "multiplications",
                    "sqrts", "total", "median_seconds")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # full precision; plain digits for numpy scalars too
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _write_csv(path, header, rows):
    def dump(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])

    if path in (None, "-"):
        dump(sys.stdout)
    else:
        with open(path, "w", newline="") as f:
            dump(f)


def _load_config(args):
    cfg_path = getattr(args, "config", None)
    return RunConfig.load(cfg_path) if cfg_path else RunConfig()


def _require_seed(cfg, args):
    if cfg["scene"]["snr_db"] is not None and args.seed is None:
        raise _UsageError("--seed is required when scene.snr_db adds noise")


class _UsageError(Exception):
    pass


def _synth_from_config(cfg, seed):
    geom = cfg.build_geometry()
    pulse = cfg.build_pulse()
    scene = cfg["scene"]
    t0, duration = cfg.record_window()
    return signal.synth_channel_data(
        geom, cfg.scatterers(), pulse, cfg["medium"]["c_mps"],
        scene["fs_hz"], duration, scene["snr_db"], t0=t0, seed=seed,
        spreading_exponent=scene["spreading_exponent"],
    )


def _condition(cd, cfg):
    """Matched filter + TGC per config; mirrors the pipeline stage order."""
    scene = cfg["scene"]
    if scene["apply_matched_filter"]:
        cd = signal.matched_filter(cd, cfg.build_pulse())
    t = scene["tgc"]
    if t["enabled"]:
        cd = signal.tgc(cd, cfg["medium"]["c_mps"], t["exponent"],
                        t["absorption_db_per_m"], t["max_gain_db"])
    return cd


def _run_beamformer(name, cd, grid, cfg):
    method = cfg["method"]
    focus = (beamform.FocusMode.FARFIELD if method["focus"] == "farfield"
             else beamform.FocusMode.NEARFIELD)
    gate = method["gate"]
    if name == "das":
        return beamform.das_volume(cd, cd.geometry, grid, gate=gate,
                                   focus_mode=focus)
    if name == "proposed":
        return beamform.product_beamform(cd, cd.geometry, grid, gate=gate,
                                         focus_mode=focus)
    if name == "dm":
        return beamform.dm_volume(cd, cd.geometry, grid,
                                  block_len_L=method["block_len"],
                                  focus_mode=focus, gate=gate)
    raise InvalidArgumentError(f"unknown beamforming method {name!r}")


# --- subcommand handlers ------------------------------------------------


def _cmd_synth(args):
    cfg = _load_config(args)
    _require_seed(cfg, args)
    cd = _synth_from_config(cfg, args.seed)
    io_formats.write_channel_data(cd, args.out)
    print(f"wrote {args.out} ({cd.geometry.num_elements} channels x "
          f"{cd.num_samples} samples)")
    return 0


def _cmd_beamform(args):
    cfg = _load_config(args)
    cd = io_formats.read_channel_data(getattr(args, "in"))
    cd = _condition(cd, cfg)
    name = args.method or cfg["method"]["name"]
    if name == "compare":
        raise InvalidArgumentError(
            "method 'compare' is a pipeline mode; pick das, proposed, or dm"
        )
    vol = _run_beamformer(name, cd, cfg.build_grid(), cfg)
    io_formats.write_volume(vol, args.out)
    print(f"wrote {args.out} ({vol.method.value}, "
          f"{vol.voxels.shape[0]}x{vol.voxels.shape[1]}x{vol.voxels.shape[2]})")
    return 0


def _cmd_psf(args):
    kind = ArrayKind(args.kind)
    geom = build_array(kind, args.m, args.n,
                       args.spacing_m or (args.c_mps / args.fc_hz) / 2.0)
    method = args.method or ("das" if kind is ArrayKind.URA else "proposed")
    pulse = signal.make_pulse(args.fc_hz, args.cycles, args.fs_hz)
    point = signal.Scatterer(r0=args.r0_m,
                             alpha=math.radians(args.alpha_deg),
                             beta=math.radians(args.beta_deg))
    cut_kw = dict(span_deg=args.span_deg, step_deg=args.step_deg,
                  pulse=pulse, c=args.c_mps, fs=args.fs_hz)
    if args.pattern_out:
        bp = analysis.psf_cut(geom, method, point, analysis.CutAxis.AZIMUTH,
                              **cut_kw)
        _write_csv(args.pattern_out, ("angle_deg", "value_db"),
                   zip(bp.angles_deg, bp.values_db))
    metrics = analysis.psf_metrics(geom, method, point, args.span_deg,
                                   args.step_deg, pulse=pulse, c=args.c_mps,
                                   fs=args.fs_hz)
    _write_csv(args.metrics_out,
               ("array_kind", "method", "mlw_az_deg", "mlw_el_deg", "psll_db"),
               [(kind.value, metrics.method.value, metrics.mlw_az_deg,
                 metrics.mlw_el_deg, metrics.psll_db)])

    lam = args.c_mps / args.fc_hz
    ares = analysis.angular_resolution(lam, geom.aperture_D)
    bw = signal.pulse_bandwidth(pulse)
    print(f"angular resolution: {ares.exact_deg:.3f} deg exact "
          f"({ares.approx_deg:.3f} deg by 60*lambda/D)", file=sys.stderr)
    print(f"along-track at r0: "
          f"{analysis.along_track_resolution(args.r0_m, ares.exact_deg):.4f} m",
          file=sys.stderr)
    print(f"range resolution at measured -3 dB bandwidth {bw:.0f} Hz: "
          f"{analysis.range_resolution(args.c_mps, bw) * 1000:.2f} mm as "
          f"printed (c/df); pulse-echo convention c/(2 df) gives "
          f"{analysis.range_resolution_pulse_echo(args.c_mps, bw) * 1000:.2f} "
          f"mm -- quoted ~3 mm figures match the latter", file=sys.stderr)
    return 0


def _cmd_opcount(args):
    method = args.method_pos or args.method
    if method is None:
        raise _UsageError("opcount needs a method (positional or --method)")
    n = args.n_pos if args.n_pos is not None else args.n
    nb = args.nb_pos if args.nb_pos is not None else args.nb
    if n is None or nb is None:
        raise _UsageError("opcount needs N and Nb (positional or --n/--nb)")
    interp = args.interp == "linear"
    method = method.lower()
    if method == "das":
        rep = complexity.opcount_das(n, nb, interp)
    elif method == "proposed":
        rep = complexity.opcount_proposed(n, nb, interp)
    elif method == "dm":
        rep = complexity.opcount_dm(n, nb, args.block_len)
    elif method == "czt":
        rep = complexity.opcount_czt(n, nb, args.block_len)
    else:
        raise _UsageError(f"unknown opcount method {method!r}")
    _write_csv(args.out, _OPCOUNT_COLUMNS,
               [(rep.method.value, rep.N, rep.Nb, rep.L, rep.additions,
                 rep.multiplications, rep.sqrts, rep.total, None)])
    note = rep.reference_note()
    if note:
        print(note, file=sys.stderr)
    if rep.method in (complexity.OpMethod.DM, complexity.OpMethod.CZT) \
            and (n, nb) == (24, 60):
        target = complexity.REFERENCE_TOTALS[rep.method]
        L, rel = complexity.best_fit_block_length(rep.method, n, nb, target)
        print(f"best-fit block length vs published total: L={L} "
              f"({rel:+.1%})", file=sys.stderr)
    return 0


def _cmd_bench(args):
    cfg = _load_config(args)
    _require_seed(cfg, args)
    cd = _condition(_synth_from_config(cfg, args.seed), cfg)
    grid = cfg.build_grid()
    report = complexity.benchmark(args.method, cd, grid, args.reps,
                                  seed=args.seed,
                                  gate=cfg["method"]["gate"])
    geom = cd.geometry
    interp = True
    if args.method == "das":
        counts = complexity.opcount_das(geom.N, grid.Nb, interp)
    elif args.method == "proposed":
        counts = complexity.opcount_proposed(geom.N, grid.Nb, interp)
    else:
        counts = complexity.opcount_dm(geom.N, grid.Nb,
                                       cfg["method"]["block_len"])
    _write_csv(args.out, _OPCOUNT_COLUMNS,
               [(report.method, counts.N, counts.Nb, counts.L,
                 counts.additions, counts.multiplications, counts.sqrts,
                 counts.total, report.median_seconds)])
    print(f"{report.method}: median {report.median_seconds:.4f} s over "
          f"{report.repetitions} runs ({report.scene})", file=sys.stderr)
    return 0


def _cmd_segment(args):
    vol = io_formats.read_volume(getattr(args, "in"))
    seg = postproc.kmeans_segment(vol, k=args.k, seed=args.seed,
                                  max_iter=args.max_iter, tol=args.tol)
    io_formats.write_mask(seg, args.out)
    print(f"wrote {args.out} (+.json), {int(seg.mask.sum())} voxels selected")
    return 0


def _cmd_scanconvert(args):
    vol = io_formats.read_volume(getattr(args, "in"))
    if args.origin is not None and args.pitch is not None:
        origin, pitch = tuple(args.origin), tuple(args.pitch)
        dims = tuple(args.dims)
    else:
        origin, pitch, dims = postproc.default_cartesian_spec(
            vol.grid, *args.dims)
    cart = postproc.scan_convert(vol, origin, pitch, dims)
    io_formats.write_cartesian(cart, args.out)
    print(f"wrote {args.out} ({dims[0]}x{dims[1]}x{dims[2]})")
    return 0


def _cmd_project(args):
    path = getattr(args, "in")
    with open(path, "rb") as f:
        magic = f.read(4)
    if magic == b"SBCV":
        vol = io_formats.read_cartesian(path)
    elif magic == b"SBVL":
        vol = io_formats.read_volume(path)
    else:
        raise InvalidArgumentError(f"{path} is neither SBCV nor SBVL")
    img = postproc.project_max(vol, args.plane)
    io_formats.write_pgm(postproc.to_db_image(img, args.dynamic_range_db),
                         args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_pipeline(args):
    stage = "config"
    try:
        cfg = _load_config(args)
        _require_seed(cfg, args)
        outdir = args.outdir
        os.makedirs(outdir, exist_ok=True)
        paths = []

        def emit(name, writer):
            path = os.path.join(outdir, name)
            writer(path)
            paths.append(path)
            return path

        stage = "synth"
        cd_raw = _synth_from_config(cfg, args.seed)
        emit("channel_raw.sbcd",
             lambda p: io_formats.write_channel_data(cd_raw, p))

        cd = cd_raw
        scene = cfg["scene"]
        if scene["apply_matched_filter"]:
            stage = "matched-filter"
            cd = signal.matched_filter(cd, cfg.build_pulse())
            emit("channel_mf.sbcd",
                 lambda p: io_formats.write_channel_data(cd, p))
        if scene["tgc"]["enabled"]:
            stage = "tgc"
            t = scene["tgc"]
            cd = signal.tgc(cd, cfg["medium"]["c_mps"], t["exponent"],
                            t["absorption_db_per_m"], t["max_gain_db"])
            emit("channel_tgc.sbcd",
                 lambda p: io_formats.write_channel_data(cd, p))

        stage = "beamform"
        grid = cfg.build_grid()
        name = cfg["method"]["name"]
        if name == "compare":
            # CM on the URA, PM on the product-capable kind, same scene
            cm_geom = build_array(ArrayKind.URA, cfg["array"]["m"],
                                  cfg["array"]["n"], cfg.spacing())
            pm_geom = build_array(ArrayKind(cfg["method"]["compare_pm_kind"]),
                                  cfg["array"]["m"], cfg["array"]["n"],
                                  cfg.spacing())
            volumes = {}
            for label, geom, mname in (("cm", cm_geom, "das"),
                                       ("pm", pm_geom, "proposed")):
                t0, duration = cfg.record_window()
                cdl = signal.synth_channel_data(
                    geom, cfg.scatterers(), cfg.build_pulse(),
                    cfg["medium"]["c_mps"], scene["fs_hz"], duration,
                    scene["snr_db"], t0=t0, seed=args.seed,
                    spreading_exponent=scene["spreading_exponent"])
                cdl = _condition(cdl, cfg)
                voll = _run_beamformer(mname, cdl, grid, cfg)
                emit(f"volume_{label}.sbvl",
                     lambda p, v=voll: io_formats.write_volume(v, p))
                volumes[label] = voll
            scats = cfg.scatterers()
            if len(scats) >= 2:
                stage = "resolvability"
                thr = cfg["postproc"]["resolvability_threshold_db"]
                rows = [(label, analysis.resolvable(volumes[label], scats[0],
                                                    scats[1], thr))
                        for label in ("cm", "pm")]
                emit("resolvability.csv",
                     lambda p: _write_csv(p, ("method", "resolvable"), rows))
            vol = volumes["pm"]
        else:
            vol = _run_beamformer(name, cd, grid, cfg)
            emit("volume.sbvl", lambda p: io_formats.write_volume(vol, p))

        pp = cfg["postproc"]
        stage = "segment"
        seg = postproc.kmeans_segment(vol, k=pp["k"], seed=args.seed,
                                      max_iter=pp["max_iter"], tol=pp["tol"])
        emit("mask.bin", lambda p: io_formats.write_mask(seg, p))

        stage = "scanconvert"
        origin, pitch, dims = postproc.default_cartesian_spec(
            vol.grid, *pp["cartesian_dims"])
        cart = postproc.scan_convert(vol, origin, pitch, dims)
        emit("cartesian.sbcv", lambda p: io_formats.write_cartesian(cart, p))

        stage = "project"
        for plane in pp["planes"]:
            img = postproc.to_db_image(postproc.project_max(cart, plane),
                                       pp["dynamic_range_db"])
            emit(f"projection_{plane.lower()}.pgm",
                 lambda p, i=img: io_formats.write_pgm(i, p))

        for p in paths:
            print(f"wrote {p}")
        return 0
    except (SonobeamError, OSError) as exc:
        print(f"error in stage {stage}: {exc}", file=sys.stderr)
        return 1


_HANDLERS = {}


def _register(sub, name, help_text, configure, handler):
    p = sub.add_parser(name, help=help_text, description=help_text)
    configure(p)
    _HANDLERS[name] = handler
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sonobeam",
        description="3D sonar imaging toolkit: synthesis, beamforming, "
                    "PSF analysis, and display post-processing.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="subcommand")

    def cfg_arg(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (required when noise is enabled)")

    def c_synth(p):
        cfg_arg(p)
        p.add_argument("--out", required=True, help="output .sbcd path")
    _register(sub, "synth", "Synthesize channel data from a scene config",
              c_synth, _cmd_synth)

    def c_beamform(p):
        cfg_arg(p)
        p.add_argument("--in", required=True, help="input .sbcd path")
        p.add_argument("--out", required=True, help="output .sbvl path")
        p.add_argument("--method", choices=("das", "proposed", "dm"))
    _register(sub, "beamform",
              "Condition channel data and reconstruct a beam volume",
              c_beamform, _cmd_beamform)

    def c_psf(p):
        p.add_argument("--kind", default="ELSA",
                       choices=[k.value for k in ArrayKind])
        p.add_argument("--method", choices=("das", "proposed"))
        p.add_argument("--m", type=int, default=24)
        p.add_argument("--n", type=int, default=24)
        p.add_argument("--spacing-m", type=float, default=None)
        p.add_argument("--alpha-deg", type=float, default=5.0)
        p.add_argument("--beta-deg", type=float, default=5.0)
        p.add_argument("--r0-m", type=float, default=30.0)
        p.add_argument("--span-deg", type=float, default=40.0)
        p.add_argument("--step-deg", type=float, default=0.1)
        p.add_argument("--fc-hz", type=float, default=500e3)
        p.add_argument("--cycles", type=float, default=3)
        p.add_argument("--fs-hz", type=float, default=10e6)
        p.add_argument("--c-mps", type=float, default=1500.0)
        p.add_argument("--pattern-out", help="azimuth-cut CSV ('-' = stdout)")
        p.add_argument("--metrics-out", default="-",
                       help="metrics CSV ('-' = stdout)")
    _register(sub, "psf", "Measure the point spread function of an array",
              c_psf, _cmd_psf)

    def c_opcount(p):
        p.add_argument("method_pos", nargs="?", metavar="method",
                       help="das | proposed | dm | czt")
        p.add_argument("n_pos", nargs="?", type=int, metavar="N")
        p.add_argument("nb_pos", nargs="?", type=int, metavar="Nb")
        p.add_argument("--method")
        p.add_argument("--n", type=int)
        p.add_argument("--nb", type=int)
        p.add_argument("--interp", choices=("linear", "none"),
                       default="none")
        p.add_argument("--block-len", type=int, default=1024,
                       help="L for dm/czt")
        p.add_argument("--out", default="-", help="CSV path ('-' = stdout)")
    _register(sub, "opcount", "Analytic operation counts per method",
              c_opcount, _cmd_opcount)

    def c_bench(p):
        cfg_arg(p)
        p.add_argument("--method", required=True,
                       choices=("das", "proposed", "dm"))
        p.add_argument("--reps", type=int, default=3)
        p.add_argument("--out", default="-", help="CSV path ('-' = stdout)")
    _register(sub, "bench", "Wall-clock benchmark of a beamformer",
              c_bench, _cmd_bench)

    def c_segment(p):
        p.add_argument("--in", required=True, help="input .sbvl path")
        p.add_argument("--out", required=True, help="output mask path")
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--max-iter", type=int, default=100)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--seed", type=int, default=None)
    _register(sub, "segment", "K-means segmentation of a beam volume",
              c_segment, _cmd_segment)

    def c_scanconvert(p):
        p.add_argument("--in", required=True, help="input .sbvl path")
        p.add_argument("--out", required=True, help="output .sbcv path")
        p.add_argument("--dims", type=int, nargs=3, default=[64, 64, 64],
                       metavar=("NX", "NY", "NZ"))
        p.add_argument("--origin", type=float, nargs=3, default=None,
                       metavar=("X0", "Y0", "Z0"))
        p.add_argument("--pitch", type=float, nargs=3, default=None,
                       metavar=("PX", "PY", "PZ"))
    _register(sub, "scanconvert",
              "Resample a polar volume onto a Cartesian grid",
              c_scanconvert, _cmd_scanconvert)

    def c_project(p):
        p.add_argument("--in", required=True, help=".sbcv or .sbvl path")
        p.add_argument("--out", required=True, help="output .pgm path")
        p.add_argument("--plane", default="XY", choices=("XY", "XZ", "YZ"))
        p.add_argument("--dynamic-range-db", type=float, default=40.0)
    _register(sub, "project", "Max projection of a volume to a PGM image",
              c_project, _cmd_project)

    def c_pipeline(p):
        cfg_arg(p)
        p.add_argument("--outdir", required=True,
                       help="directory for all stage artifacts")
    _register(sub, "pipeline",
              "synth -> matched filter -> TGC -> beamform -> segment -> "
              "scan-convert -> project, one artifact per stage",
              c_pipeline, _cmd_pipeline)

    return parser


def cli_dispatch(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = _HANDLERS[args.command]
    try:
        return handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (SonobeamError, OSError) as exc:
        print(f"error in stage {args.command}: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    entry()
