"""Run configuration: a strict JSON document with fixed sections.

Unknown keys are rejected (silent typos are worse than loud ones), and all
physical quantities carry their unit in the key name. Every key has a
desk-scale default, so a minimal config can be {}.
"""

import copy
import json
import math

from .errors import ConfigError
from .geometry import ArrayKind, build_array, build_imaging_grid
from .signal import Scatterer, make_pulse

DEFAULTS = {
    "array": {
        "kind": "RECT_PERIMETER",   # product-capable, matches default method
        "m": 24,
        "n": 24,
        "spacing_m": None,          # None -> half the carrier wavelength
    },
    "pulse": {
        "fc_hz": 500e3,
        "cycles": 3,
        "window": "hann",
    },
    "medium": {
        "c_mps": 1500.0,
    },
    "scene": {
        "fs_hz": 10e6,
        "t0_s": None,               # None -> auto margin before first echo
        "duration_s": None,         # None -> auto window around echoes
        "snr_db": None,             # None -> noiseless
        "spreading_exponent": 2.0,
        "apply_matched_filter": True,
        "tgc": {
            "enabled": False,
            "exponent": 2.0,
            "absorption_db_per_m": 0.0,
            "max_gain_db": 80.0,
        },
        "scatterers": [
            {"r0_m": 30.0, "alpha_deg": 5.0, "beta_deg": 5.0,
             "reflectivity": 1.0},
        ],
    },
    "grid": {
        "az_span_deg": 59.0,        # symmetric about broadside, 1 deg pitch
        "el_span_deg": 59.0,
        "mb": 60,
        "nb": 60,
        "ranges_m": [30.0],
    },
    "method": {
        "name": "proposed",         # das | proposed | dm | compare
        "focus": "farfield",
        "gate": 2,
        "block_len": 1024,
        "compare_pm_kind": "ELSA",  # PM geometry when name == "compare"
    },
    "postproc": {
        "k": 3,
        "max_iter": 100,
        "tol": 1e-6,
        "cartesian_dims": [64, 64, 64],
        "dynamic_range_db": 40.0,
        "planes": ["XY"],
        "resolvability_threshold_db": -6.0,
    },
    "bench": {
        "repetitions": 3,
    },
}

_MARGIN_SAMPLES = 600  # record head/tail around echoes, keeps sample alignment


def _merge(defaults, user, path):
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        if key not in defaults:
            raise ConfigError(f"unknown key {path + key!r}")
        if isinstance(defaults[key], dict) and key != "scatterers":
            out[key] = _merge(defaults[key], value, path + key + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


_SCATTERER_KEYS = {"r0_m", "alpha_deg", "beta_deg", "reflectivity"}


class RunConfig:
    """Validated, fully defaulted configuration for one experiment run."""

    SECTIONS = tuple(DEFAULTS)

    def __init__(self, document=None):
        document = {} if document is None else document
        if not isinstance(document, dict):
            raise ConfigError("config root must be a JSON object")
        for key in document:
            if key not in DEFAULTS:
                raise ConfigError(f"unknown section {key!r}")
        merged = {}
        for section, defaults in DEFAULTS.items():
            merged[section] = _merge(defaults, document.get(section, {}),
                                     section + ".")
        self._sections = merged
        self._validate()

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls(doc)

    def __getitem__(self, section):
        return self._sections[section]

    def as_dict(self):
        return copy.deepcopy(self._sections)

    def _validate(self):
        arr = self["array"]
        try:
            ArrayKind(arr["kind"])
        except ValueError:
            raise ConfigError(f"array.kind {arr['kind']!r} is not a known kind")
        for key in ("m", "n"):
            if not isinstance(arr[key], int) or arr[key] < 2:
                raise ConfigError(f"array.{key} must be an integer >= 2")
        if arr["spacing_m"] is not None and not arr["spacing_m"] > 0:
            raise ConfigError("array.spacing_m must be positive")
        pulse = self["pulse"]
        if not pulse["fc_hz"] > 0 or not pulse["cycles"] > 0:
            raise ConfigError("pulse.fc_hz and pulse.cycles must be positive")
        if pulse["window"] not in ("hann", "rect"):
            raise ConfigError("pulse.window must be 'hann' or 'rect'")
        if not self["medium"]["c_mps"] > 0:
            raise ConfigError("medium.c_mps must be positive")
        scene = self["scene"]
        if not scene["fs_hz"] > 0:
            raise ConfigError("scene.fs_hz must be positive")
        if not scene["scatterers"]:
            raise ConfigError("scene.scatterers must be non-empty")
        for i, s in enumerate(scene["scatterers"]):
            if not isinstance(s, dict):
                raise ConfigError(f"scene.scatterers[{i}] must be an object")
            unknown = set(s) - _SCATTERER_KEYS
            if unknown:
                raise ConfigError(
                    f"unknown key scene.scatterers[{i}].{sorted(unknown)[0]}"
                )
            if "r0_m" not in s:
                raise ConfigError(f"scene.scatterers[{i}].r0_m is required")
        grid = self["grid"]
        for key in ("mb", "nb"):
            if not isinstance(grid[key], int) or grid[key] < 1:
                raise ConfigError(f"grid.{key} must be an integer >= 1")
        for key in ("az_span_deg", "el_span_deg"):
            if not 0 <= grid[key] < 180:
                raise ConfigError(f"grid.{key} must be in [0, 180)")
        if not grid["ranges_m"]:
            raise ConfigError("grid.ranges_m must be non-empty")
        method = self["method"]
        if method["name"] not in ("das", "proposed", "dm", "compare"):
            raise ConfigError(
                "method.name must be das, proposed, dm, or compare"
            )
        if method["focus"] not in ("farfield", "nearfield"):
            raise ConfigError("method.focus must be farfield or nearfield")
        if not isinstance(method["gate"], int) or method["gate"] < 0:
            raise ConfigError("method.gate must be an integer >= 0")
        if self["bench"]["repetitions"] < 3:
            raise ConfigError("bench.repetitions must be >= 3")
        pp = self["postproc"]
        if pp["k"] < 2:
            raise ConfigError("postproc.k must be >= 2")
        dims = pp["cartesian_dims"]
        if len(dims) != 3 or any(not isinstance(d, int) or d < 1 for d in dims):
            raise ConfigError("postproc.cartesian_dims must be 3 integers >= 1")
        for plane in pp["planes"]:
            if plane not in ("XY", "XZ", "YZ"):
                raise ConfigError(f"postproc.planes entry {plane!r} invalid")

    # --- constructors for domain objects -------------------------------

    def wavelength(self):
        return self["medium"]["c_mps"] / self["pulse"]["fc_hz"]

    def spacing(self):
        s = self["array"]["spacing_m"]
        return float(s) if s is not None else self.wavelength() / 2.0

    def build_geometry(self, kind=None):
        arr = self["array"]
        kind = ArrayKind(kind or arr["kind"])
        return build_array(kind, arr["m"], arr["n"], self.spacing())

    def build_pulse(self):
        p = self["pulse"]
        return make_pulse(p["fc_hz"], p["cycles"], self["scene"]["fs_hz"],
                          window=p["window"])

    def build_grid(self):
        g = self["grid"]
        return build_imaging_grid(
            g["az_span_deg"], g["el_span_deg"], g["mb"], g["nb"],
            [float(r) for r in g["ranges_m"]],
        )

    def scatterers(self):
        out = []
        for s in self["scene"]["scatterers"]:
            out.append(Scatterer(
                r0=float(s["r0_m"]),
                alpha=math.radians(float(s.get("alpha_deg", 0.0))),
                beta=math.radians(float(s.get("beta_deg", 0.0))),
                reflectivity=float(s.get("reflectivity", 1.0)),
            ))
        return out

    def record_window(self):
        """(t0, duration) covering every echo and every grid-range lookup,
        with a sample-aligned margin on both ends."""
        scene = self["scene"]
        fs = scene["fs_hz"]
        c = self["medium"]["c_mps"]
        if scene["t0_s"] is not None and scene["duration_s"] is not None:
            return float(scene["t0_s"]), float(scene["duration_s"])
        times = [2.0 * float(s["r0_m"]) / c for s in scene["scatterers"]]
        # the beamformer samples the record at every grid range too
        times += [2.0 * float(r) / c for r in self["grid"]["ranges_m"]]
        t_first, t_last = min(times), max(times)
        t0 = scene["t0_s"]
        if t0 is None:
            t0 = t_first - _MARGIN_SAMPLES / fs
        duration = scene["duration_s"]
        if duration is None:
            duration = (t_last - t0) + _MARGIN_SAMPLES / fs
        return float(t0), float(duration)
