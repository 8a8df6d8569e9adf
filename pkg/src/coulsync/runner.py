"""Scenario and sweep execution: config files, presets, CSV output, manifests,
and gnuplot script emission."""

import dataclasses
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .classical import ClassicalState, phase_locking_metric
from .errors import ConfigError, InsufficientDataError, IntegrationDivergedError
from .fluctuations import integrate_coupled
from .measures import PHI_MODES, sync_series
from .params import PARAM_LAYOUT, SystemParams

FMT = "%.17g"  # full float64 round-trip precision in CSV output


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved single-run configuration (all rates in units of omega1)."""

    params: SystemParams = field(default_factory=SystemParams)
    t_end: float = 2000.0
    dt: float = 1e-3
    decimate: int = 100
    initial_classical: tuple = (0.0,) * 8
    covariance_init: str = "thermal-vacuum"
    phi_mode: str = "classical-diff"
    phi_fixed: float = 0.0
    steady_fraction: float = 0.5
    lock_threshold: float = 0.1
    out_dir: str = "out"
    seed: int = 0  # reserved; the dynamics are deterministic

    def flat_dict(self) -> dict:
        d = {k: getattr(self.params, k) for k in PARAM_LAYOUT}
        for f in fields(self):
            if f.name == "params":
                continue
            v = getattr(self, f.name)
            d[f.name] = list(v) if isinstance(v, tuple) else v
        return d


@dataclass(frozen=True)
class SweepConfig:
    """One- or two-parameter grid sweep around a base scenario."""

    base: ScenarioConfig
    sweep_params: tuple
    sweep_values: tuple  # tuple of value lists, one per swept parameter
    workers: int = 1

    def points(self):
        """Yield (label_dict, ScenarioConfig) for every grid point."""
        for combo in itertools.product(*self.sweep_values):
            overrides = dict(zip(self.sweep_params, combo))
            params = dataclasses.replace(self.base.params, **overrides)
            yield overrides, dataclasses.replace(self.base, params=params)


_SCENARIO_KEYS = {
    "t_end": float, "dt": float, "decimate": int,
    "covariance_init": str, "phi_mode": str, "phi_fixed": float,
    "steady_fraction": float, "lock_threshold": float,
    "out_dir": str, "seed": int,
}
_SWEEP_KEYS = {"sweep_param": str, "sweep_values": list,
               "sweep_param2": str, "sweep_values2": list, "workers": int}


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_lines(text: str) -> dict:
    """Parse a flat `key = value` document; raises ConfigError with line/column."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}, column 1: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}, column 1: empty key")
        if not value:
            col = raw.index("=") + 2
            raise ConfigError(f"line {lineno}, column {col}: empty value for '{key}'")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        if "," in value:
            out[key] = [_parse_scalar(v.strip()) for v in value.split(",")]
        else:
            out[key] = _parse_scalar(value)
    return out


def config_from_dict(raw: dict):
    """Build a ScenarioConfig or SweepConfig from flat key/value pairs."""
    raw = dict(raw)
    param_kwargs = {}
    for name in PARAM_LAYOUT:
        if name in raw:
            v = raw.pop(name)
            if not isinstance(v, (int, float)):
                raise ConfigError(f"parameter '{name}' must be a number, got {v!r}")
            param_kwargs[name] = float(v)

    scen_kwargs = {}
    for name, cast in _SCENARIO_KEYS.items():
        if name in raw:
            v = raw.pop(name)
            try:
                scen_kwargs[name] = cast(v)
            except (TypeError, ValueError):
                raise ConfigError(f"key '{name}' has invalid value {v!r}") from None
    if "initial_classical" in raw:
        v = raw.pop("initial_classical")
        if not isinstance(v, list) or len(v) != 8:
            raise ConfigError("initial_classical must be a list of 8 numbers")
        scen_kwargs["initial_classical"] = tuple(float(x) for x in v)

    sweep_kwargs = {k: raw.pop(k) for k in list(_SWEEP_KEYS) if k in raw}

    if raw:
        bad = sorted(raw)[0]
        raise ConfigError(f"unknown key '{bad}'")

    try:
        params = SystemParams(**param_kwargs)
        cfg = ScenarioConfig(params=params, **scen_kwargs)
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.phi_mode not in PHI_MODES:
        raise ConfigError(f"key 'phi_mode' must be one of {PHI_MODES}")
    if cfg.covariance_init != "thermal-vacuum":
        raise ConfigError("key 'covariance_init' only supports 'thermal-vacuum'")
    if cfg.dt <= 0 or cfg.t_end <= 0 or cfg.decimate < 1:
        raise ConfigError("t_end, dt must be positive and decimate >= 1")

    if not sweep_kwargs:
        return cfg

    names, values = [], []
    for suffix in ("", "2"):
        pk, vk = "sweep_param" + suffix, "sweep_values" + suffix
        if pk in sweep_kwargs:
            name = sweep_kwargs[pk]
            if name not in PARAM_LAYOUT:
                raise ConfigError(f"key '{pk}': '{name}' is not a system parameter")
            vals = sweep_kwargs.get(vk)
            if vals is None:
                raise ConfigError(f"key '{vk}' is required with '{pk}'")
            if not isinstance(vals, list):
                vals = [vals]
            if not vals:
                raise ConfigError(f"key '{vk}' must be a nonempty list")
            names.append(name)
            values.append(tuple(float(v) for v in vals))
        elif vk in sweep_kwargs:
            raise ConfigError(f"key '{vk}' requires '{pk}'")
    if not names:
        raise ConfigError("sweep_values requires sweep_param")
    workers = int(sweep_kwargs.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return SweepConfig(
        base=cfg, sweep_params=tuple(names), sweep_values=tuple(values),
        workers=workers,
    )


def load_config(path: str):
    """Load and validate a scenario or sweep config from a key=value file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return config_from_dict(_parse_lines(text))


def default_config_text() -> str:
    """Documented defaults, in the accepted config-file syntax."""
    lines = ["# coulsync defaults (all rates in units of omega1)"]
    cfg = ScenarioConfig()
    for k, v in cfg.flat_dict().items():
        if isinstance(v, list):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


# Parameter sets transcribed from the figure captions of the driven
# two-cavity configuration. The shared base set is: omega2 = 1.005,
# delta_j = -omega_j, g = 1e-3, gamma_m = 1e-3, kappa = 0.15, J = 0.02,
# drive = 150, n_th = 0.
_BASE = dict(
    omega2=1.005, delta1=-1.0, delta2=-1.005, g1=1e-3, g2=1e-3,
    gamma_m1=1e-3, gamma_m2=1e-3, kappa1=0.15, kappa2=0.15,
    tunnel_j=0.02, drive1=150.0, drive2=150.0, n_th=0.0,
)

PRESETS = {
    "fig2a": {**_BASE, "chi_c": 0.4},
    "fig2c": {**_BASE, "chi_c": 0.0},
    "fig3a": {**_BASE, "chi_c": 0.4},
    "fig3b": {**_BASE, "chi_c": 0.0},
    "fig4": {**_BASE, "tunnel_j": 0.0, "chi_c": 0.6},
    "fig5": {**_BASE, "chi_c": 0.6},
    "fig6": {**_BASE, "chi_c": 0.0},
    "fig7": {**_BASE, "chi_c": 0.6},
    "vacuum-null": dict(
        omega2=1.0, delta1=0.0, delta2=0.0, g1=0.0, g2=0.0,
        gamma_m1=1e-3, gamma_m2=1e-3, kappa1=0.15, kappa2=0.15,
        tunnel_j=0.0, chi_c=0.0, drive1=0.0, drive2=0.0, n_th=0.0,
    ),
    "fig8sweep": {
        **_BASE,
        "sweep_param": "chi_c",
        "sweep_values": [0.0, 0.2, 0.4, 0.6],
    },
}


def preset_config(name: str):
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset '{name}'; available: {', '.join(sorted(PRESETS))}"
        )
    return config_from_dict(PRESETS[name])


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_time_s: float
    outputs: dict
    flags: dict
    kind: str = "scenario"

    def write(self, path: str):
        """Atomic JSON write (tmp file + rename)."""
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)

    @staticmethod
    def load(path: str) -> "RunManifest":
        with open(path) as fh:
            return RunManifest(**json.load(fh))


def _write_csv(path, header, columns):
    rows = np.column_stack(columns)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, rows, fmt=FMT, delimiter=",")


_UPPER = [(i, j) for i in range(8) for j in range(i, 8)]

CLASSICAL_HEADER = ["tau", "q1s", "p1s", "re_a1", "im_a1", "q2s", "p2s", "re_a2", "im_a2"]
SYNC_HEADER = ["tau", "S_c", "S_phi", "S_p", "phi1", "phi2",
               "dphi_unwrapped", "min_symplectic_eig"]
COVARIANCE_HEADER = ["tau"] + [f"v{i}{j}" for i, j in _UPPER]


def run_scenario(cfg: ScenarioConfig, out_dir: str | None = None) -> RunManifest:
    """Integrate one scenario and write classical/covariance/sync CSVs.

    On integrator divergence the partial outputs are retained and the
    manifest records the failure; the exception is re-raised after writing.
    """
    out = out_dir or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    t0 = time.monotonic()
    outputs = {}
    flags = {"diverged": False, "divergence_time": None,
             "locked": None, "n_physicality_warnings": None}
    manifest = RunManifest(
        config=cfg.flat_dict(), version=__version__, wall_time_s=0.0,
        outputs=outputs, flags=flags,
    )
    initial = ClassicalState.from_array(np.array(cfg.initial_classical))
    try:
        traj = integrate_coupled(
            cfg.params, initial_state=initial,
            t_end=cfg.t_end, dt=cfg.dt, decimate=cfg.decimate,
        )
    except IntegrationDivergedError as exc:
        flags["diverged"] = True
        flags["divergence_time"] = exc.time
        manifest.wall_time_s = time.monotonic() - t0
        manifest.write(os.path.join(out, "manifest.json"))
        raise

    series = sync_series(
        traj, phi_mode=cfg.phi_mode, phi_fixed=cfg.phi_fixed,
        steady_fraction=cfg.steady_fraction,
    )

    classical_csv = os.path.join(out, "classical.csv")
    _write_csv(
        classical_csv, CLASSICAL_HEADER,
        [traj.times] + [traj.classical.states[:, i] for i in range(8)],
    )
    outputs["classical_csv"] = classical_csv

    covariance_csv = os.path.join(out, "covariance.csv")
    _write_csv(
        covariance_csv, COVARIANCE_HEADER,
        [traj.times] + [traj.covariances[:, i, j] for i, j in _UPPER],
    )
    outputs["covariance_csv"] = covariance_csv

    sync_csv = os.path.join(out, "sync.csv")
    _write_csv(
        sync_csv, SYNC_HEADER,
        [series.times, series.s_c, series.s_phi, series.s_p,
         series.phi1, series.phi2, series.dphi_unwrapped, traj.min_symplectic],
    )
    outputs["sync_csv"] = sync_csv

    try:
        lock = phase_locking_metric(
            traj.classical, window_fraction=cfg.steady_fraction,
            lock_threshold=cfg.lock_threshold,
        )
        flags["locked"] = lock.locked
        flags["mean_dphi"] = lock.mean_dphi
        flags["circ_std_dphi"] = lock.circ_std_dphi
    except InsufficientDataError:
        flags["locked"] = None
    flags["n_physicality_warnings"] = int(np.sum(traj.physicality_flags))
    flags["steady"] = dataclasses.asdict(series.steady)

    manifest.wall_time_s = time.monotonic() - t0
    path = os.path.join(out, "manifest.json")
    manifest.write(path)
    return manifest


def _sweep_point(args):
    idx, overrides, cfg, out = args
    label = "_".join(f"{k}={v:g}" for k, v in overrides.items())
    point_dir = os.path.join(out, f"point_{idx:03d}_{label}")
    try:
        manifest = run_scenario(cfg, out_dir=point_dir)
        return idx, overrides, manifest, None
    except Exception as exc:  # point failures are recorded, sweep continues
        return idx, overrides, None, str(exc)


def run_sweep(cfg: SweepConfig, out_dir: str | None = None) -> RunManifest:
    """Run every grid point (optionally in parallel) and write sweep_summary.csv."""
    out = out_dir or cfg.base.out_dir
    os.makedirs(out, exist_ok=True)
    t0 = time.monotonic()
    jobs = [(i, ov, c, out) for i, (ov, c) in enumerate(cfg.points())]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]

    summary_path = os.path.join(out, "sweep_summary.csv")
    agg_keys = ["mean_s_c", "min_s_c", "max_s_c", "mean_s_phi", "min_s_phi",
                "max_s_phi", "mean_s_p", "min_s_p", "max_s_p"]
    header = list(cfg.sweep_params) + [k.replace("s_c", "S_c")
                                       .replace("s_phi", "S_phi")
                                       .replace("s_p", "S_p") for k in agg_keys]
    tmp = summary_path + ".tmp"
    failures = []
    outputs = {"sweep_summary_csv": summary_path, "points": {}}
    with open(tmp, "w") as fh:
        fh.write(",".join(header) + "\n")
        for idx, overrides, manifest, err in results:
            if err is not None:
                failures.append({"point": idx, "overrides": overrides, "error": err})
                continue
            steady = manifest.flags["steady"]
            row = [overrides[k] for k in cfg.sweep_params]
            row += [steady[k] for k in agg_keys]
            fh.write(",".join(FMT % v for v in row) + "\n")
            outputs["points"][str(idx)] = manifest.outputs["sync_csv"]
    os.replace(tmp, summary_path)

    manifest = RunManifest(
        config={**cfg.base.flat_dict(),
                "sweep_params": list(cfg.sweep_params),
                "sweep_values": [list(v) for v in cfg.sweep_values],
                "workers": cfg.workers},
        version=__version__,
        wall_time_s=time.monotonic() - t0,
        outputs=outputs,
        flags={"failures": failures, "n_points": len(jobs)},
        kind="sweep",
    )
    manifest.write(os.path.join(out, "manifest.json"))
    return manifest


_GP_PREAMBLE = "set datafile separator ','\nset key autotitle columnhead\nset grid\n"


def emit_plot_scripts(manifest: RunManifest, out_dir: str | None = None) -> list:
    """Write gnuplot scripts rendering the standard figure analogues.

    Scripts reference the CSVs recorded in the manifest; a missing CSV is an
    error naming the file. Returns the list of script paths written.
    """
    written = []

    def emit(directory, name, body):
        path = os.path.join(directory, name)
        with open(path, "w") as fh:
            fh.write(_GP_PREAMBLE + body)
        written.append(path)

    if manifest.kind == "sweep":
        summary = manifest.outputs["sweep_summary_csv"]
        if not os.path.exists(summary):
            raise ConfigError(f"missing CSV: {summary}")
        directory = out_dir or os.path.dirname(summary)
        param = manifest.config["sweep_params"][0]
        emit(directory, "sweep_summary.gp",
             f"set xlabel '{param}'\nset ylabel 'steady-window mean'\n"
             f"plot '{summary}' using 1:8 with linespoints title 'mean_S_p', \\\n"
             f"     '{summary}' using 1:2 with linespoints title 'mean_S_c', \\\n"
             f"     '{summary}' using 1:5 with linespoints title 'mean_S_phi'\n")
        return written

    classical = manifest.outputs.get("classical_csv")
    sync = manifest.outputs.get("sync_csv")
    for path in (classical, sync):
        if path is None or not os.path.exists(path):
            raise ConfigError(f"missing CSV: {path}")
    directory = out_dir or os.path.dirname(classical)

    emit(directory, "mechanical_means.gp",
         "set xlabel 'tau'\n"
         f"plot '{classical}' using 1:2 with lines title 'q1s', \\\n"
         f"     '{classical}' using 1:6 with lines title 'q2s'\n"
         "pause -1\n"
         f"plot '{classical}' using 1:3 with lines title 'p1s', \\\n"
         f"     '{classical}' using 1:7 with lines title 'p2s'\n")
    emit(directory, "phase_orbits.gp",
         "set xlabel 'q'\nset ylabel 'p'\nset size square\n"
         f"plot '{classical}' using 2:3 with lines title 'resonator 1', \\\n"
         f"     '{classical}' using 6:7 with lines title 'resonator 2'\n")
    emit(directory, "cavity_quadratures.gp",
         "set xlabel 'tau'\n"
         "# cavity quadratures: x = sqrt(2) Re(alpha), y = sqrt(2) Im(alpha)\n"
         f"plot '{classical}' using 1:(sqrt(2)*$4) with lines title 'x1', \\\n"
         f"     '{classical}' using 1:(sqrt(2)*$8) with lines title 'x2'\n"
         "pause -1\n"
         f"plot '{classical}' using 1:(sqrt(2)*$5) with lines title 'y1', \\\n"
         f"     '{classical}' using 1:(sqrt(2)*$9) with lines title 'y2'\n")
    emit(directory, "sync_series.gp",
         "set xlabel 'tau'\nset logscale y\n"
         f"plot '{sync}' using 1:2 with lines title 'S_c', \\\n"
         f"     '{sync}' using 1:3 with lines title 'S_phi', \\\n"
         f"     '{sync}' using 1:4 with lines title 'S_p'\n")
    return written
