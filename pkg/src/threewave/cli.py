"""Command-line front end: config parsing, preset drivers, sweeps, serialization.

Config files are flat-section key/value text (``configparser`` syntax)::

    [run]
    preset = ground
    [phys]
    alpha = 1
    a1 = 0.5D
    a2 = 0.5D
    [grid]
    n = 2048
    R = auto

Masses may be absolute numbers or multiples of ``D(alpha)`` written with a
trailing ``D``.  ``R = auto`` sizes the grid from the ground-state length.

Usage::

    threewave <preset> --config <path> [--out <dir>] [--seed <u64>]
    threewave sweep --config <path> [<path> ...] [--out <dir>] [--workers <k>]

Exit status is 0 when the preset's verdict passes, 2 when it fails and 1 on
an error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import platform
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .errors import InputError, SubcriticalityError, ThreeWaveError
from .functionals import PhysParams, geometry_constants, threshold_D, threshold_D0
from .radial_core import RadialGrid

log = logging.getLogger(__name__)

PRESETS = ("constants", "ground", "excited", "collapse", "stability", "instability", "scattering")
SOLVER_PRESETS = PRESETS[1:]

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

# section -> key -> (type, default); a default of None means "required" for
# keys listed in _REQUIRED and "unset" otherwise
_SCHEMA: dict[str, dict[str, tuple[type, object]]] = {
    "run": {"preset": (str, None), "out_path": (str, "out"), "seed": (int, None)},
    "phys": {"alpha": (float, None), "a1": (str, None), "a2": (str, None)},
    "grid": {"n": (int, 2048), "R": (str, "40")},
    "solver": {"tol": (float, 1e-8), "max_iter": (int, 5000), "step": (float, 1.0)},
    "dynamics": {"T": (float, 1.0), "dt0": (float, 1e-3), "dt_min": (float, 1e-9),
                 "output_stride": (int, 10), "substep_tol": (float, 0.02)},
    "experiment": {
        "delta": (float, 1e-2), "s": (float, 1.1), "eps_list": (str, "0.4D, 0.2D, 0.1D"),
        "epsilon": (float, 0.1), "cutoff_radius": (float, 1.0),
        "excited_n": (int, 0), "excited_R": (float, 0.0), "random_amplitude": (float, 0.0),
        "excited_refine": (str, ""),
    },
}
_REQUIRED = {"constants": ("alpha",), **{p: ("alpha", "a1", "a2") for p in SOLVER_PRESETS}}
_REQUIRED["collapse"] = ("alpha",)


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; see the module docstring for the text format."""

    preset: str
    alpha: float
    a1: str = ""
    a2: str = ""
    n: int = 2048
    R: str = "40"
    tol: float = 1e-8
    max_iter: int = 5000
    step: float = 1.0
    T: float = 1.0
    dt0: float = 1e-3
    dt_min: float = 1e-9
    output_stride: int = 10
    substep_tol: float = 0.02
    delta: float = 1e-2
    s: float = 1.1
    eps_list: str = "0.4D, 0.2D, 0.1D"
    epsilon: float = 0.1
    cutoff_radius: float = 1.0
    excited_n: int = 0
    excited_R: float = 0.0
    random_amplitude: float = 0.0
    excited_refine: str = ""
    out_path: str = "out"
    seed: int | None = None
    resolved: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def phys(self) -> PhysParams:
        return PhysParams(self.alpha, self.resolved["a1"], self.resolved["a2"])

    def grid(self) -> RadialGrid | None:
        """Explicit grid, or None for automatic sizing."""
        return None if self.R == "auto" else RadialGrid(float(self.R), self.n)

    @property
    def eps_values(self) -> list[float]:
        return list(self.resolved.get("eps", []))


def _reference():
    from .reference_solutions import reference_soliton, sobolev_constant

    return reference_soliton(), sobolev_constant()


def _mass_value(text: str, D: float, key: str) -> float:
    t = text.strip().replace(" ", "")
    try:
        if t.endswith("D"):
            return float(t[:-1].rstrip("*")) * D
        return float(t)
    except ValueError:
        raise InputError(f"key '{key}': cannot read '{text}' as a mass (number or multiple of D)") from None


def parse_config(text: str, preset: str | None = None) -> RunConfig:
    """Parse and validate config text.

    Parameters
    ----------
    text : str
        Flat-section key/value text.
    preset : str, optional
        Preset given on the command line; must agree with ``[run] preset``
        when both are present.

    Raises
    ------
    InputError
        Unknown section or key, missing required key, type mismatch.
    SubcriticalityError
        ``max(a1, a2) >= D(alpha)`` for a solver preset.
    """
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"malformed config: {exc}") from None
    values: dict[str, object] = {}
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise InputError(f"unknown section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in _SCHEMA[sec]:
                raise InputError(f"unknown key '{key}' in section [{sec}]")
            typ = _SCHEMA[sec][key][0]
            try:
                values[key] = typ(raw) if typ is not int else int(raw, 0)
            except ValueError:
                raise InputError(f"key '{key}': expected {typ.__name__}, got '{raw}'") from None
    file_preset = values.get("preset")
    if preset and file_preset and preset != file_preset:
        raise InputError(f"key 'preset': command line says '{preset}', config says '{file_preset}'")
    values["preset"] = preset or file_preset
    if values["preset"] is None:
        raise InputError("missing required key 'preset'")
    if values["preset"] not in PRESETS:
        raise InputError(f"key 'preset': unknown preset '{values['preset']}'")
    for key in _REQUIRED[values["preset"]]:
        if key not in values:
            raise InputError(f"missing required key '{key}' for preset '{values['preset']}'")
    if not values["alpha"] > 0:
        raise InputError("key 'alpha': must be positive")
    R = str(values.get("R", "40")).strip()
    if R != "auto":
        try:
            if not float(R) > 0:
                raise ValueError
        except ValueError:
            raise InputError(f"key 'R': expected a positive number or 'auto', got '{R}'") from None
    values["R"] = R
    for key in ("n", "max_iter", "output_stride"):
        if key in values and values[key] < 1:
            raise InputError(f"key '{key}': must be positive")
    for key in ("tol", "step", "T", "dt0", "dt_min", "substep_tol", "epsilon", "cutoff_radius"):
        if key in values and not values[key] > 0:
            raise InputError(f"key '{key}': must be positive")
    seed = values.get("seed")
    if seed is not None and not (0 <= seed < 2**64):
        raise InputError("key 'seed': must be an unsigned 64-bit integer")
    cfg = RunConfig(**values)
    soliton, c_sob = _reference()
    D = threshold_D(cfg.alpha, soliton.norm, c_sob)
    resolved: dict[str, object] = {"D": D}
    try:
        resolved["refine"] = [int(x, 0) for x in cfg.excited_refine.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"key 'excited_refine': expected comma-separated node counts, got '{cfg.excited_refine}'") from None
    if any(m < 3 for m in resolved["refine"]):
        raise InputError("key 'excited_refine': node counts must be at least 3")
    if cfg.preset in SOLVER_PRESETS and cfg.preset != "collapse":
        resolved["a1"] = _mass_value(cfg.a1, D, "a1")
        resolved["a2"] = _mass_value(cfg.a2, D, "a2")
        for key in ("a1", "a2"):
            if not resolved[key] > 0:
                raise InputError(f"key '{key}': mass must be positive")
        PhysParams(cfg.alpha, resolved["a1"], resolved["a2"]).require_subcritical(D)
    if cfg.preset == "collapse":
        eps = [_mass_value(e, D, "eps_list") for e in cfg.eps_list.split(",") if e.strip()]
        if len(eps) < 2:
            raise InputError("key 'eps_list': need at least two values")
        if any(e >= D for e in eps):
            raise SubcriticalityError(f"subcriticality violated: key 'eps_list' has a value >= D = {D:.6g}")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise InputError("key 'eps_list': values must be strictly descending")
        resolved["eps"] = eps
    if cfg.preset == "instability" and not cfg.s > 1:
        raise InputError("key 's': dilation factor must exceed 1")
    if cfg.preset in ("stability", "instability", "scattering"):
        ratio = cfg.T / (cfg.output_stride * cfg.dt0)
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise InputError("key 'T': must be a multiple of output_stride*dt0")
    object.__setattr__(cfg, "resolved", resolved)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text: every section and key in schema order, defaults filled."""
    out = io.StringIO()
    for sec, keys in _SCHEMA.items():
        out.write(f"[{sec}]\n")
        for key in keys:
            val = getattr(cfg, key)
            if val is None or val == "":
                continue
            out.write(f"{key} = {val!r}\n" if isinstance(val, float) else f"{key} = {val}\n")
        out.write("\n")
    return out.getvalue()


def load_config(path: str | Path, preset: str | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), preset)


# ---------------------------------------------------------------------------
# serialization helpers


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if hasattr(obj, "value") and hasattr(obj, "name"):
        return obj.value
    return obj


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def write_profile(path: Path, state) -> None:
    """Profile samples as JSON columns ``r, u1, u2, u3`` plus the state summary."""
    g = state.u.grid
    d = np.real(state.u.data)
    write_json(path, {"summary": state.summary(), "grid": {"R": g.R, "n": g.n},
                      "r": g.r, "u1": d[0], "u2": d[1], "u3": d[2]})


def write_monitors(path: Path, records) -> None:
    from .dynamics import MONITOR_COLUMNS

    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MONITOR_COLUMNS)
        for rec in records:
            w.writerow([repr(float(x)) for x in rec.row()])


def constants_report(alpha: float) -> dict:
    from .reference_solutions import gn_constant, reference_soliton, sobolev_constant

    W = reference_soliton()
    c_sob = sobolev_constant()
    return {
        "alpha": alpha,
        "normW2_sq": W.normW2_sq,
        "normW2": W.norm,
        "W_at_zero": W.w_at_zero,
        "nehari_residual": W.nehari_residual,
        "pohozaev_residual": W.pohozaev_residual,
        "c_sob": c_sob,
        "c_sob_1.5_over_3": c_sob**1.5 / 3.0,
        "c_gn3": gn_constant(W),
        "D": threshold_D(alpha, W.norm, c_sob),
        "D0": threshold_D0(alpha, W.norm, c_sob),
    }


# ---------------------------------------------------------------------------
# preset drivers: each returns (report, verdict, artifacts) where artifacts
# maps file names to writer callables


def _ground(cfg: RunConfig):
    from .variational_solvers import ground_state

    return ground_state(cfg.phys, cfg.grid(), step=cfg.step, tol=cfg.tol, max_iter=cfg.max_iter)


def _excited_grid(cfg: RunConfig, ground):
    if cfg.excited_n and cfg.excited_R:
        return RadialGrid(cfg.excited_R, cfg.excited_n)
    return ground.u.grid


def _drive_constants(cfg):
    rep = constants_report(cfg.alpha)
    ok = abs(rep["nehari_residual"]) < 1e-6 and abs(rep["pohozaev_residual"]) < 1e-6
    text = "".join(f"{k} = {float(v)!r}\n" for k, v in rep.items())
    return rep, ok, {"constants.txt": lambda p: p.write_text(text)}


def _drive_ground(cfg):
    st = _ground(cfg)
    ok = st.converged and all(st.certificate.values())
    return st.summary(), ok, {"profile.json": lambda p: write_profile(p, st)}


def _excited(cfg: RunConfig, gs):
    """Excited state on the excited grid, then warm-started on each refinement."""
    from .variational_solvers import excited_state, transfer

    grid = _excited_grid(cfg, gs)
    kw = dict(tol=cfg.tol, max_iter=cfg.max_iter, epsilon=cfg.epsilon, cutoff_radius=cfg.cutoff_radius)
    ex = excited_state(cfg.phys, gs, grid=grid, **kw)
    for n in cfg.resolved.get("refine", []):
        fine = RadialGrid(grid.R, n)
        ex = excited_state(cfg.phys, gs, init=transfer(ex.u, fine), grid=fine, **kw)
    return ex


def _drive_excited(cfg):
    gs = _ground(cfg)
    ex = _excited(cfg, gs)
    cert = ex.certificate
    ok = ex.converged and cert["classification_minus"] and cert["energy_in_window"]
    return ({"ground": gs.summary(), "excited": ex.summary()}, ok,
            {"ground_profile.json": lambda p: write_profile(p, gs),
             "excited_profile.json": lambda p: write_profile(p, ex)})


def collapse_verdict(records, alpha: float, normW2_sq: float, distance_tol: float = 1e-12) -> dict:
    eps = np.array([r.epsilon for r in records])
    E = np.array([r.energy for r in records])
    G = np.array([r.grad_sq for r in records])
    lam = np.array([r.lambda_sum for r in records])
    dist = np.array([r.rescaled_distance for r in records])
    slope_E = float(np.polyfit(np.log(eps), np.log(np.abs(E)), 1)[0])
    slope_G = float(np.polyfit(np.log(eps), np.log(G), 1)[0])
    w4 = normW2_sq**2
    lo, hi = alpha**4 * eps**4 / (8 * w4), 81 * alpha**4 * eps**4 / (8 * w4)
    glo, ghi = 3 * alpha**4 * eps**6 / (8 * w4), 243 * alpha**4 * eps**6 / (16 * w4)
    # distances sit at round-off once the rescaled profiles coincide
    scale = distance_tol * max(1.0, float(np.max(dist)))
    mono = bool(np.all(np.diff(dist) <= scale + distance_tol))
    out = {
        "slope_energy": slope_E,
        "slope_grad_sq": slope_G,
        "lambda_in_bracket": bool(np.all((lam > lo) & (lam < hi))),
        "grad_sq_in_bracket": bool(np.all((G > glo) & (G < ghi))),
        "distance_nonincreasing": mono,
    }
    out["pass"] = bool(abs(slope_E - 6) <= 0.3 and abs(slope_G - 6) <= 0.3
                       and out["lambda_in_bracket"] and out["distance_nonincreasing"])
    return out


def _drive_collapse(cfg):
    from .reference_solutions import reference_soliton
    from .variational_solvers import mass_collapse_sweep

    recs, limit = mass_collapse_sweep(cfg.alpha, cfg.eps_values, n=cfg.n, tol=min(cfg.tol, 1e-10),
                                      max_iter=cfg.max_iter)
    verdict = collapse_verdict(recs, cfg.alpha, reference_soliton().normW2_sq)
    rep = {"records": [asdict(r) for r in recs], "limit": limit.summary(), "fit": verdict}
    return rep, verdict["pass"], {"limit_profile.json": lambda p: write_profile(p, limit)}


def _drive_stability(cfg):
    from .dynamics import stability_experiment

    gs = _ground(cfg)
    rep = stability_experiment(cfg.phys, gs, delta=cfg.delta, T=cfg.T, dt0=cfg.dt0,
                               output_stride=cfg.output_stride, substep_tol=cfg.substep_tol,
                               seed=cfg.seed, random_amplitude=cfg.random_amplitude)
    return ({"ground": gs.summary(), "experiment": rep.as_dict()}, rep.verdict,
            {"monitors.csv": lambda p: write_monitors(p, rep.series)})


def _drive_instability(cfg):
    from .dynamics import instability_experiment

    gs = _ground(cfg)
    ex = _excited(cfg, gs)
    rep = instability_experiment(cfg.phys, ex, s=cfg.s, T=cfg.T, dt0=cfg.dt0, dt_min=cfg.dt_min,
                                 output_stride=cfg.output_stride, substep_tol=cfg.substep_tol)
    return ({"ground": gs.summary(), "excited": ex.summary(), "experiment": rep.as_dict()},
            rep.verdict, {"monitors.csv": lambda p: write_monitors(p, rep.series),
                          "excited_profile.json": lambda p: write_profile(p, ex)})


def _drive_scattering(cfg):
    from .dynamics import scattering_diagnostic

    gs = _ground(cfg)
    rep = scattering_diagnostic(cfg.phys, gs, T=cfg.T, dt0=cfg.dt0, output_stride=cfg.output_stride,
                                substep_tol=cfg.substep_tol, delta=cfg.delta)
    return ({"ground": gs.summary(), "experiment": rep.as_dict()}, rep.verdict,
            {"monitors.csv": lambda p: write_monitors(p, rep.series)})


DRIVERS = {
    "constants": _drive_constants,
    "ground": _drive_ground,
    "excited": _drive_excited,
    "collapse": _drive_collapse,
    "stability": _drive_stability,
    "instability": _drive_instability,
    "scattering": _drive_scattering,
}


@dataclass
class RunResult:
    preset: str
    status: int
    verdict: bool | None
    report: dict
    out_dir: str | None
    error: str | None = None


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> RunResult:
    """Dispatch to the preset driver and write report, manifest and artifacts.

    Driver errors are caught and serialized into ``error.json``; the returned
    status is 0 on pass, 2 on a failed verdict and 1 on error.
    """
    out = Path(out_dir or cfg.out_path)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.seed is not None:
        np.random.seed(cfg.seed % 2**32)
    soliton, c_sob = _reference()
    manifest = {
        "config": serialize_config(cfg),
        "constants": {
            "normW2_sq": soliton.normW2_sq,
            "c_sob": c_sob,
            "D": threshold_D(cfg.alpha, soliton.norm, c_sob),
            "D0": threshold_D0(cfg.alpha, soliton.norm, c_sob),
            "resolved": cfg.resolved,
        },
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    if cfg.preset in SOLVER_PRESETS and cfg.preset != "collapse":
        manifest["constants"]["geometry"] = geometry_constants(cfg.phys, soliton.norm, c_sob).as_dict()
    t0 = time.perf_counter()
    try:
        report, verdict, artifacts = DRIVERS[cfg.preset](cfg)
    except Exception as exc:  # every driver failure becomes exit status 1
        manifest["wall_time_s"] = time.perf_counter() - t0
        payload = {"error": type(exc).__name__, "message": str(exc), "traceback": traceback.format_exc()}
        write_json(out / "error.json", payload)
        write_json(out / "manifest.json", manifest)
        log.error("%s run failed: %s", cfg.preset, exc)
        return RunResult(cfg.preset, EXIT_ERROR, None, payload, str(out), error=str(exc))
    manifest["wall_time_s"] = time.perf_counter() - t0
    report = {"preset": cfg.preset, "verdict": bool(verdict), "result": report}
    write_json(out / "report.json", report)
    for name, writer in artifacts.items():
        writer(out / name)
    manifest["artifacts"] = sorted(["report.json", *artifacts])
    write_json(out / "manifest.json", manifest)
    return RunResult(cfg.preset, EXIT_PASS if verdict else EXIT_FAIL, bool(verdict),
                     _jsonable(report), str(out))


def _run_one(item):
    idx, text, out = item
    try:
        cfg = parse_config(text)
    except Exception as exc:
        return RunResult("?", EXIT_ERROR, None, {}, None, error=f"{type(exc).__name__}: {exc}")
    try:
        return run(cfg, out)
    except Exception as exc:
        return RunResult(cfg.preset, EXIT_ERROR, None, {}, out, error=f"{type(exc).__name__}: {exc}")


def sweep(configs, out_root: str | Path = "sweep", workers: int = 2) -> dict:
    """Run independent configs concurrently; failures stay local to their run.

    Parameters
    ----------
    configs : sequence of str
        Config texts; run ``i`` writes to ``out_root/run_<i>``.
    workers : int
        Process-pool size; results do not depend on it.
    """
    items = [(i, text, str(Path(out_root) / f"run_{i:03d}")) for i, text in enumerate(configs)]
    if workers <= 1:
        results = [_run_one(it) for it in items]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, items))
    agg = {
        "runs": [asdict(r) for r in results],
        "passed": sum(r.status == EXIT_PASS for r in results),
        "failed": sum(r.status == EXIT_FAIL for r in results),
        "errors": sum(r.status == EXIT_ERROR for r in results),
    }
    Path(out_root).mkdir(parents=True, exist_ok=True)
    write_json(Path(out_root) / "sweep.json", agg)
    return agg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="threewave", description=__doc__.split("\n")[0])
    parser.add_argument("preset", choices=[*PRESETS, "sweep"])
    parser.add_argument("--config", required=True, nargs="+")
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.preset == "sweep":
            texts = [Path(p).read_text() for p in args.config]
            agg = sweep(texts, args.out or "sweep", args.workers)
            for r in agg["runs"]:
                print(f"{r['preset']:12s} status={r['status']} {r['error'] or ''}")
            return EXIT_ERROR if agg["errors"] else (EXIT_FAIL if agg["failed"] else EXIT_PASS)
        if len(args.config) != 1:
            raise InputError("a single --config is expected outside of sweep")
        cfg = load_config(args.config[0], args.preset)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise InputError("--seed must be an unsigned 64-bit integer")
            cfg = replace(cfg, seed=args.seed)
    except (ThreeWaveError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    res = run(cfg, args.out)
    verdict = {EXIT_PASS: "PASS", EXIT_FAIL: "FAIL", EXIT_ERROR: "ERROR"}[res.status]
    print(f"{cfg.preset}: {verdict} -> {res.out_dir}")
    if res.error:
        print(f"error: {res.error}", file=sys.stderr)
    return res.status


if __name__ == "__main__":
    sys.exit(main())
