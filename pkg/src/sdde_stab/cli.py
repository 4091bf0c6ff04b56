"""Command-line experiment runner.

    sdde-stab spectrum --a 1 --window -0.5,0.5,-0.5,0.5
    sdde-stab simulate --a 0.5 --eps 0.1 --T 200
    sdde-stab classify --a 0.5
    sdde-stab preset prop42 --a 0.5 --out results/

Settings come from defaults, then an optional ``--config`` file (TOML or
JSON), then flags.  Exit codes: 0 success, 2 bad input or precondition,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .classifier import (ASYMPTOTICALLY_STABLE_LINEAR, UNSTABLE_LINEAR, AttractionError, ClassifyOptions,
                         classify, decay_report, default_window, growth_rate, verify_attraction)
from .integrator import AdmissibilityError, IntegrationOptions, integrate
from .model import ConstructionError, Model, ModelError, correct_to_manifold, make_admissible
from .projection import CenterBasis, DegenerateProjectionError
from .reduction import FitError, fit_reduced_field
from .segment import DomainError, Segment
from .spectrum import ContourError, Rect, SearchError, count_roots_circle, find_roots, real_root_kappa

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 2, 3
PRESETS = ("prop41", "prop42", "roots", "reduce", "attract")

DEFAULTS = {
    "a": 0.5,
    "delay": {"kind": "rational_bump", "c": 1.0},
    "grid_nodes": 256,
    "radius": 10.0,
    "T": None,
    "eps": [0.1],
    "dt": 1e-3,
    "bound": 5.0,
    "window": None,
    "stride": 1e-2,
    "bump": 0.05,
    "a_values": [],
    "task": "classify",
    "seed": 0,
    "out": ".",
    "jobs": None,
}


class ConfigError(ValueError):
    pass


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    text = Path(path).read_bytes()
    if path.endswith(".json"):
        data = json.loads(text)
    else:
        data = tomllib.loads(text.decode())
    # accept a nested [model] block as well as flat keys
    if "model" in data:
        model = data.pop("model")
        data.update(model)
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()] if text.strip() else []


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdde-stab", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--a", type=float)
    common.add_argument("--delay", choices=("constant", "rational_bump"), help="delay function kind")
    common.add_argument("--c", type=float, help="rational_bump parameter")
    common.add_argument("--grid-nodes", dest="grid_nodes", type=int)
    common.add_argument("--T", type=float)
    common.add_argument("--eps", type=_floats)
    common.add_argument("--dt", type=float)
    common.add_argument("--bound", type=float)
    common.add_argument("--window", type=str, help="re_min,re_max,im_min,im_max")
    common.add_argument("--stride", type=float)
    common.add_argument("--bump", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=str)
    common.add_argument("--jobs", type=int)

    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="characteristic roots")
    sub.add_parser("simulate", parents=[common], help="integrate the model")
    sub.add_parser("reduce", parents=[common], help="fit the reduced field")
    sub.add_parser("classify", parents=[common], help="stability verdict")
    sub.add_parser("attract", parents=[common], help="attraction rate to the center manifold")
    sw = sub.add_parser("sweep", parents=[common], help="verdicts over a list of a values")
    sw.add_argument("--a-values", dest="a_values", type=_floats)
    sw.add_argument("--task", choices=("classify", "spectrum"))
    pr = sub.add_parser("preset", parents=[common], help="named experiment")
    pr.add_argument("name", choices=PRESETS)
    return p


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(load_config(args.config))
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "name", "delay", "c") and v is not None}
    cfg.update(flags)
    if args.delay is not None:
        cfg["delay"] = {"kind": args.delay}
        if args.delay == "rational_bump":
            cfg["delay"]["c"] = 1.0
    if args.c is not None:
        cfg["delay"] = {"kind": "rational_bump", "c": args.c}
    if cfg["jobs"] is None:
        cfg["jobs"] = int(os.environ.get("SDDE_STAB_JOBS", "1"))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return cfg


def make_model(cfg: dict, a: float | None = None) -> Model:
    return Model.from_config({"a": cfg["a"] if a is None else a, "delay": cfg["delay"],
                              "grid_nodes": cfg["grid_nodes"], "radius": cfg["radius"]})


def _opts(cfg: dict) -> IntegrationOptions:
    return IntegrationOptions(dt=cfg["dt"], bound=cfg["bound"])


def _write(cfg: dict, name: str, text: str) -> Path:
    path = Path(cfg["out"]) / name
    path.write_text(text)
    return path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _window(cfg: dict, coeffs) -> Rect:
    return Rect.parse(cfg["window"]) if cfg["window"] else default_window(coeffs)


# ------------------------------------------------------------------ commands


def cmd_spectrum(cfg: dict) -> str:
    a = cfg["a"]
    window = _window(cfg, (a, -a))
    split = find_roots(window, a)
    _write(cfg, "roots.csv", split.to_csv())
    c = ", ".join(f"{r.value.real:.6g}{r.value.imag:+.6g}j (mult {r.multiplicity})" for r in split.sigma_c)
    return (f"a={a:g}: {len(split.sigma_u)} unstable, center [{c}], {len(split.sigma_s)} stable; "
            f"certificate {split.found}/{split.counted}")


def cmd_simulate(cfg: dict) -> str:
    model = make_model(cfg)
    eps = cfg["eps"][0] if cfg["eps"] else 0.0
    T = cfg["T"] or 200.0
    traj = integrate(model, make_admissible(model, eps), T, _opts(cfg))
    _write(cfg, "trajectory.csv", traj.to_csv(cfg["stride"]))
    return f"a={model.a:g} eps={eps:g}: {traj.status} at t={traj.end_time:g}, x(end)={traj.xs[-1]:.6g}"


def _fit(cfg: dict, model: Model):
    eps = cfg["eps"] if len(cfg["eps"]) > 1 else [0.05, 0.1, 0.15]
    T = cfg["T"] or 100.0
    trajs = [integrate(model, make_admissible(model, e), T, _opts(cfg)) for e in eps]
    return fit_reduced_field(trajs, CenterBasis(model.a))


def cmd_reduce(cfg: dict) -> str:
    model = make_model(cfg)
    fit = _fit(cfg, model)
    _write(cfg, "fit.json", fit.to_json() + "\n")
    return f"a={model.a:g}: c_fitted={fit.c_fitted:.6g} (analytic {fit.c_analytic:.6g}, stderr {fit.stderr:.2g})"


def _classify_opts(cfg: dict) -> ClassifyOptions:
    eps = tuple(cfg["eps"]) if len(cfg["eps"]) > 1 else (0.05, 0.1, 0.15)
    return ClassifyOptions(window=Rect.parse(cfg["window"]) if cfg["window"] else None, eps=eps,
                           T=cfg["T"] or 100.0, integration=_opts(cfg))


def cmd_classify(cfg: dict) -> str:
    model = make_model(cfg)
    verdict = classify(model, _classify_opts(cfg))
    _write(cfg, "verdict.json", verdict.to_json() + "\n")
    return f"a={model.a:g}: {verdict.verdict} [{verdict.theorem}]"


def _attraction_seed(model: Model, eps: float, bump: float) -> Segment:
    kappa = real_root_kappa(model.a)
    base = make_admissible(model, eps)
    shape = Segment.from_function(lambda t: bump * np.exp(kappa * (t + 1)),
                                  lambda t: bump * kappa * np.exp(kappa * (t + 1)), model.h, model.grid_nodes)
    return correct_to_manifold(model, base + shape)


def cmd_attract(cfg: dict) -> str:
    model = make_model(cfg)
    eps = cfg["eps"][0] if cfg["eps"] else 0.1
    phi = _attraction_seed(model, eps, cfg["bump"])
    rep = verify_attraction(model, phi, cfg["T"] or 20.0, opts=_opts(cfg))
    kappa = real_root_kappa(model.a)
    data = {"a": model.a, "rate": rep.rate, "kappa": kappa, "r_squared": rep.r_squared,
            "shadow_eps": rep.shadow_eps}
    _write(cfg, "attract.json", json.dumps(data, indent=2, sort_keys=True) + "\n")
    return f"a={model.a:g}: attraction rate {rep.rate:.6g} vs |kappa|={abs(kappa):.6g}, R^2={rep.r_squared:.6f}"


SWEEP_COLUMNS = ["a", "verdict", "kappa", "c_fitted", "t_x_limit", "error"]


def sweep_row(cfg: dict, a: float, task: str) -> dict:
    row = {"a": a, "verdict": None, "kappa": None, "c_fitted": None, "t_x_limit": None, "error": None}
    try:
        if not a > 0:
            raise ConfigError("a must be positive")
        if abs(a - 1.0) < 1e-12 and task != "spectrum":
            raise ConfigError("a = 1 is allowed only for the spectrum task")
        row["kappa"] = real_root_kappa(a)
        if task == "spectrum":
            split = find_roots(_window(cfg, (a, -a)), a)
            if split.sigma_u:
                row["verdict"] = UNSTABLE_LINEAR
            elif not split.sigma_c:
                row["verdict"] = ASYMPTOTICALLY_STABLE_LINEAR
            else:
                row["verdict"] = "CRITICAL_m%d" % sum(r.multiplicity for r in split.sigma_c)
            return row
        model = make_model(cfg, a)
        verdict = classify(model, _classify_opts(cfg))
        row["verdict"] = verdict.verdict
        if verdict.reduced is not None:
            row["c_fitted"] = verdict.reduced.c_fitted
            traj = integrate(model, make_admissible(model, 0.1), 200.0, _opts(cfg))
            row["t_x_limit"] = decay_report(traj, 100.0, 200.0).t_mean_x
    except Exception as exc:  # noqa: BLE001 - rows record their own failures
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(cfg: dict) -> str:
    a_values = list(cfg["a_values"])
    task = cfg["task"]
    if cfg["jobs"] > 1 and len(a_values) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            rows = list(pool.map(sweep_row, [cfg] * len(a_values), a_values, [task] * len(a_values)))
    else:
        rows = [sweep_row(cfg, a, task) for a in a_values]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in SWEEP_COLUMNS])
    _write(cfg, "sweep.csv", buf.getvalue())
    summary = ", ".join(f"{r['a']:g}:{r['verdict'] or 'ERROR'}" for r in rows)
    return f"sweep {task} over {len(rows)} values" + (f": {summary}" if rows else "")


def cmd_preset(cfg: dict, name: str) -> str:
    if name == "roots":
        lines = []
        for a in (0.5, 2.0):
            split = find_roots(_window(cfg, (a, -a)) if cfg["window"] else Rect(-5.0, 2.0, 40.0), a)
            _write(cfg, f"roots_a{a:g}.csv", split.to_csv())
            lines.append(f"a={a:g}: {len(split.sigma_u)} unstable, {len(split.sigma_c)} center, "
                         f"certificate {split.found}/{split.counted}")
        n = count_roots_circle(0.0, 0.1, 1.0)
        lines.append(f"a=1: winding number on |lambda|=0.1 is {n}")
        _write(cfg, "roots_a1.json", json.dumps({"a": 1.0, "radius": 0.1, "winding": n}) + "\n")
        return "; ".join(lines)
    if name == "prop41":
        cfg = {**cfg, "a": cfg["a"] if cfg["a"] > 1 else 2.0}
        model = make_model(cfg)
        verdict = classify(model, _classify_opts(cfg))
        _write(cfg, "verdict.json", verdict.to_json() + "\n")
        traj = integrate(model, make_admissible(model, 1e-4), cfg["T"] or 20.0, _opts(cfg))
        _write(cfg, "growth.csv", traj.to_csv(cfg["stride"]))
        rate, r2 = growth_rate(traj)
        kappa = real_root_kappa(model.a)
        _write(cfg, "growth.json", json.dumps({"a": model.a, "growth_rate": rate, "kappa": kappa,
                                               "r_squared": r2}, indent=2, sort_keys=True) + "\n")
        return f"a={model.a:g}: {verdict.verdict}; growth rate {rate:.6g} vs kappa {kappa:.6g}"
    if name == "prop42":
        model = make_model(cfg)
        verdict = classify(model, _classify_opts(cfg))
        _write(cfg, "verdict.json", verdict.to_json() + "\n")
        if verdict.reduced is not None:
            _write(cfg, "fit.json", verdict.reduced.to_json() + "\n")
        traj = integrate(model, make_admissible(model, 0.1), 200.0, _opts(cfg))
        _write(cfg, "decay.csv", traj.to_csv(cfg["stride"]))
        rep = decay_report(traj, 100.0, 200.0)
        return (f"a={model.a:g}: {verdict.verdict}; mean t*x(t) on [100,200] = {rep.t_mean_x:.6g} "
                f"(1-a = {1 - model.a:g})")
    if name == "reduce":
        return cmd_reduce(cfg)
    return cmd_attract(cfg)


COMMANDS = {"spectrum": cmd_spectrum, "simulate": cmd_simulate, "reduce": cmd_reduce,
            "classify": cmd_classify, "attract": cmd_attract, "sweep": cmd_sweep}

PRECONDITION_ERRORS = (ConfigError, ModelError, AdmissibilityError, DomainError, DegenerateProjectionError,
                       ValueError, OSError, KeyError, tomllib.TOMLDecodeError)
NUMERICAL_ERRORS = (SearchError, ContourError, FitError, ConstructionError, AttractionError, RuntimeError,
                    ArithmeticError)


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--window -0.5,0.5,..." as two options; glue numeric values to their flag
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            try:
                _floats(argv[i + 1])
            except ValueError:
                pass
            else:
                out.append(f"{tok}={argv[i + 1]}")
                i += 2
                continue
        out.append(tok)
        i += 1
    return out


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PRECONDITION
    try:
        cfg = resolve(args)
        if args.command == "preset":
            line = cmd_preset(cfg, args.name)
        else:
            line = COMMANDS[args.command](cfg)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PRECONDITION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(line)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
