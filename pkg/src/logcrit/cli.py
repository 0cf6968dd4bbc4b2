"""Command-line front end.

    logcrit classify CONFIG          classification report as JSON
    logcrit solve CONFIG [--force]   one solver pipeline, JSON + CSV trace/fields
    logcrit sweep CONFIG             margins (and optional levels) over 1-2 axes
    logcrit bubbles CONFIG           bubble integrals table and gap reports
    logcrit battery CONFIG           nonexistence verdicts and falsification battery
    logcrit --schema                 config keys and CSV columns

Exit codes: 0 success, 2 config error, 3 hypothesis gate failed,
4 numeric failure (including a solve that did not converge).
"""
import argparse
import configparser
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bubbles as B
from . import nonexistence as NX
from . import params as P
from . import solvers
from .errors import DomainError, NumericError, PreconditionError
from .radial import OMEGA4, fields_to_csv, make_grid

EXIT_OK, EXIT_CONFIG, EXIT_GATE, EXIT_NUMERIC = 0, 2, 3, 4

PIPELINES = ("local_ball", "nehari", "mountain_pass",
             "single_local_min", "single_nehari_min", "single_mountain_pass")

# section -> key -> (type, default, help)
SCHEMA = {
    "params": {
        "lambda1": ("float", 0.0, "linear coefficient, component 1"),
        "mu1": ("float", 1.0, "cubic coefficient, component 1 (> 0)"),
        "theta1": ("float", 1.0, "logarithmic coefficient, component 1"),
        "lambda2": ("float", 0.0, "linear coefficient, component 2"),
        "mu2": ("float", 1.0, "cubic coefficient, component 2 (> 0)"),
        "theta2": ("float", 1.0, "logarithmic coefficient, component 2"),
        "beta": ("float", 0.1, "coupling (nonzero)"),
        "radius": ("float", 1.0, "ball radius"),
    },
    "grid": {
        "n": ("int", 512, "number of radial elements"),
    },
    "tolerances": {
        "solver_tol": ("float", 1e-8, "relative Sobolev-gradient tolerance"),
        "projection_tol": ("float", 1e-10, "Nehari projection residual tolerance"),
        "quad_check_tol": ("float", 1e-12, "relative tolerance of the ball-volume quadrature check"),
    },
    "run": {
        "pipeline": ("str", "nehari", "solve pipeline: " + ", ".join(PIPELINES)),
        "component": ("int", 1, "component for single_* pipelines"),
        "force": ("bool", False, "run even when the hypothesis gate fails"),
        "max_iter": ("int", 5000, "descent iteration cap"),
        "segments": ("int", 24, "mountain-pass path segments"),
        "seeds": ("intlist", [0], "random seeds (battery uses the first)"),
        "restarts": ("int", 0, "falsification battery restarts"),
        "eps_list": ("floatlist", [0.2, 0.1, 0.05], "bubble concentration parameters"),
        "r_cut": ("float", None, "bubble cutoff radius (default radius/4)"),
        "gap_reports": ("bool", False, "add energy-gap reports to the bubbles command"),
    },
    "sweep": {
        "axis1": ("axis", None, "'name start stop count' over a params field"),
        "axis2": ("axis", None, "second axis, same format"),
        "solve": ("bool", False, "also run [run] pipeline at each point"),
        "workers": ("int", 1, "processes for the sweep points"),
    },
}

GATE_COLUMNS = ["T1.1(1)", "T1.1(2)", "T1.1(3)", "T1.2", "T1.3", "T1.5", "T1.6",
                "T1.7", "T1.7(mirror)", "A.2[1]", "A.2[2]"]
MARGIN_COLUMNS = ["beta1", "beta2", "Lambda", "A_level", "rho", "delta",
                  "beta1_margin", "beta2_margin",
                  "Sigma1_1", "Sigma2_1", "Sigma3_1", "Sigma4_1",
                  "Sigma1_2", "Sigma2_2", "Sigma3_2", "Sigma4_2",
                  "A1", "A2", "A3", "t17_margin", "t17_mirror_margin"]
SOLVE_COLUMNS = ["energy", "converged", "gradient_norm"]

CSV_SCHEMA = {
    "sweep": "axis columns, then " + ", ".join(f"gate:{g}" for g in GATE_COLUMNS)
             + " (1/0), then " + ", ".join(MARGIN_COLUMNS)
             + "; with solve=true also " + ", ".join(SOLVE_COLUMNS),
    "bubbles": ", ".join(B.TABLE_COLUMNS),
    "trace": "iteration, energy, gradient_norm",
    "fields": "r, u, v (or r, u for single pipelines)",
    "battery_hits": "r, then u_<k>, v_<k> per positive hit k",
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    params: P.ParameterSet
    grid: dict
    tolerances: dict
    run: dict
    sweep: dict = field(default_factory=dict)


def _convert(kind, raw, where):
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "str":
            return raw
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "intlist":
            return [int(x) for x in raw.replace(",", " ").split()]
        if kind == "floatlist":
            return [float(x) for x in raw.replace(",", " ").split()]
        if kind == "axis":
            if not raw:
                return None
            name, a, b, n = raw.split()
            if name not in SCHEMA["params"]:
                raise ValueError(f"unknown params field {name!r}")
            n = int(n)
            if n < 1:
                raise ValueError("count must be positive")
            return (name, float(a), float(b), n)
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind} ({exc})") from None
    raise AssertionError(kind)


def parse_config(text, source="<config>"):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {sec: {k: v[1] for k, v in keys.items()} for sec, keys in SCHEMA.items()}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{sec}]")
            values[sec][key] = _convert(SCHEMA[sec][key][0], raw, f"{source}: [{sec}] {key}")
    if values["run"]["pipeline"] not in PIPELINES:
        raise ConfigError(f"{source}: [run] pipeline must be one of {', '.join(PIPELINES)}")
    if values["run"]["component"] not in (1, 2):
        raise ConfigError(f"{source}: [run] component must be 1 or 2")
    try:
        p = P.ParameterSet(**values["params"])
    except DomainError as exc:
        raise ConfigError(f"{source}: [params] {exc}") from None
    if values["grid"]["n"] < 16:
        raise ConfigError(f"{source}: [grid] n must be at least 16")
    return RunConfig(p, values["grid"], values["tolerances"], values["run"], values["sweep"])


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, source=path)


# ------------------------------------------------------------------ output

def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def dumps(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


class Output:
    """Writes named artifacts into a directory, or the primary one to stdout."""

    def __init__(self, outdir, stdout):
        self.outdir = outdir
        self.stdout = stdout
        if outdir:
            os.makedirs(outdir, exist_ok=True)

    def emit(self, name, text, primary=False):
        if self.outdir:
            with open(os.path.join(self.outdir, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        elif primary:
            self.stdout.write(text)


# ---------------------------------------------------------------- commands

def _quad_check(cfg):
    g = make_grid(cfg.params.radius, cfg.grid["n"])
    exact = OMEGA4 * cfg.params.radius ** 4 / 4.0
    err = abs(g.volume - exact) / exact
    if err > cfg.tolerances["quad_check_tol"]:
        raise NumericError(f"ball volume quadrature off by {err:.3e} (relative)")
    return g


def cmd_classify(cfg, out):
    rep = P.classify(cfg.params)
    out.emit("classify.json", dumps(rep.to_dict()), primary=True)
    return EXIT_OK


def _gate(cfg, rep):
    pipe = cfg.run["pipeline"]
    return P.gate_for_pipeline(rep, pipe, cfg.run["component"])


def run_pipeline(cfg, grid):
    """Runs the configured pipeline and returns a SolveResult."""
    p, run, tol = cfg.params, cfg.run, cfg.tolerances["solver_tol"]
    pipe = run["pipeline"]
    if pipe == "local_ball":
        try:
            rho = P.rho_delta(p, P.ball_geometry(p.radius))[0]
        except PreconditionError:
            rho = P.sobolev_constant() / math.sqrt(max(p.mu1, p.mu2))
        return solvers.minimize_local_ball(p, rho=rho, tol=tol, grid=grid, max_iter=run["max_iter"])
    if pipe == "nehari":
        return solvers.minimize_on_nehari(p, tol=tol, grid=grid, max_iter=run["max_iter"],
                                          ptol=min(cfg.tolerances["projection_tol"], 1e-12))
    if pipe == "mountain_pass":
        return _system_mountain_pass(cfg, grid)
    lam, mu, th = p.component(run["component"])
    mode = pipe[len("single_"):]
    return solvers.solve_single(lam, mu, th, mode, tol=tol, grid=grid,
                                max_iter=run["max_iter"], segments=run["segments"])


def _system_mountain_pass(cfg, grid):
    p, tol = cfg.params, cfg.tolerances["solver_tol"]
    low = None
    if p.theta1 < 0 and p.theta2 < 0:
        try:
            rho = P.rho_delta(p, P.ball_geometry(p.radius))[0]
        except PreconditionError:
            rho = P.sobolev_constant() / math.sqrt(max(p.mu1, p.mu2))
        low = solvers.minimize_local_ball(p, rho=rho, tol=tol, grid=grid)
    end_a, _ = solvers.default_endpoints(p, grid, low)
    end_b, _, _ = solvers.bubble_endpoint(p, end_a)
    path, level = solvers.mountain_pass(p, end_a, end_b, segments=cfg.run["segments"],
                                        max_iter=cfg.run["max_iter"])
    r = solvers.refine_saddle(path, p, tol=tol)
    r.notes.append(f"path level {level!r}")
    r.path_level = level
    return r


def level_bounds(pipeline, r):
    """Upper bounds for the infimum levels that this result provides.

    C_rho: infimum over the ball, C_N: over the Nehari set, C_M: minimax
    over paths, C_K: over fully nontrivial critical points. They are listed
    side by side; nothing here claims two of them coincide.
    """
    out = {}
    if pipeline.startswith("single_"):
        return out
    if pipeline == "local_ball":
        out["C_rho"] = r.energy
    elif pipeline == "nehari":
        out["C_N"] = r.energy
    elif pipeline == "mountain_pass":
        out["C_M"] = getattr(r, "path_level", None)
    pos = r.positivity
    if r.converged and pos["u_min_interior"] > solvers.POSITIVE and pos["v_min_interior"] > solvers.POSITIVE:
        out["C_K"] = r.energy
    return out


def cmd_solve(cfg, out, force=False):
    force = force or cfg.run["force"]
    rep = P.classify(cfg.params)
    gate = _gate(cfg, rep)
    if not gate and not force:
        sys.stderr.write(f"hypothesis gate for {cfg.run['pipeline']} failed; "
                         f"applicable: {', '.join(sorted(set(rep.theorem_ids()))) or 'none'}\n")
        return EXIT_GATE
    grid = _quad_check(cfg)
    r = run_pipeline(cfg, grid)
    if not gate:
        r.hypotheses = "hypotheses unmet"
    doc = {"pipeline": cfg.run["pipeline"], "gate": gate, "params": cfg.params.to_dict(),
           "result": r.to_dict(), "upper_bounds": level_bounds(cfg.run["pipeline"], r),
           "label": "radial candidate"}
    out.emit("result.json", dumps(doc), primary=True)
    buf = io.StringIO()
    solvers.write_trace(buf, r)
    out.emit("trace.csv", buf.getvalue())
    buf = io.StringIO()
    X = r.array()
    cols = {"u": X[0]} if X.shape[0] == 1 else {"u": X[0], "v": X[1]}
    fields_to_csv(buf, grid, **cols)
    out.emit("fields.csv", buf.getvalue())
    if not r.converged:
        sys.stderr.write("solver did not converge\n")
        return EXIT_NUMERIC
    return EXIT_OK


def _axis_values(ax):
    name, a, b, n = ax
    return name, (np.linspace(a, b, n).tolist() if n > 1 else [a])


def _sweep_point(args):
    cfg, values = args
    head = [values[k] for k in values]
    width = len(GATE_COLUMNS) + len(MARGIN_COLUMNS) + (len(SOLVE_COLUMNS) if cfg.sweep.get("solve") else 0)
    try:
        p = replace(cfg.params, **values)
    except DomainError:
        # e.g. beta = 0 on the axis: not a valid parameter set, leave the row blank
        return head + [None] * width
    rep = P.classify(p)
    ids = set(rep.theorem_ids())
    th = rep.thresholds
    row = [1 if g in ids else 0 for g in GATE_COLUMNS]
    dc = rep.domain
    margins = {k: th.get(k) for k in ("beta1", "beta2", "Lambda", "A_level", "rho", "delta")}
    margins["beta1_margin"] = th["beta1"] - p.beta
    margins["beta2_margin"] = None if th["beta2"] is None else p.beta - th["beta2"]
    for i in (1, 2):
        sm = P.sigma_margins(*p.component(i), dc)
        for k in ("Sigma1", "Sigma2", "Sigma3", "Sigma4"):
            margins[f"{k}_{i}"] = sm[k]
    margins.update(P.a_margins((p.lambda1, p.lambda2), (p.mu1, p.mu2), (p.theta1, p.theta2), dc))
    for key, mir in (("t17_margin", False), ("t17_mirror_margin", True)):
        margins[key] = P.t17_margin(p, mir) if P.t17_admissible(p, mir) else None
    row += [margins[k] for k in MARGIN_COLUMNS]
    if cfg.sweep.get("solve"):
        sub = replace(cfg, params=p)
        try:
            r = run_pipeline(sub, make_grid(p.radius, cfg.grid["n"]))
            row += [r.energy, r.converged, r.gradient_norm]
        except (NumericError, PreconditionError):
            row += [None, False, None]
    return head + row


def sweep_rows(cfg, workers=1):
    axes = [cfg.sweep.get(k) for k in ("axis1", "axis2") if cfg.sweep.get(k)]
    if len(axes) > 2:
        raise ConfigError("at most two sweep axes")
    named = [_axis_values(ax) for ax in axes]
    if len({n for n, _ in named}) < len(named):
        raise ConfigError("sweep axes must name different fields")
    points = [dict(zip([n for n, _ in named], combo))
              for combo in itertools.product(*[v for _, v in named])]
    # lexicographic by axis values
    points.sort(key=lambda d: tuple(d.values()))
    jobs = [(cfg, pt) for pt in points]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    header = [n for n, _ in named] + [f"gate:{g}" for g in GATE_COLUMNS] + MARGIN_COLUMNS
    if cfg.sweep.get("solve"):
        header += SOLVE_COLUMNS
    return header, rows


def cmd_sweep(cfg, out, workers=None):
    workers = cfg.sweep.get("workers", 1) if workers is None else workers
    header, rows = sweep_rows(cfg, workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    out.emit("sweep.csv", buf.getvalue(), primary=True)
    return EXIT_OK


def cmd_bubbles(cfg, out):
    p = cfg.params
    grid = _quad_check(cfg)
    r_cut = cfg.run["r_cut"] if cfg.run["r_cut"] is not None else p.radius / 4
    rows, notes = B.asymptotics_table(cfg.run["eps_list"], grid, r_cut)
    for n in notes:
        sys.stderr.write(n + "\n")
    buf = io.StringIO()
    B.write_table(buf, rows)
    out.emit("bubbles.csv", buf.getvalue(), primary=True)
    if cfg.run["gap_reports"]:
        gaps = {"notes": list(notes)}
        eps = [e for e in cfg.run["eps_list"] if e < r_cut]
        for name, fn in (("prop26", lambda: B.gap_report_prop26(p, eps, grid, r_cut=r_cut)),
                         ("prop28", lambda: B.gap_report_prop28(p, eps, grid, r_cut=r_cut)),
                         ("prop28_ray", lambda: B.gap_report_prop28(p, eps, grid, variant="ray"))):
            try:
                gaps[name] = fn()
            except PreconditionError as exc:
                gaps[name] = {"skipped": str(exc)}
        out.emit("gaps.json", dumps(gaps))
    return EXIT_OK


def cmd_battery(cfg, out):
    p = cfg.params
    dc = P.ball_geometry(p.radius)
    verdicts = []
    for i in (1, 2):
        lam, mu, th = p.component(i)
        if th < 0 and p.beta > 0:
            v = NX.theorem16_condition(lam, mu, th, dc)
            verdicts.append(dict(v.to_dict(), component=i))
    for mir in (False, True):
        if P.t17_admissible(p, mir):
            verdicts.append(NX.theorem17_condition(p, mirrored=mir).to_dict())
    rep = NX.falsification_battery(p, cfg.run["restarts"], seed=cfg.run["seeds"][0],
                                   n=cfg.grid["n"])
    doc = {"params": p.to_dict(), "verdicts": verdicts,
           "probe_summary": {"restarts": rep["restarts"], "positive_hits": rep["positive_hits"]},
           "attempts": rep["attempts"],
           "hits": [{k: v for k, v in h.items() if k != "state"} for h in rep["hits"]]}
    out.emit("battery.json", dumps(doc), primary=True)
    buf = io.StringIO()
    NX.write_hits_csv(buf, rep)
    out.emit("battery_hits.csv", buf.getvalue())
    return EXIT_OK


def schema_text():
    doc = {"config": {sec: {k: {"type": t, "default": d, "help": h} for k, (t, d, h) in keys.items()}
                      for sec, keys in SCHEMA.items()},
           "csv": CSV_SCHEMA,
           "exit_codes": {"0": "success", "2": "config error", "3": "hypothesis gate failed",
                          "4": "numeric failure"}}
    return dumps(doc)


COMMANDS = {"classify": cmd_classify, "solve": cmd_solve, "sweep": cmd_sweep,
            "bubbles": cmd_bubbles, "battery": cmd_battery}


def build_parser():
    ap = argparse.ArgumentParser(prog="logcrit", description=__doc__.splitlines()[0])
    ap.add_argument("--schema", action="store_true", help="print config keys and CSV columns")
    ap.add_argument("command", nargs="?", choices=sorted(COMMANDS))
    ap.add_argument("config", nargs="?")
    ap.add_argument("--out", help="directory for output files (default: primary output to stdout)")
    ap.add_argument("--force", action="store_true", help="solve even if the gate fails")
    ap.add_argument("--workers", type=int, help="sweep processes (overrides the config)")
    return ap


def main(argv=None, stdout=None):
    stdout = sys.stdout if stdout is None else stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.schema:
        stdout.write(schema_text())
        return EXIT_OK
    if not args.command or not args.config:
        sys.stderr.write("need a command and a config file (or --schema)\n")
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        out = Output(args.out, stdout)
        fn = COMMANDS[args.command]
        if args.command == "solve":
            return fn(cfg, out, force=args.force)
        if args.command == "sweep":
            return fn(cfg, out, workers=args.workers)
        return fn(cfg, out)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (PreconditionError, DomainError) as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return EXIT_GATE
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
