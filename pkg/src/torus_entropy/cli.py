"""Command-line entry point: ``torus-entropy <group> <command> [flags]``.

Every command prints a short summary and, with ``--out DIR``, writes a
deterministic ``report.json`` plus one CSV per data series.  Wall-clock
timings go to a separate ``timing.json`` so the report itself is
byte-stable.  Exit codes: 0 all checks pass, 1 a check failed, 2 bad input (including
parameters outside a formula's domain).
"""
import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, bounds, entropy, hyperbolic, loops
from .geodesics import GeodesicError, PhaseState, find_chords, integrate
from .metric import (D_of_g, MetricField, NeckSpec, area, build_neck_metric, c0_distance,
                     check_retractable, eval_metric, metric_from_config)


class InputError(Exception):
    """Bad config or missing file; maps to exit code 2."""


@dataclass
class RunReport:
    command: str
    inputs: dict
    results: dict
    checks: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    version: str = __version__
    timing: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self):
        return {"command": self.command, "inputs": self.inputs, "results": self.results,
                "checks": self.checks, "passed": self.passed, "series": self.series,
                "version": self.version}

    def to_json(self):
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text, timing=None):
        d = json.loads(text)
        return cls(d["command"], d["inputs"], d["results"], d["checks"], d["series"],
                   d["version"], timing or {})


def _plain(x):
    """JSON-ready copy with numpy scalars and arrays converted."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _series(columns, rows):
    return {"columns": list(columns), "rows": [list(map(_plain, r)) for r in rows]}


def _growth(s):
    return _series(["T", "count", "log_count"], s.rows())


def emit_plotdata(report, out_dir):
    """Write one CSV per series; returns the notices for skipped empty series."""
    os.makedirs(out_dir, exist_ok=True)
    notices = []
    for name in sorted(report.series):
        s = report.series[name]
        if not s["rows"]:
            notices.append(f"series {name!r} is empty, skipped")
            continue
        with open(os.path.join(out_dir, f"{name}.csv"), "w", newline="") as fh:
            fh.write(",".join(s["columns"]) + "\n")
            for row in s["rows"]:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    return notices


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_report(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(report.to_json())
    with open(os.path.join(out_dir, "timing.json"), "w") as fh:
        fh.write(json.dumps(report.timing, indent=2, sort_keys=True) + "\n")
    return emit_plotdata(report, out_dir)


# -- input helpers ----------------------------------------------------------

def _read_json(path):
    if not os.path.isfile(path):
        raise InputError(f"{path}: file not found")
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text), text
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}: {e.msg}") from None


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return i
    return 1


def load_metric(path):
    if path is None:
        return MetricField.flat(8), {"type": "flat", "resolution": 8}
    cfg, text = _read_json(path)
    try:
        return metric_from_config(cfg), cfg
    except (ValueError, KeyError, TypeError) as e:
        key = e.args[0] if isinstance(e, KeyError) else "type"
        raise InputError(f"{path}: line {_line_of(text, key)}: invalid metric config: {e}") from None


# -- experiments (shared by subcommands and `experiment run`) -------------------

def exp_spectrum(m, winding=(1, 0), delta=0.02, n_trials=20, seed=0, n_starts=4):
    rep = loops.spectrum_persistence_experiment(m, tuple(winding), delta, n_trials, seed, n_starts)
    rows = [(t["trial"], t["delta"], t["energy"], t["fresh_energy"], t["within"], t["jump"])
            for t in rep.trials]
    return ({"energy": rep.energy, "band": list(rep.band), "all_within": rep.all_within,
             "jumps": sum(t["jump"] for t in rep.trials)},
            {"energy_in_band": rep.all_within},
            {"spectrum": _series(["trial", "delta", "energy", "fresh_energy", "within", "jump"], rows)})


HEAD_CLASSES = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2), (3, 1), (1, 3)]


def head_encircling_loop(center, winding, radius, M=384):
    """Straight loop through ``center`` with one full turn around it at ``radius``."""
    c = np.asarray(center, float)
    w = np.asarray(winding, float)
    n = np.linalg.norm(w)
    u = w / n
    circ = 2 * np.pi * radius
    s = np.arange(M) / M * (n + circ)
    base = np.arctan2(-u[1], -u[0])
    pts = np.empty((M, 2))
    for i, si in enumerate(s):
        if si < 0.5 * n - radius:
            pts[i] = c - (0.5 * n - si) * u
        elif si < 0.5 * n - radius + circ:
            a = (si - (0.5 * n - radius)) / radius
            pts[i] = c + radius * np.array([np.cos(base - a), np.sin(base - a)])
        else:
            pts[i] = c + (si - (0.5 * n - radius) - circ + radius) * u
    return loops.DiscreteLoop(pts, tuple(int(v) for v in winding))


def exp_neck(spec_kw=None, C=None, classes=HEAD_CLASSES, max_iters=20000):
    """Neck certificate pipeline; ``C`` defaults to the midpoint of the admissible range."""
    spec = NeckSpec(**(spec_kw or {}))
    m = build_neck_metric(MetricField.flat(8), spec)
    rep = check_retractable(m, spec)
    center = np.array(spec.centers[0])
    project = loops.disc_avoider(spec.centers, spec.r_U)
    rows = []
    outside = True
    for w in classes:
        lp = head_encircling_loop(center, w, 0.5 * (spec.r_U + spec.r_V1))
        res = loops.shorten(m, lp, max_iters=max_iters, project=project)
        d = res.loop.vertices - center
        d -= np.floor(d + 0.5)
        rmin = float(np.hypot(d[:, 0], d[:, 1]).min())
        ok = rmin > spec.r_V1
        outside &= ok
        rows.append((w[0], w[1], res.length, res.iterations, res.converged, rmin, ok))
    A = area(m)
    L = 2 * np.pi * spec.r_W
    M = bounds.generator_bound_M(L, A)
    gamma0, n_best = bounds.growth_from_generators_sup(M)
    C_max = bounds.neck_C_max(spec.c, spec.k)
    if C is None:
        C = 0.5 * (1.0 + C_max)
    h = bounds.neck_entropy_bound(C, gamma0)
    results = {"neck": rep.to_dict(), "area": A, "M": M, "gamma0": gamma0, "n_best": n_best,
               "C": C, "C_max": C_max, "entropy_bound": h}
    checks = {"retractable_margin_2x": bool(rep.retractable and rep.margin >= 2.0),
              "minimizers_outside_V1": bool(outside),
              "C_admissible": bool(1 < C < C_max),
              "certificate_positive": bool(h > 0)}
    series = {"neck_minimizers": _series(["p", "q", "length", "iterations", "converged",
                                          "min_radius", "outside_V1"], rows)}
    return results, checks, series


def exp_mane(m, T_max=10.0, n_pairs=32, n_angles=1024, seed=0, expect_below=None):
    h, s = entropy.mane_estimate(m, T_max, n_pairs, n_angles, seed)
    checks = {} if expect_below is None else {"mane_below": bool(h < expect_below)}
    return {"h_mane": h, "meta": s.meta}, checks, {"mane": _growth(s)}


def exp_hvol(m, R_max=8.0, lattice_h=1 / 64, expect_below=None):
    h, s = entropy.volume_entropy_estimate(m, R_max, lattice_h)
    checks = {} if expect_below is None else {"hvol_below": bool(h < expect_below)}
    meta = dict(s.meta)
    meta.pop("volume", None)
    return {"h_vol": h, "meta": meta}, checks, {"hvol": _growth(s)}


def exp_teichmuller(a_values, b_values, gamma_values):
    rows, excluded = hyperbolic.teichmuller_scan(a_values, b_values, gamma_values)
    return ({"rows": len(rows), "excluded": excluded}, {"threshold_monotone": True},
            {"teichmuller": _series(["a", "b", "gamma", "L", "h_star"], rows)})


def exp_ribbon(m, loop_files, offsets=None, expect=None):
    lps = [loops.load_loop(f) for f in loop_files]
    rep = loops.check_ribbon(m, lps, offsets)
    results = {"is_ribbon": rep.is_ribbon, "intersections": rep.intersections.tolist(),
               "embedded": rep.embedded, "positions": rep.positions, "reasons": rep.reasons,
               "indeterminate": rep.indeterminate}
    checks = {} if expect is None else {"ribbon_as_expected": rep.is_ribbon == expect}
    return results, checks, {}


def exp_bounds(evaluations):
    results = []
    checks = {}
    for i, ev in enumerate(evaluations):
        fn = bounds.FORMULAS[ev["formula"]]
        v = fn(**ev.get("args", {}))
        results.append({"formula": ev["formula"], "args": ev.get("args", {}), "value": v})
        if "expect_ge" in ev:
            checks[f"{i}:{ev['formula']}>={ev['expect_ge']}"] = bool(v >= ev["expect_ge"])
    return {"evaluations": results}, checks, {}


EXPERIMENTS = {
    "spectrum": (exp_spectrum, {"winding", "delta", "n_trials", "seed", "n_starts"}, True),
    "neck": (exp_neck, {"spec_kw", "C", "classes", "max_iters"}, False),
    "mane": (exp_mane, {"T_max", "n_pairs", "n_angles", "seed", "expect_below"}, True),
    "hvol": (exp_hvol, {"R_max", "lattice_h", "expect_below"}, True),
    "teichmuller": (exp_teichmuller, {"a_values", "b_values", "gamma_values"}, False),
    "ribbon": (exp_ribbon, {"loop_files", "offsets", "expect"}, True),
    "bounds": (exp_bounds, {"evaluations"}, False),
}

SEEDED = {"spectrum", "mane"}


def validate_config(cfg, text, path):
    allowed = {"experiment", "metric", "metric_file", "params", "out"}
    if not isinstance(cfg, dict):
        raise InputError(f"{path}: line 1: config must be a JSON object")
    for k in cfg:
        if k not in allowed:
            raise InputError(f"{path}: line {_line_of(text, k)}: unknown key {k!r}")
    name = cfg.get("experiment")
    if name not in EXPERIMENTS:
        raise InputError(f"{path}: line {_line_of(text, 'experiment')}: unknown experiment {name!r}")
    fn, keys, needs_metric = EXPERIMENTS[name]
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise InputError(f"{path}: line {_line_of(text, 'params')}: params must be an object")
    for k in params:
        if k not in keys:
            raise InputError(f"{path}: line {_line_of(text, k)}: unknown parameter {k!r} for {name}")
    if name in SEEDED and "seed" not in params:
        raise InputError(f"{path}: line {_line_of(text, 'params')}: experiment {name} needs an explicit seed")
    if "metric" in cfg and "metric_file" in cfg:
        raise InputError(f"{path}: line {_line_of(text, 'metric_file')}: give metric or metric_file, not both")
    base = os.path.dirname(os.path.abspath(path))
    if "metric_file" in cfg:
        mf = os.path.join(base, cfg["metric_file"])
        if not os.path.isfile(mf):
            raise InputError(f"{path}: line {_line_of(text, 'metric_file')}: metric file {mf} not found")
    for f in params.get("loop_files", []):
        if not os.path.isfile(os.path.join(base, f)):
            raise InputError(f"{path}: line {_line_of(text, 'loop_files')}: loop file {f} not found")
    return name, fn, params, needs_metric, base


def run(config_path, out=None):
    """Execute the experiment described by a JSON config; returns the RunReport."""
    cfg, text = _read_json(config_path)
    name, fn, params, needs_metric, base = validate_config(cfg, text, config_path)
    params = dict(params)
    args = []
    if needs_metric:
        if "metric_file" in cfg:
            m, mcfg = load_metric(os.path.join(base, cfg["metric_file"]))
        else:
            mcfg = cfg.get("metric", {"type": "flat", "resolution": 8})
            try:
                m = metric_from_config(mcfg)
            except (ValueError, KeyError, TypeError) as e:
                raise InputError(f"{config_path}: line {_line_of(text, 'metric')}: {e}") from None
        args.append(m)
    if "loop_files" in params:
        params["loop_files"] = [os.path.join(base, f) for f in params["loop_files"]]
    t0 = time.perf_counter()
    results, checks, series = fn(*args, **params)
    report = RunReport(f"experiment {name}", _plain(cfg), _plain(results), checks, series,
                       timing={"seconds": time.perf_counter() - t0})
    out = out or cfg.get("out")
    if out:
        if not os.path.isabs(out):
            out = os.path.join(base, out)
        for note in write_report(report, out):
            print(note)
    return report


# -- subcommands ------------------------------------------------------------------

def _finish(args, command, inputs, results, checks=None, series=None, lines=(), t0=None):
    report = RunReport(command, _plain(inputs), _plain(results), checks or {}, series or {},
                       timing={"seconds": time.perf_counter() - t0} if t0 else {})
    for line in lines:
        print(line)
    for k, v in report.checks.items():
        print(f"{k}: {'PASS' if v else 'FAIL'}")
    if args.out:
        for note in write_report(report, args.out):
            print(note)
    return 0 if report.passed else 1


def cmd_metric(args):
    t0 = time.perf_counter()
    if args.cmd == "neck":
        kw = {}
        if args.spec:
            kw, _ = _read_json(args.spec)
            if "centers" in kw:
                kw["centers"] = tuple(map(tuple, kw["centers"]))
        base, _ = load_metric(args.metric)
        spec = NeckSpec(**kw)
        m = build_neck_metric(base, spec)
        rep = check_retractable(m, spec)
        d = rep.to_dict()
        print(json.dumps(_plain(d), indent=2, sort_keys=True))
        return _finish(args, "metric neck", {"spec": kw}, d, {"retractable": rep.retractable}, t0=t0)
    m, cfg = load_metric(args.metric)
    if args.cmd == "info":
        flat = MetricField.flat(m.resolution)
        res = {"resolution": m.resolution, "D": D_of_g(m), "c0_to_flat": c0_distance(m, flat),
               "area": area(m)}
        lines = [f"{k} = {v}" for k, v in res.items()]
    else:
        g = eval_metric(m, args.point)
        res = {"point": args.point, "g": g.tolist()}
        lines = [f"g = {g.tolist()}"]
    return _finish(args, f"metric {args.cmd}", {"metric": cfg}, res, lines=lines, t0=t0)


def cmd_geodesic(args):
    t0 = time.perf_counter()
    m, cfg = load_metric(args.metric)
    if args.cmd == "shoot":
        s0 = PhaseState.from_angle(m, (args.x, args.y), args.theta)
        try:
            tr = integrate(m, s0, args.T, args.h)
        except GeodesicError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        drift = tr.speed_drift(m)
        every = max(1, len(tr.states) // 2000)
        rows = [(t, *s) for t, s in zip(tr.times[::every], tr.states[::every])]
        return _finish(args, "geodesic shoot", {"metric": cfg, "x": args.x, "y": args.y,
                                                 "theta": args.theta, "T": args.T, "h": args.h},
                       {"final": tr.states[-1].tolist(), "speed_drift": drift},
                       series={"trajectory": _series(["t", "x", "y", "vx", "vy"], rows)},
                       lines=[f"final = {tr.states[-1].tolist()}", f"speed drift = {drift:.3e}"],
                       t0=t0)
    cs = find_chords(m, args.p, args.q, args.T, args.n_angles)
    return _finish(args, "geodesic chords", {"metric": cfg, "p": args.p, "q": args.q, "T": args.T,
                                              "n_angles": args.n_angles},
                   {"count": cs.count(), "dropped": cs.dropped, "overflow": cs.overflow},
                   series={"chords": _series(["angle", "length", "m", "n"], cs.rows())},
                   lines=[f"chords = {cs.count()}", f"dropped = {cs.dropped}"], t0=t0)


def cmd_loop(args):
    t0 = time.perf_counter()
    m, cfg = load_metric(args.metric)
    if args.cmd == "ribbon":
        for f in args.loops:
            if not os.path.isfile(f):
                raise InputError(f"{f}: file not found")
        try:
            lps = [loops.load_loop(f) for f in args.loops]
        except ValueError as e:
            raise InputError(str(e)) from None
        rep = loops.check_ribbon(m, lps)
        res = {"is_ribbon": rep.is_ribbon, "intersections": rep.intersections.tolist(),
               "reasons": rep.reasons}
        return _finish(args, "loop ribbon", {"metric": cfg, "loops": args.loops}, res,
                       lines=[f"is_ribbon = {rep.is_ribbon}",
                              f"intersections = {rep.intersections.tolist()}"], t0=t0)
    if args.cmd == "shorten":
        if not os.path.isfile(args.loop):
            raise InputError(f"{args.loop}: file not found")
        try:
            lp = loops.load_loop(args.loop)
        except ValueError as e:
            raise InputError(str(e)) from None
        res = loops.shorten(m, lp, max_iters=args.max_iters, grad_tol=args.grad_tol)
        out_loop = res.loop
        results = {"length": res.length, "energy": res.energy, "iterations": res.iterations,
                   "converged": res.converged, "collapsed": res.collapsed}
        inputs = {"metric": cfg, "loop": args.loop, "max_iters": args.max_iters,
                  "grad_tol": args.grad_tol}
    else:
        out_loop, length = loops.min_length_in_class(m, tuple(args.winding), args.starts, args.seed)
        results = {"length": length, "energy": loops.loop_energy(m, out_loop)}
        inputs = {"metric": cfg, "winding": args.winding, "starts": args.starts, "seed": args.seed}
    code = _finish(args, f"loop {args.cmd}", inputs, results,
                   series={"loop": _series(["x", "y"], out_loop.vertices.tolist())},
                   lines=[f"{k} = {v}" for k, v in results.items()], t0=t0)
    if args.out:
        loops.save_loop(os.path.join(args.out, "loop_out.csv"), out_loop)
    return code


def cmd_entropy(args):
    t0 = time.perf_counter()
    if args.cmd == "count":
        r = entropy.count_free_group(args.n)
        res = {"n": r.n, "words": r.words, "conj_classes": r.conj_classes,
               "bound_8_3n": r.bound_8_3n, "bound_2n": r.bound_2n}
        return _finish(args, "entropy count", {"n": args.n}, res,
                       {"conj_ge_8_3n": r.n < 2 or r.conj_classes >= r.bound_8_3n,
                        "conj_ge_2n": r.n < 2 or r.conj_classes >= r.bound_2n},
                       lines=[f"{k} = {v}" for k, v in res.items()], t0=t0)
    m, cfg = load_metric(args.metric)
    if args.cmd == "mane":
        res, checks, series = exp_mane(m, args.T_max, args.pairs, args.n_angles, args.seed)
        lines = [f"h_mane = {res['h_mane']:.6f}"]
        inputs = {"metric": cfg, "T_max": args.T_max, "pairs": args.pairs,
                  "n_angles": args.n_angles, "seed": args.seed}
    elif args.cmd == "hvol":
        res, checks, series = exp_hvol(m, args.R_max, args.lattice_h)
        lines = [f"h_vol = {res['h_vol']:.6f}"]
        inputs = {"metric": cfg, "R_max": args.R_max, "lattice_h": args.lattice_h}
    else:
        sizes, ser = entropy.separated_set_estimate(m, args.delta, args.k_max, args.orbits, args.seed)
        rows = [(k + 1, int(s), float(v)) for k, (s, v) in enumerate(zip(sizes, ser))]
        res, checks = {"sizes": sizes.tolist(), "rates": ser.tolist()}, {}
        series = {"separated": _series(["k", "size", "log_size_over_k"], rows)}
        lines = [f"log|set|/k at k={args.k_max}: {ser[-1]:.6f}"]
        inputs = {"metric": cfg, "delta": args.delta, "k_max": args.k_max, "orbits": args.orbits,
                  "seed": args.seed}
    return _finish(args, f"entropy {args.cmd}", inputs, res, checks, series, lines, t0)


def cmd_bounds(args):
    t0 = time.perf_counter()
    checks = {}
    extra = []
    if args.cmd == "dm1":
        inputs = {"D": args.D, "l": args.length, "delta": args.delta, "bumpy": args.bumpy}
        v = bounds.dm_bound_1(args.D, args.length, args.delta, args.bumpy)
    elif args.cmd == "dm2":
        inputs = {"A": args.area, "l": args.length, "bumpy": args.bumpy}
        v = bounds.dm_bound_2(args.area, args.length, args.bumpy)
        extra = [f"≥ 1/20: {'PASS' if v >= 0.05 else 'FAIL'}"]
    elif args.cmd == "ribbon":
        inputs = {"lengths": args.lengths}
        v = bounds.ribbon_bound(*args.lengths)
    elif args.cmd == "neck":
        inputs = {"c": args.c, "k": args.k}
        v = bounds.neck_C_max(args.c, args.k)
        if args.C is not None:
            inputs.update(C=args.C, gamma0=args.gamma0)
            checks["C_admissible"] = bool(1 < args.C < v)
            extra = [f"entropy bound = {bounds.neck_entropy_bound(args.C, args.gamma0):.6f}"]
    elif args.cmd == "rs":
        inputs = {"s": args.s}
        v = bounds.radius_r(args.s)
    else:
        inputs = {"L": args.L, "A": args.area}
        v = bounds.generator_bound_M(args.L, args.area)
    return _finish(args, f"bounds {args.cmd}", inputs, {"value": v, "formula_id": args.cmd},
                   checks, lines=[f"{v:.6f}"] + extra, t0=t0)


def _grid(spec):
    lo, hi, n = spec
    return np.linspace(lo, hi, int(n)).tolist()


def cmd_hyp(args):
    t0 = time.perf_counter()
    if args.cmd == "pentagon":
        L = hyperbolic.boundary_lengths(hyperbolic.PentagonParams(args.a, args.b, args.gamma))
        res = dict(zip(["L1", "L2", "L3", "L4", "L"], L))
        inputs = {"a": args.a, "b": args.b, "gamma": args.gamma}
        return _finish(args, "hyp pentagon", inputs, res,
                       lines=[f"{k} = {v:.6f}" for k, v in res.items()], t0=t0)
    if args.cmd == "entropy":
        h = hyperbolic.entropy_lower_bound(args.a, args.b)
        return _finish(args, "hyp entropy", {"a": args.a, "b": args.b}, {"h_star": h},
                       lines=[f"{h:.10f}"], t0=t0)
    if args.cmd == "hdim":
        p = hyperbolic.SchottkyParams(args.a)
        f = hyperbolic.schottky_hdim_formula(args.a)
        o = hyperbolic.limit_set_dimension_oracle(p, args.depth)
        c = hyperbolic.critical_exponent(p, args.depth)
        res = {"formula": f, "box_counting": o, "critical_exponent": c}
        return _finish(args, "hyp hdim", {"a": args.a, "depth": args.depth}, res,
                       lines=[f"{k} = {v:.6f}" for k, v in res.items()], t0=t0)
    res, checks, series = exp_teichmuller(_grid(args.a_grid), _grid(args.b_grid),
                                          _grid(args.gamma_grid))
    return _finish(args, "hyp scan", {"a": args.a_grid, "b": args.b_grid, "gamma": args.gamma_grid},
                   res, checks, series, [f"rows = {res['rows']}, excluded = {res['excluded']}"], t0)


def cmd_experiment(args):
    if args.cmd == "run":
        report = run(args.config, args.out)
        for k, v in report.results.items():
            if not isinstance(v, (dict, list)):
                print(f"{k} = {v}")
        for k, v in report.checks.items():
            print(f"{k}: {'PASS' if v else 'FAIL'}")
        return 0 if report.passed else 1
    t0 = time.perf_counter()
    m, cfg = load_metric(args.metric)
    res, checks, series = exp_spectrum(m, args.winding, args.delta, args.trials, args.seed)
    inputs = {"metric": cfg, "winding": args.winding, "delta": args.delta, "trials": args.trials,
              "seed": args.seed}
    return _finish(args, "experiment spectrum", inputs, res, checks, series,
                   [f"E = {res['energy']:.12f}", f"band = {res['band']}"], t0)


def build_parser():
    P = argparse.ArgumentParser(prog="torus-entropy", description=__doc__.splitlines()[0])
    P.add_argument("--out", help="directory for report.json and CSV series")
    G = P.add_subparsers(dest="group", required=True)

    def sub(group, help_):
        g = G.add_parser(group, help=help_)
        return g.add_subparsers(dest="cmd", required=True)

    def with_metric(p):
        p.add_argument("--metric", help="metric JSON config (default: flat)")
        return p

    s = sub("metric", "metric fields and necks")
    with_metric(s.add_parser("info", help="D(g), distance to flat, area"))
    e = with_metric(s.add_parser("eval", help="metric at a point"))
    e.add_argument("--point", type=float, nargs=2, required=True)
    n = with_metric(s.add_parser("neck", help="build a neck on --metric and check it"))
    n.add_argument("--spec", help="JSON file with NeckSpec fields")

    s = sub("geodesic", "geodesic flow")
    sh = with_metric(s.add_parser("shoot", help="integrate one unit-speed geodesic"))
    sh.add_argument("--x", type=float, default=0.0)
    sh.add_argument("--y", type=float, default=0.0)
    sh.add_argument("--theta", type=float, default=0.0)
    sh.add_argument("--T", type=float, default=10.0)
    sh.add_argument("--h", type=float, default=1e-3)
    ch = with_metric(s.add_parser("chords", help="geodesic chords from p to q"))
    ch.add_argument("--p", type=float, nargs=2, default=[0.0, 0.0])
    ch.add_argument("--q", type=float, nargs=2, default=[0.0, 0.0])
    ch.add_argument("--T", type=float, default=5.0)
    ch.add_argument("--n-angles", type=int, default=4096)

    s = sub("loop", "closed loops")
    lp = with_metric(s.add_parser("shorten", help="shorten a loop from a CSV file"))
    lp.add_argument("loop")
    lp.add_argument("--max-iters", type=int, default=10000)
    lp.add_argument("--grad-tol", type=float, default=1e-9)
    mn = with_metric(s.add_parser("minimize", help="shortest loop in a winding class"))
    mn.add_argument("--winding", type=int, nargs=2, required=True)
    mn.add_argument("--starts", type=int, default=8)
    mn.add_argument("--seed", type=int, default=0)
    rb = with_metric(s.add_parser("ribbon", help="check four loop CSV files for the ribbon pattern"))
    rb.add_argument("loops", nargs=4)

    s = sub("entropy", "entropy estimators and counts")
    mn = with_metric(s.add_parser("mane", help="chord-counting estimate"))
    mn.add_argument("--T-max", type=float, default=10.0)
    mn.add_argument("--pairs", type=int, default=32)
    mn.add_argument("--n-angles", type=int, default=1024)
    mn.add_argument("--seed", type=int, default=0)
    hv = with_metric(s.add_parser("hvol", help="ball-volume growth estimate"))
    hv.add_argument("--R-max", type=float, default=8.0)
    hv.add_argument("--lattice-h", type=float, default=1 / 64)
    sp = with_metric(s.add_parser("sep", help="greedy separated sets"))
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--k-max", type=int, default=10)
    sp.add_argument("--orbits", type=int, default=400)
    sp.add_argument("--seed", type=int, default=0)
    ct = s.add_parser("count", help="free-group word and class counts")
    ct.add_argument("--n", type=int, required=True)

    s = sub("bounds", "closed-form bounds")
    b = s.add_parser("dm1")
    b.add_argument("--D", type=float, required=True)
    b.add_argument("--length", type=float, required=True)
    b.add_argument("--delta", type=float, default=0.0)
    b2 = s.add_parser("dm2")
    b2.add_argument("--area", type=float, required=True)
    b2.add_argument("--length", type=float, required=True)
    for p in (b, b2):
        x = p.add_mutually_exclusive_group()
        x.add_argument("--bumpy", action="store_true")
        x.add_argument("--degenerate", action="store_true", help="general case (default)")
    r = s.add_parser("ribbon")
    r.add_argument("--lengths", type=float, nargs=4, required=True)
    nk = s.add_parser("neck")
    nk.add_argument("--c", type=float, required=True)
    nk.add_argument("--k", type=float, required=True)
    nk.add_argument("--C", type=float)
    nk.add_argument("--gamma0", type=float, default=0.0)
    rs = s.add_parser("rs")
    rs.add_argument("--s", type=float, required=True)
    M = s.add_parser("M")
    M.add_argument("--L", type=float, required=True)
    M.add_argument("--area", type=float, required=True)

    s = sub("hyp", "one-holed hyperbolic tori")
    pe = s.add_parser("pentagon")
    pe.add_argument("--a", type=float, required=True)
    pe.add_argument("--b", type=float, required=True)
    pe.add_argument("--gamma", type=float, default=math.pi / 2)
    en = s.add_parser("entropy")
    en.add_argument("--a", type=float, required=True)
    en.add_argument("--b", type=float, required=True)
    hd = s.add_parser("hdim")
    hd.add_argument("--a", type=float, required=True)
    hd.add_argument("--depth", type=int, default=10)
    sc = s.add_parser("scan")
    sc.add_argument("--a-grid", type=float, nargs=3, default=[1.0, 6.0, 11], metavar=("LO", "HI", "N"))
    sc.add_argument("--b-grid", type=float, nargs=3, default=[1.0, 6.0, 11], metavar=("LO", "HI", "N"))
    sc.add_argument("--gamma-grid", type=float, nargs=3, default=[0.3, 2.8, 6],
                    metavar=("LO", "HI", "N"))

    s = sub("experiment", "configured experiments")
    ru = s.add_parser("run", help="run a JSON experiment config")
    ru.add_argument("config")
    sp = with_metric(s.add_parser("spectrum", help="energy persistence under perturbations"))
    sp.add_argument("--winding", type=int, nargs=2, default=[1, 0])
    sp.add_argument("--delta", type=float, default=0.02)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    return P


HANDLERS = {"metric": cmd_metric, "geodesic": cmd_geodesic, "loop": cmd_loop,
            "entropy": cmd_entropy, "bounds": cmd_bounds, "hyp": cmd_hyp,
            "experiment": cmd_experiment}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.group](args)
    except (InputError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except AssertionError as e:
        print(f"assertion failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
