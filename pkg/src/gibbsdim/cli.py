"""Configuration-driven experiment runner.

Every command reads one YAML config (fail-closed), writes one CSV sweep
with a `#` comment header, one JSON summary, and a run manifest beside
them, and returns a taxonomy exit code: 0 success, 2 invalid config,
3 admissibility failure, 4 numerical non-convergence.  CSV and JSON
content depends only on config + seed, so reruns are byte-identical;
manifests carry the sole timestamp.  Figures (skippable with --no-plot)
render the same data the CSVs carry.
"""
from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import platform
import sys

import numpy as np

from . import acceptance, config as config_mod, dimension, symbolic, \
    thermo
from .errors import (AdmissibilityError, ConfigError, GibbsDimError,
                     NonConvergent, NotAttracting, NotBaseOnly,
                     Superattracting)

FLOAT_FMT = "%.11e"     # 12 significant digits, never trimmed
SEED_REQUIRED = {"dimension", "ball-measure", "classify", "jacobian"}


# -- serialization --------------------------------------------------------


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return FLOAT_FMT % v if math.isfinite(v) else ""
    return str(value)


def write_csv(path, comments, header, rows):
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(row[h]) for h in header))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_clean(obj), indent=2, sort_keys=True))
        fh.write("\n")


def write_manifest(out_dir, command, cfg, seed, threads, outputs):
    import matplotlib
    import yaml

    from . import __version__
    manifest = {
        "command": command,
        "seed": seed,
        "threads": threads,
        "outputs": sorted(outputs),
        "config": _clean(cfg),
        "versions": {
            "gibbsdim": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "matplotlib": matplotlib.__version__,
            "pyyaml": yaml.__version__,
        },
        "timestamp": datetime.datetime.now(
            datetime.timezone.utc).isoformat(),
    }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)


# -- command bodies -------------------------------------------------------


def _setup(cfg):
    fmap = config_mod.make_map(cfg)
    bs = config_mod.make_basic_set(cfg, fmap)
    pot = config_mod.make_potential(cfg)
    return fmap, bs, pot


def cmd_pressure(cfg, out, seed, no_plot):
    fmap, bs, pot = _setup(cfg)
    n_top = int(cfg["orders"]["pressure_n"])
    rows = []
    prev = None
    for n in range(2, n_top + 1):
        est = thermo.pressure_periodic(bs, pot, n, with_diagnostic=False)
        gap = None if prev is None else abs(est.value - prev)
        rows.append({"n": n, "P_n": est.value, "gap": gap})
        prev = est.value
    try:
        transfer = thermo.pressure_transfer(
            bs, pot, grid=int(cfg["orders"]["grid_size"])).value
    except (NotBaseOnly, NonConvergent):
        transfer = None
    outputs = ["pressure.csv", "pressure_summary.json"]
    write_csv(os.path.join(out, "pressure.csv"),
              ["periodic-orbit pressure sweep",
               "columns: n, P_n, gap = |P_n - P_{n-1}|"],
              ["n", "P_n", "gap"], rows)
    write_json(os.path.join(out, "pressure_summary.json"),
               {"pressure": rows[-1]["P_n"], "order": n_top,
                "gap": rows[-1]["gap"], "transfer_pressure": transfer,
                "potential": pot.describe()})
    if not no_plot:
        from . import plots
        plots.pressure_figure(rows, os.path.join(out, "pressure.png"))
        outputs.append("pressure.png")
    return 0, outputs


def cmd_lyapunov(cfg, out, seed, no_plot):
    fmap, bs, pot = _setup(cfg)
    n_top = min(int(cfg["orders"]["pressure_n"]), 16)
    rows = []
    gm = None
    for n in range(2, n_top + 1):
        gm = thermo.build_gibbs_model(fmap, pot, 1, order=n,
                                      basic_set=bs)
        chi_s, chi_u = gm.lyapunov()
        rows.append({"n": n, "chi_s": chi_s, "chi_u": chi_u})
    outputs = ["lyapunov.csv", "lyapunov_summary.json"]
    write_csv(os.path.join(out, "lyapunov.csv"),
              ["Lyapunov exponents of the Gibbs measure by order",
               "columns: n, chi_s, chi_u"],
              ["n", "chi_s", "chi_u"], rows)
    write_json(os.path.join(out, "lyapunov_summary.json"),
               {"chi_s": rows[-1]["chi_s"], "chi_u": rows[-1]["chi_u"],
                "entropy": gm.entropy(), "order": n_top,
                "potential": pot.describe()})
    if not no_plot:
        from . import plots
        ns = [r["n"] for r in rows]
        plots.series_figure(
            [("chi_s", ns, [r["chi_s"] for r in rows]),
             ("chi_u", ns, [r["chi_u"] for r in rows])],
            "order n", "exponent", os.path.join(out, "lyapunov.png"))
        outputs.append("lyapunov.png")
    return 0, outputs


def _resolve_d_prime(cfg, bs, seed):
    want = cfg["dimension"]["d_prime"]
    if want == "auto":
        rep = dimension.classify_degree2(bs, rng_seed=seed)
        if rep.is_lower_bound:
            raise NonConvergent(
                "auto branch detection found non-constant preimage "
                "counts; set dimension.d_prime explicitly")
        return rep.d_prime
    d_prime = int(want)
    if d_prime not in (1, bs.map.degree):
        raise ConfigError("dimension.d_prime must be 'auto', 1, or the "
                          "base degree")
    return d_prime


def cmd_dimension(cfg, out, seed, no_plot):
    fmap, bs, pot = _setup(cfg)
    d_prime = _resolve_d_prime(cfg, bs, seed)
    n_min = int(cfg["dimension"]["n_min"])
    n_max = cfg["dimension"]["n_max"]
    if n_max is None:
        n_max = 8 if d_prime == fmap.degree else 5
    gm = thermo.build_gibbs_model(fmap, pot, d_prime, basic_set=bs)
    emp = dimension.empirical_dimension(
        gm, bs, eps=float(cfg["sampling"]["eps_ball"]),
        n_range=range(n_min, int(n_max) + 1),
        samples=int(cfg["sampling"]["samples"]), rng_seed=seed)
    chi_s, chi_u = gm.lyapunov()
    h = gm.entropy()
    regime = ("expanding" if d_prime == fmap.degree
              else "homeomorphic-like")
    delta = dimension.dimension_formula(h, chi_s, chi_u, d_prime, regime)
    k_point = bs.realize(symbolic.uniform_solenoid_point(
        np.random.default_rng(seed + 1), bs.depth, fmap.degree))
    report = dimension.DimensionReport(
        chi_s=chi_s, chi_u=chi_u, entropy=h, d_prime=d_prime,
        delta_formula=float(delta), regime=regime,
        k_ratio=dimension.round_k(bs, k_point, dimension.K_RATIO_ORDER)
        / dimension.K_RATIO_ORDER,
        delta_empirical=emp.slope, half_width=emp.half_width,
        pressure=float(gm.pressure.value))
    outputs = ["dimension.csv", "dimension_summary.json"]
    write_csv(os.path.join(out, "dimension.csv"),
              ["iterated-ball masses at a Gibbs-typical center",
               "columns: n, k, rho, log_mu_formula, log_mu_mc, "
               "slope_partial"],
              ["n", "k", "rho", "log_mu_formula", "log_mu_mc",
               "slope_partial"], emp.rows)
    write_json(os.path.join(out, "dimension_summary.json"),
               report.as_dict())
    if not no_plot:
        from . import plots
        plots.dimension_figure(emp.rows, emp.slope, emp.half_width,
                               report.delta_formula,
                               os.path.join(out, "dimension.png"))
        outputs.append("dimension.png")
    return 0, outputs


def cmd_ball_measure(cfg, out, seed, no_plot):
    fmap, bs, pot = _setup(cfg)
    sec = cfg["ball_measure"]
    d_prime = int(sec["d_prime"])
    n_max, k_max = int(sec["n_max"]), int(sec["k_max"])
    gm = thermo.build_gibbs_model(fmap, pot, d_prime, basic_set=bs)
    rng = np.random.default_rng(seed)
    center = dimension.make_center(gm, bs, rng, n_max, k_max,
                                   float(cfg["sampling"]["eps_ball"]))
    rows = []
    log_dp = math.log(d_prime)
    for n in range(1, n_max + 1):
        for k in range(1, k_max + 1):
            log_mu = float(center.cum_phi_bar[n + k]) - k * log_dp
            rows.append({"n": n, "k": k, "log_mu": log_mu,
                         "mu": math.exp(log_mu)})
    outputs = ["ball_measure.csv", "ball_measure_summary.json"]
    write_csv(os.path.join(out, "ball_measure.csv"),
              ["iterated-ball mass formula sweep at one sampled center",
               "columns: n, k, log_mu, mu"],
              ["n", "k", "log_mu", "mu"], rows)
    write_json(os.path.join(out, "ball_measure_summary.json"),
               {"center_theta": center.sp.theta,
                "center_depth": center.sp.depth,
                "d_prime": d_prime,
                "log_mu_min": min(r["log_mu"] for r in rows),
                "log_mu_max": max(r["log_mu"] for r in rows),
                "potential": pot.describe()})
    if not no_plot:
        from . import plots
        series = []
        for n in (1, max(2, n_max // 2), n_max):
            ks = [r["k"] for r in rows if r["n"] == n]
            ys = [r["log_mu"] for r in rows if r["n"] == n]
            series.append((f"n={n}", ks, ys))
        plots.series_figure(series, "k", "log mass",
                            os.path.join(out, "ball_measure.png"))
        outputs.append("ball_measure.png")
    return 0, outputs


def cmd_bowen_root(cfg, out, seed, no_plot):
    fmap, bs, _pot = _setup(cfg)
    sec = cfg["bowen_root"]
    d_prime = int(sec["d_prime"])
    root = thermo.bowen_root(bs, d_prime, order=int(sec["order"]))
    rows = [{"iteration": it, "lo": lo, "hi": hi, "width": hi - lo}
            for it, lo, hi in root.trace]
    outputs = ["bowen_root.csv", "bowen_root_summary.json"]
    write_csv(os.path.join(out, "bowen_root.csv"),
              ["bisection bracket trace of the Bowen equation",
               "columns: iteration, lo, hi, width"],
              ["iteration", "lo", "hi", "width"], rows)
    write_json(os.path.join(out, "bowen_root_summary.json"),
               {"root": root.value, "flag": root.flag,
                "residual": root.residual, "order": root.order,
                "iterations": root.iterations, "d_prime": d_prime})
    if not no_plot:
        from . import plots
        plots.bowen_trace_figure(root.trace, root.value,
                                 os.path.join(out, "bowen_root.png"))
        outputs.append("bowen_root.png")
    return 0, outputs


def cmd_classify(cfg, out, seed, no_plot):
    fmap, bs, _pot = _setup(cfg)
    sec = cfg["classify"]
    rep = dimension.classify_degree2(
        bs, survey=int(sec["survey"]), rng_seed=seed,
        with_empirical=bool(sec["with_empirical"]))
    strict, loose, ambiguous = dimension.survey_preimage_counts(
        bs, int(sec["survey"]), seed)
    rows = [{"sample": i, "count_strict": s, "count_loose": l,
             "ambiguous": a}
            for i, (s, l, a) in enumerate(zip(strict, loose, ambiguous))]
    outputs = ["classify.csv", "classify_summary.json"]
    write_csv(os.path.join(out, "classify.csv"),
              ["preimage-count survey over sampled set points",
               "columns: sample, count_strict, count_loose, ambiguous"],
              ["sample", "count_strict", "count_loose", "ambiguous"],
              rows)
    summary = rep.as_dict()
    summary["delta"] = summary["delta_formula"]
    write_json(os.path.join(out, "classify_summary.json"), summary)
    if not no_plot:
        from . import plots
        idx = [r["sample"] for r in rows]
        plots.series_figure(
            [("strict", idx, [r["count_strict"] for r in rows]),
             ("loose", idx, [r["count_loose"] for r in rows])],
            "sample", "preimage count",
            os.path.join(out, "classify.png"))
        outputs.append("classify.png")
    return 0, outputs


def cmd_jacobian(cfg, out, seed, no_plot):
    fmap, bs, pot = _setup(cfg)
    sec = cfg["jacobian"]
    d_prime = int(sec["d_prime"])
    gm = thermo.build_gibbs_model(fmap, pot, d_prime, basic_set=bs)
    rows = []
    summary = {}
    for m in sec["m_values"]:
        est = dimension.jacobian_estimate(gm, bs, int(m),
                                          trials=int(sec["trials"]),
                                          rng_seed=seed + int(m))
        rows.extend(est.rows)
        summary[f"m={int(m)}"] = {"geo_mean": est.geo_mean,
                                  "spread": est.spread,
                                  "expected": d_prime ** int(m)}
    outputs = ["jacobian.csv", "jacobian_summary.json"]
    write_csv(os.path.join(out, "jacobian.csv"),
              ["iterated-ball mass ratios mass(B(n+m,k-m))/mass(B(n,k))",
               "columns: trial, n, k, m, ratio"],
              ["trial", "n", "k", "m", "ratio"], rows)
    write_json(os.path.join(out, "jacobian_summary.json"),
               {"d_prime": d_prime, "estimates": summary,
                "potential": pot.describe()})
    if not no_plot:
        from . import plots
        series = []
        for m in sec["m_values"]:
            pts = [r for r in rows if r["m"] == int(m)]
            series.append((f"m={int(m)}", [r["trial"] for r in pts],
                           [r["ratio"] for r in pts]))
        plots.series_figure(series, "trial", "mass ratio",
                            os.path.join(out, "jacobian.png"))
        outputs.append("jacobian.png")
    return 0, outputs


def cmd_verify(cfg, out, seed, no_plot):
    results = acceptance.run_all(seed, echo=print)
    results.append(acceptance.determinism_check(out, seed, echo=print))
    rows = [{"criterion": r.cid, "name": r.name,
             "passed": r.passed, "observed": r.observed,
             "target": r.target}
            for r in results]
    outputs = ["verify_results.csv", "verify_summary.json"]
    write_csv(os.path.join(out, "verify_results.csv"),
              ["verification suite results",
               "columns: criterion, name, passed, observed, target"],
              ["criterion", "name", "passed", "observed", "target"],
              rows)
    all_passed = all(r.passed for r in results)
    write_json(os.path.join(out, "verify_summary.json"),
               {"all_passed": all_passed, "seed": seed,
                "criteria": [{"criterion": r.cid, "name": r.name,
                              "passed": r.passed, "observed": r.observed,
                              "target": r.target, "detail": r.detail}
                             for r in results]})
    print(f"{'ALL PASSED' if all_passed else 'FAILURES PRESENT'} "
          f"({sum(r.passed for r in results)}/{len(results)})")
    return (0 if all_passed else 1), outputs


COMMANDS = {
    "pressure": cmd_pressure,
    "lyapunov": cmd_lyapunov,
    "dimension": cmd_dimension,
    "ball-measure": cmd_ball_measure,
    "bowen-root": cmd_bowen_root,
    "classify": cmd_classify,
    "jacobian": cmd_jacobian,
    "verify": cmd_verify,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gibbsdim",
        description="Thermodynamic formalism runs for quadratic "
                    "polynomial skew products")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="YAML experiment config (defaults apply "
                            "when omitted)")
        p.add_argument("--out", default=".",
                       help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None,
                       help="overrides sampling.seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker budget recorded in the manifest; "
                            "sweeps are ordered by index regardless")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = (config_mod.load_config(args.config)
               if args.config else config_mod.default_config())
        seed = args.seed if args.seed is not None \
            else cfg["sampling"]["seed"]
        if seed is None:
            if args.command in SEED_REQUIRED:
                raise ConfigError(
                    f"{args.command} is stochastic: set sampling.seed "
                    f"or pass --seed")
            seed = 0
        seed = int(seed)
        cfg["sampling"]["seed"] = seed
        os.makedirs(args.out, exist_ok=True)
        code, outputs = COMMANDS[args.command](cfg, args.out, seed,
                                               args.no_plot)
        write_manifest(args.out, args.command, cfg, seed, args.threads,
                       outputs)
        return code
    except (ConfigError, NotAttracting, Superattracting) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AdmissibilityError as exc:
        print(f"admissibility failure: {exc}", file=sys.stderr)
        return 3
    except NonConvergent as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 4
    except GibbsDimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
