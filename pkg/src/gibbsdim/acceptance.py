"""Verification suite: eleven numerical checks plus a determinism check.

Each criterion is a standalone callable returning a CriterionResult with
deterministic observed/target strings (timings never enter the result,
so two runs with one seed serialize identically).  run_all executes them
in order; the CLI `verify` command adds the double-run determinism check
and renders the table.
"""
from __future__ import annotations

import filecmp
import math
import time
from dataclasses import dataclass

import numpy as np

from . import dimension, maps, thermo
from .basicset import BasicSetModel, SolenoidPoint

LOG2 = math.log(2.0)


def product_map():
    return maps.MapFamily.product(0.1)


def perturbed_map():
    return maps.MapFamily.perturbed(0.1, b=1.0, eps=1e-3)


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    observed: str
    target: str
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} criterion {self.cid:2d} [{self.name}]: "
                f"observed {self.observed}, target {self.target}")


def _child(seed, offset):
    return int(seed) * 1009 + offset


def criterion_1(seed=0):
    """Periodic-orbit pressure of the zero potential hits log 2."""
    bs = BasicSetModel(product_map())
    t0 = time.monotonic()
    est = thermo.pressure_periodic(bs, thermo.ZeroPotential(), 20)
    elapsed = time.monotonic() - t0
    err = abs(est.value - LOG2)
    passed = err <= 1e-6 and elapsed < 10.0
    return CriterionResult(
        1, "pressure-periodic-log2", passed,
        observed=f"P = {est.value:.10f} (err {err:.3e})",
        target="log 2 within 1e-6, under 10 s",
        detail="" if elapsed < 10.0 else "exceeded 10 s")


def criterion_2(seed=0):
    """Periodic and transfer-operator pressure agree for a base-only
    potential."""
    bs = BasicSetModel(product_map())
    pot = thermo.AngleHarmonicPotential(0.1)
    p_per = thermo.pressure_periodic(bs, pot, 18)
    p_tr = thermo.pressure_transfer(bs, pot, grid=2048)
    gap = abs(p_per.value - p_tr.value)
    return CriterionResult(
        2, "pressure-transfer-agreement", gap <= 1e-4,
        observed=f"periodic {p_per.value:.10f}, transfer "
                 f"{p_tr.value:.10f}, gap {gap:.3e}",
        target="gap within 1e-4")


def criterion_3(seed=0):
    """Lyapunov exponents of the zero-potential measure match the
    closed-form derivatives on the product set."""
    fmap = product_map()
    gm = thermo.build_gibbs_model(fmap, thermo.ZeroPotential(), 2)
    chi_s, chi_u = gm.lyapunov()
    oracle = math.log(abs(2.0 * maps.attracting_fixed_point(fmap)))
    err_u = abs(chi_u - LOG2)
    err_s = abs(chi_s - oracle)
    return CriterionResult(
        3, "lyapunov-closed-form", err_u <= 1e-8 and err_s <= 1e-6,
        observed=f"chi_u {chi_u:.10f} (err {err_u:.3e}), chi_s "
                 f"{chi_s:.10f} (err {err_s:.3e})",
        target="log 2 within 1e-8 and log|2 p0| within 1e-6",
        detail=f"closed-form chi_s = {oracle:.10f}")


def criterion_4(seed=0):
    """Bowen roots: zero on the expanding branch, the closed-form
    positive root on the graph branch."""
    fmap = product_map()
    bs = BasicSetModel(fmap)
    order = 18
    root2 = thermo.bowen_root(bs, 2, order=order)
    root1 = thermo.bowen_root(bs, 1, order=order)
    lam = abs(math.log(abs(2.0 * maps.attracting_fixed_point(fmap))))
    closed = (math.log(2.0 ** order - 1.0) / order) / lam
    err2 = abs(root2.value)
    err1 = abs(root1.value - closed)
    return CriterionResult(
        4, "bowen-root-both-branches", err2 <= 1e-6 and err1 <= 1e-6,
        observed=f"d'=2 root {root2.value:.10f} ({root2.flag}), d'=1 "
                 f"root {root1.value:.10f} (err {err1:.3e})",
        target="0 within 1e-6 and the closed-form root within 1e-6",
        detail=f"closed-form d'=1 root at this order = {closed:.10f}")


def criterion_5(seed=0):
    """Product classification: expanding regime with dimension 1, and
    the Monte Carlo slope agrees."""
    bs = BasicSetModel(product_map())
    rep = dimension.classify_degree2(bs, with_empirical=True,
                                     rng_seed=_child(seed, 5))
    ok = (rep.regime == "expanding" and rep.d_prime == 2
          and abs(rep.delta_formula - 1.0) <= 5e-4
          and abs(rep.delta_empirical - 1.0) <= 0.05)
    return CriterionResult(
        5, "expanding-dimension", ok,
        observed=f"regime {rep.regime}, d'={rep.d_prime}, delta "
                 f"{rep.delta_formula:.6f}, slope "
                 f"{rep.delta_empirical:.4f}",
        target="expanding, d'=2, delta 1.000, slope 1.00 within 0.05")


def criterion_6(seed=0):
    """Perturbed classification: graph branch with the dimension-formula
    value near 1.4652 and a consistent Monte Carlo slope."""
    bs = BasicSetModel(perturbed_map())
    rep = dimension.classify_degree2(bs, with_empirical=True,
                                     rng_seed=_child(seed, 6))
    rel = abs(rep.delta_formula - 1.4652) / 1.4652
    gap = abs(rep.delta_formula - rep.delta_empirical)
    ok = (rep.regime == "homeomorphic-like" and rep.d_prime == 1
          and rel <= 0.05 and gap <= 0.1 * rep.delta_formula)
    return CriterionResult(
        6, "graph-dimension", ok,
        observed=f"regime {rep.regime}, d'={rep.d_prime}, delta "
                 f"{rep.delta_formula:.6f}, slope "
                 f"{rep.delta_empirical:.4f}, gap {gap:.4f}",
        target="homeomorphic-like, d'=1, delta within 5% of 1.4652, "
               "slope gap within 10%")


def criterion_7(seed=0):
    """One comparability constant prices every iterated ball on the
    (n, k) grid for both test potentials."""
    fmap = product_map()
    bs = BasicSetModel(fmap)
    cs = []
    for off, pot in ((71, thermo.ZeroPotential()),
                     (72, thermo.AngleHarmonicPotential(0.1))):
        gm = thermo.build_gibbs_model(fmap, pot, 2)
        grid = dimension.formula_mc_grid(gm, bs, n_max=12, k_max=12,
                                         centers=30, samples=8_000_000,
                                         rng_seed=_child(seed, off))
        cs.append(grid.c_value)
    c = max(cs)
    return CriterionResult(
        7, "ball-mass-comparability", c <= 10.0,
        observed=f"C = {c:.4f} (zero {cs[0]:.4f}, harmonic {cs[1]:.4f})",
        target="C at most 10 over the full grid")


def criterion_8(seed=0):
    """Round-ball k grows at the stable/unstable derivative ratio."""
    bs = BasicSetModel(product_map())
    x = bs.realize(SolenoidPoint(1.234567, (0,) * bs.depth))
    k = dimension.round_k(bs, x, 30)
    ratio = k / 30.0
    rel = abs(ratio - 2.1494) / 2.1494
    return CriterionResult(
        8, "round-ball-k-ratio", rel <= 0.05,
        observed=f"k(30) = {k}, ratio {ratio:.4f} (rel err {rel:.4f})",
        target="ratio within 5% of 2.1494")


def criterion_9(seed=0):
    """The measure-theoretic Jacobian of f^m is (d')^m."""
    lo, hi = 1.0 / math.sqrt(10.0), math.sqrt(10.0)
    worst = 0.0
    detail = []
    ok = True
    for off, fmap, dp in ((91, product_map(), 2),
                          (92, perturbed_map(), 1)):
        bs = BasicSetModel(fmap)
        gm = thermo.build_gibbs_model(fmap, thermo.ZeroPotential(), dp,
                                      basic_set=bs)
        for m in (1, 2, 3):
            est = dimension.jacobian_estimate(
                gm, bs, m, trials=50, rng_seed=_child(seed, off + 10 * m))
            rel = est.geo_mean / dp ** m
            ok = ok and lo <= rel <= hi
            worst = max(worst, abs(math.log(rel)))
            detail.append(f"d'={dp} m={m}: {est.geo_mean:.6g}")
    return CriterionResult(
        9, "jacobian-power", ok,
        observed=f"max |log(geo-mean/(d')^m)| = {worst:.3e}",
        target="geo-mean within a sqrt(10) factor of (d')^m",
        detail="; ".join(detail))


def criterion_10(seed=0):
    """Cylinder-mass comparability across 100 random cylinder pairs."""
    rng = np.random.default_rng(_child(seed, 10))
    ratios = thermo.comparability_trials(
        product_map(), thermo.AngleHarmonicPotential(0.1), rng,
        trials=100)
    c = thermo.comparability_constant(ratios)
    return CriterionResult(
        10, "cylinder-comparability", c <= 10.0,
        observed=f"C = {c:.4f} over 100 trials",
        target="C at most 10")


def criterion_11(seed=0):
    """With membership made ambiguous, the classifier reports a lower
    bound that the Monte Carlo slope respects."""
    fmap = perturbed_map()
    bs = BasicSetModel(fmap, tol=9e-3)
    rep = dimension.classify_degree2(bs, rng_seed=_child(seed, 11))
    gm = thermo.build_gibbs_model(fmap, thermo.ZeroPotential(), 1,
                                  basic_set=bs, check_set=False)
    emp = dimension.empirical_dimension(gm, bs, n_range=range(1, 6),
                                        samples=80_000_000,
                                        rng_seed=_child(seed, 110))
    ok = (rep.is_lower_bound and rep.regime == "generic"
          and rep.delta_formula <= emp.slope + 0.05)
    return CriterionResult(
        11, "fallback-lower-bound", ok,
        observed=f"lower bound {rep.delta_formula:.6f}, slope "
                 f"{emp.slope:.4f}",
        target="fallback taken and bound at most slope + 0.05",
        detail=rep.note or "")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8,
            criterion_9, criterion_10, criterion_11)


def run_all(seed=0, echo=None):
    """Run criteria 1..11; echo (if given) receives each result line."""
    results = []
    for fn in CRITERIA:
        res = fn(seed)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results


def determinism_check(out_dir, seed=0, echo=None):
    """Criterion 12 body: one report pipeline run twice with the same
    seed must serialize byte-identically (manifests aside)."""
    import os

    from . import cli

    cfg_path = os.path.join(out_dir, "determinism_config.yaml")
    with open(cfg_path, "w", encoding="utf-8") as fh:
        fh.write("map:\n  family: product\n  c: 0.1\n"
                 "dimension:\n  d_prime: 2\n  n_min: 1\n  n_max: 6\n"
                 "sampling:\n  samples: 8000000\n  seed: %d\n"
                 % _child(seed, 12))
    dirs = [os.path.join(out_dir, d) for d in ("det_a", "det_b")]
    for d in dirs:
        code = cli.main(["dimension", "--config", cfg_path,
                         "--out", d, "--no-plot"])
        if code != 0:
            res = CriterionResult(
                12, "verify-determinism", False,
                observed=f"dimension run exited {code}", target="exit 0 "
                "and byte-identical data files")
            if echo is not None:
                echo(res.line())
            return res
    same = all(
        filecmp.cmp(os.path.join(dirs[0], name),
                    os.path.join(dirs[1], name), shallow=False)
        for name in ("dimension.csv", "dimension_summary.json"))
    res = CriterionResult(
        12, "verify-determinism", same,
        observed="byte-identical" if same else "files differ",
        target="byte-identical data files across two runs")
    if echo is not None:
        echo(res.line())
    return res
