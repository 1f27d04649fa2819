"""Ball measures, the dimension formula, Monte Carlo estimators, and the
degree-2 classifier."""
import math

import numpy as np
import pytest

from gibbsdim import BasicSetModel, MapFamily, dimension, thermo
from gibbsdim.errors import (DegenerateExponents, InconsistentCount,
                             InsufficientSamples, NotOnBasicSet,
                             SignViolation)

from conftest import C, LOG_2P0, P0

LOG2 = math.log(2.0)

# classifier outputs are deterministic in the model order, so the formula
# dimensions can be pinned hard
DELTA_PRODUCT = 0.9999706447106947
DELTA_PERTURBED = 1.4651989335798214


# -- iterated balls and the mass formula -----------------------------------


def test_ball_validation():
    with pytest.raises(ValueError):
        dimension.IteratedBall((P0, 1.0), -1, 3)
    with pytest.raises(ValueError):
        dimension.IteratedBall((P0, 1.0), 2, -1)
    with pytest.raises(ValueError):
        dimension.IteratedBall((P0, 1.0), 2, 3, eps=0.0)


def test_ball_measure_haar(haar_model):
    shift = LOG2 - haar_model.pressure.value
    for n, k in [(0, 5), (3, 5), (2, 8)]:
        ball = dimension.IteratedBall((P0, 1.0), n, k)
        mass = dimension.ball_measure(haar_model, ball)
        exact = math.exp((n + k) * shift - k * LOG2)
        assert mass == pytest.approx(exact, rel=1e-14)
        # the order-12 normalization shift is 2e-5 per step
        assert mass == pytest.approx(2.0 ** -k, rel=(n + k) * 3e-5)
    m35 = dimension.ball_measure(haar_model,
                                 dimension.IteratedBall((P0, 1.0), 3, 5))
    assert m35 == pytest.approx(0.03125, rel=2e-4)


def test_ball_measure_n_independence(haar_model):
    masses = [dimension.ball_measure(
        haar_model, dimension.IteratedBall((P0, 1.0), n, 5))
        for n in (0, 1, 3, 6)]
    assert max(masses) / min(masses) < 1.0 + 2e-4


@pytest.mark.parametrize("n,k", [(1, 4), (2, 6), (5, 3)])
def test_scaling_identity_expanding(haar_model, n, k):
    a = dimension.ball_measure(haar_model,
                               dimension.IteratedBall((P0, 1.0), n, k))
    b = dimension.ball_measure(
        haar_model, dimension.IteratedBall((P0, 1.0), n + 1, k - 1))
    assert b == pytest.approx(2.0 * a, rel=1e-12)


def test_scaling_identity_graph(graph_model):
    x = graph_model.ensemble.point(0)
    a = dimension.ball_measure(graph_model,
                               dimension.IteratedBall(x, 2, 5))
    b = dimension.ball_measure(graph_model,
                               dimension.IteratedBall(x, 3, 4))
    assert b == pytest.approx(a, rel=1e-12)


def test_ball_measure_needs_member(haar_model):
    with pytest.raises(NotOnBasicSet):
        dimension.ball_measure(
            haar_model, dimension.IteratedBall((P0 + 1.5, 1.0), 1, 2))


# -- round_k ---------------------------------------------------------------


def test_round_k_product(product_set):
    x = (P0, 1.0)
    assert dimension.round_k(product_set, x, 0) == 0
    assert dimension.round_k(product_set, x, 10) == 21
    assert dimension.round_k(product_set, x, 30) == 64
    ratio = dimension.round_k(product_set, x, 30) / 30.0
    ideal = abs(LOG_2P0) / LOG2
    assert abs(ratio - ideal) / ideal < 0.05


def test_round_k_symmetric_rates():
    # c = 0.1875 gives |2 p0| = 1/2, so stable and unstable rates match
    bs = BasicSetModel(MapFamily.product(0.1875))
    assert bs.p0 == pytest.approx(0.25, abs=1e-15)
    for n in (5, 12):
        assert dimension.round_k(bs, (0.25, 1.0), n) == n


def test_round_k_rejects(product_set):
    with pytest.raises(ValueError):
        dimension.round_k(product_set, (P0, 1.0), -1)
    with pytest.raises(NotOnBasicSet):
        dimension.round_k(product_set, (P0 + 1.5, 1.0), 4)


# -- dimension formula -----------------------------------------------------


def test_dimension_formula_reference_values():
    d = dimension.dimension_formula(LOG2, -1.4898600, LOG2, 1)
    assert d == pytest.approx(1.4652432, abs=1e-7)
    assert dimension.dimension_formula(
        LOG2, LOG_2P0, LOG2, 2, regime=dimension.REGIME_EXPANDING) \
        == pytest.approx(1.0, abs=1e-15)
    assert dimension.dimension_formula(0.0, LOG_2P0, LOG2, 1) == 0.0


def test_dimension_formula_generic_matches_expanding():
    # at h = log d' the generic expression collapses to h / chi_u
    gen = dimension.dimension_formula(LOG2, LOG_2P0, LOG2, 2)
    exp = dimension.dimension_formula(LOG2, LOG_2P0, LOG2, 2,
                                      regime=dimension.REGIME_EXPANDING)
    assert gen == pytest.approx(exp, abs=1e-12)


def test_dimension_formula_guards():
    with pytest.raises(ValueError):
        dimension.dimension_formula(-0.1, LOG_2P0, LOG2, 1)
    with pytest.raises(DegenerateExponents):
        dimension.dimension_formula(LOG2, -1e-9, LOG2, 1)
    with pytest.raises(DegenerateExponents):
        dimension.dimension_formula(LOG2, LOG_2P0, 1e-9, 1)
    with pytest.raises(SignViolation):
        dimension.dimension_formula(LOG2, 0.5, LOG2, 1)


# -- Monte Carlo estimators -------------------------------------------------


def test_empirical_dimension_expanding(haar_model, product_set):
    emp = dimension.empirical_dimension(haar_model, product_set,
                                        n_range=range(1, 6),
                                        samples=8_000_000, rng_seed=5)
    assert abs(emp.slope - emp.slope_formula_ideal) <= emp.half_width
    assert emp.slope == pytest.approx(1.0, abs=0.08)
    assert emp.slope_formula_ideal == pytest.approx(1.0, abs=2e-3)
    ns = [r["n"] for r in emp.rows]
    assert ns == [1, 2, 3, 4, 5]
    rhos = [r["rho"] for r in emp.rows]
    assert all(b < a for a, b in zip(rhos, rhos[1:]))
    assert math.isnan(emp.rows[0]["slope_partial"])
    assert all(np.isfinite(r["slope_partial"]) for r in emp.rows[1:])
    assert min(emp.counts) >= dimension.MIN_HITS


def test_empirical_dimension_graph(graph_model, perturbed_set):
    emp = dimension.empirical_dimension(graph_model, perturbed_set,
                                        n_range=range(1, 4),
                                        samples=12_000_000, rng_seed=7)
    assert abs(emp.slope - emp.slope_formula_ideal) <= emp.half_width
    assert 1.1 < emp.slope < 1.9
    assert emp.slope_formula_ideal == pytest.approx(DELTA_PERTURBED,
                                                    abs=0.05)


def test_empirical_dimension_guards(haar_model, product_set):
    with pytest.raises(InsufficientSamples):
        dimension.empirical_dimension(haar_model, product_set,
                                      n_range=range(1, 6),
                                      samples=50_000, rng_seed=5)
    with pytest.raises(ValueError):
        dimension.empirical_dimension(haar_model, product_set,
                                      n_range=[])
    with pytest.raises(ValueError):
        dimension.empirical_dimension(haar_model, product_set,
                                      n_range=[0, 1])


def test_formula_mc_grid(haar_model, product_set):
    grid = dimension.formula_mc_grid(haar_model, product_set, n_max=6,
                                     k_max=8, centers=8,
                                     samples=4_000_000, rng_seed=9)
    assert grid.cells == 8 * 6 * 8
    assert grid.min_count >= dimension.GRID_MIN_HITS
    assert grid.c_value <= 10.0
    assert grid.min_ratio <= grid.geo_mean <= grid.max_ratio


def test_grid_rejects_graph_branch(graph_model, perturbed_set):
    with pytest.raises(ValueError):
        dimension.formula_mc_grid(graph_model, perturbed_set)


def test_jacobian_expanding(haar_model, product_set):
    est = dimension.jacobian_estimate(haar_model, product_set, m=2,
                                      trials=20, rng_seed=3)
    assert est.geo_mean == pytest.approx(4.0, rel=1e-12)
    assert est.spread == pytest.approx(1.0, abs=1e-12)
    assert len(est.rows) == 20
    assert all(r["ratio"] == pytest.approx(4.0, rel=1e-12)
               for r in est.rows)


def test_jacobian_graph(graph_model, perturbed_set):
    est = dimension.jacobian_estimate(graph_model, perturbed_set, m=3,
                                      trials=10, rng_seed=4)
    assert est.geo_mean == pytest.approx(1.0, rel=1e-12)
    assert est.spread == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        dimension.jacobian_estimate(graph_model, perturbed_set, m=0)


# -- preimage survey and constancy ------------------------------------------


def test_survey_counts(product_set, perturbed_set):
    strict, loose, amb = dimension.survey_preimage_counts(product_set,
                                                          points=30)
    assert set(strict) == {2} and set(loose) == {2}
    assert not any(amb)
    strict, loose, amb = dimension.survey_preimage_counts(perturbed_set,
                                                          points=30)
    assert set(strict) == {1} and set(loose) == {1}
    assert not any(amb)


def test_constancy_spread_product(haar_model, product_set):
    spread, slopes = dimension.constancy_spread(
        haar_model, product_set, n_range=range(1, 7), points=6,
        rng_seed=2)
    assert len(slopes) == 6
    # product cumulants are exactly linear, so the formula slope cannot
    # depend on the center at all
    assert spread < 1e-10


def test_constancy_spread_graph(graph_model, perturbed_set):
    spread, _ = dimension.constancy_spread(
        graph_model, perturbed_set, n_range=range(1, 7), points=6,
        rng_seed=2)
    assert spread < dimension.CONSTANCY_TOL


# -- classifier --------------------------------------------------------------


def test_classify_product(product_set):
    rep = dimension.classify_degree2(product_set, rng_seed=5)
    assert rep.regime == dimension.REGIME_EXPANDING
    assert rep.d_prime == 2
    assert rep.delta_formula == pytest.approx(DELTA_PRODUCT, abs=1e-12)
    assert abs(rep.delta_formula - 1.0) < 5e-4
    assert rep.bowen_flag == "no_sign_change"
    assert rep.bowen_root == 0.0
    assert rep.survey_counts == {"2": 100}
    assert not rep.is_lower_bound
    assert rep.note is None
    assert rep.constancy_spread < dimension.CONSTANCY_TOL
    assert rep.hausdorff_dimension == rep.delta_formula
    assert rep.k_ratio == pytest.approx(64.0 / 30.0, abs=1e-12)
    assert rep.chi_s == pytest.approx(LOG_2P0, abs=1e-9)
    assert rep.chi_u == pytest.approx(LOG2, abs=1e-12)


def test_classify_perturbed(perturbed_set):
    rep = dimension.classify_degree2(perturbed_set, rng_seed=5)
    assert rep.regime == dimension.REGIME_HOMEO
    assert rep.d_prime == 1
    assert rep.delta_formula == pytest.approx(DELTA_PERTURBED, abs=1e-12)
    assert abs(rep.delta_formula - 1.4652432) < 0.05 * 1.4652432
    assert rep.bowen_root is None
    assert rep.survey_counts == {"1": 100}
    assert rep.hausdorff_dimension == rep.delta_formula
    assert abs(rep.k_ratio - abs(LOG_2P0) / LOG2) / (abs(LOG_2P0) / LOG2) \
        < 0.05


def test_classify_unperturbed_matches_product(product_set):
    fmap = MapFamily.perturbed(C, b=1.0, eps=0.0)
    rep0 = dimension.classify_degree2(BasicSetModel(fmap), survey=40,
                                      rng_seed=5)
    rep = dimension.classify_degree2(product_set, survey=40, rng_seed=5)
    assert rep0.regime == rep.regime
    assert rep0.d_prime == rep.d_prime
    assert rep0.chi_s == pytest.approx(rep.chi_s, abs=1e-9)
    assert rep0.delta_formula == pytest.approx(rep.delta_formula,
                                               abs=1e-9)


def test_classify_fallback_on_fat_tolerance(perturbed_map):
    bs = BasicSetModel(perturbed_map, tol=9e-3)
    rep = dimension.classify_degree2(bs, rng_seed=11, with_empirical=True)
    assert rep.regime == dimension.REGIME_GENERIC
    assert rep.is_lower_bound
    assert rep.d_prime == 2
    assert "non-constant" in rep.note
    assert "empirical slope skipped" in rep.note
    assert rep.delta_empirical is None
    assert rep.hausdorff_dimension is None
    with pytest.raises(InconsistentCount):
        dimension.classify_degree2(bs, rng_seed=11,
                                   on_inconsistent="raise")


def test_classify_degree_guard():
    fmap = MapFamily.product(0.05, degree=3)
    with pytest.raises(ValueError):
        dimension.classify_degree2(BasicSetModel(fmap))
