import math

import numpy as np
import pytest

from gibbsdim import MapFamily, maps
from gibbsdim.errors import ConeCollapse, NotAttracting, Superattracting

from conftest import C, P0

SEED = 20240811


def test_apply_product_zero_fixed_point():
    fmap = MapFamily.product(0.0)
    z, w = maps.apply(fmap, 0.0, 1.0)
    assert z == 0.0 and w == 1.0


def test_apply_squares_fiber():
    fmap = MapFamily.product(C)
    z, w = maps.apply(fmap, P0, 1j)
    assert abs(z - P0) < 1e-12
    assert abs(w - (-1.0)) < 1e-12


def test_apply_accepts_arrays():
    fmap = MapFamily.product(C)
    zs = np.array([0.0, P0, 1.0 + 1j])
    ws = np.array([1.0, 1j, -1.0])
    z2, w2 = maps.apply(fmap, zs, ws)
    for i in range(3):
        ez, ew = maps.apply(fmap, complex(zs[i]), complex(ws[i]))
        assert abs(z2[i] - ez) < 1e-14 and abs(w2[i] - ew) < 1e-14


def test_perturbed_eps_zero_degenerates_to_product():
    prod = MapFamily.product(C)
    pert = MapFamily.perturbed(C, a=0.3, b=1.0, d=0.2, e=0.1, eps=0.0)
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        p = (complex(*rng.normal(size=2) * 0.2),
             complex(*rng.normal(size=2)))
        fp = maps.apply(prod, *p)
        fq = maps.apply(pert, *p)
        assert abs(fp[0] - fq[0]) < 1e-12 and abs(fp[1] - fq[1]) < 1e-12
        dp = maps.differential(prod, *p).as_array()
        dq = maps.differential(pert, *p).as_array()
        assert np.max(np.abs(dp - dq)) < 1e-12


def test_differential_product_diagonal():
    fmap = MapFamily.product(C)
    w = np.exp(0.7j)
    d = maps.differential(fmap, P0, w)
    assert abs(d.dzz - 2.0 * P0) < 1e-14
    assert abs(d.dww - 2.0 * w) < 1e-14
    assert abs(abs(d.dww) - 2.0) < 1e-14
    assert d.dzw == 0.0 and d.dwz == 0.0


def test_differential_critical_line():
    fmap = MapFamily.product(C)
    d = maps.differential(fmap, 0.0, np.exp(2.1j))
    assert d.dzz == 0.0
    assert abs(d.det) < 1e-14


def test_attracting_fixed_point_value():
    p0 = maps.attracting_fixed_point(MapFamily.product(C))
    assert abs(p0 - P0) < 1e-12
    # fixed and attracting
    assert abs(p0 * p0 + C - p0) < 1e-15
    assert abs(2 * p0) < 1.0


def test_attracting_fixed_point_rejections():
    with pytest.raises(Superattracting):
        maps.attracting_fixed_point(MapFamily.product(0.0))
    with pytest.raises(NotAttracting):
        maps.attracting_fixed_point(MapFamily.product(0.3))


def test_norms_identity_at_zero_steps():
    fmap = MapFamily.product(C)
    s, u = maps.stable_unstable_norms(fmap, (P0, 1.0), 0)
    assert s == 1.0 and u == 1.0


def test_norms_product_closed_form():
    fmap = MapFamily.product(C)
    s, u = maps.stable_unstable_norms(fmap, (P0, np.exp(0.3j)), 5)
    assert abs(s - abs(2 * P0) ** 5) < 1e-12
    assert abs(u - 32.0) < 1e-9


def test_norms_perturbed_near_product():
    prod = MapFamily.product(C)
    pert = MapFamily.perturbed(C, b=1.0, eps=1e-3)
    w = np.exp(0.3j)
    s0, u0 = maps.stable_unstable_norms(prod, (P0, w), 5)
    s1, u1 = maps.stable_unstable_norms(pert, (P0, w), 5)
    assert abs(s1 / s0 - 1.0) < 0.05
    assert abs(u1 / u0 - 1.0) < 0.05


@pytest.mark.parametrize("n,m", [(3, 4), (5, 2), (1, 7)])
def test_norms_chain_rule_product(n, m):
    fmap = MapFamily.product(C)
    x = (P0, np.exp(1.1j))
    s_all, u_all = maps.stable_unstable_norms(fmap, x, n + m)
    s1, u1 = maps.stable_unstable_norms(fmap, x, n)
    y = x
    for _ in range(n):
        y = maps.apply(fmap, *y)
    s2, u2 = maps.stable_unstable_norms(fmap, y, m)
    assert abs(s_all / (s1 * s2) - 1.0) < 1e-8
    assert abs(u_all / (u1 * u2) - 1.0) < 1e-8


def test_norms_chain_rule_perturbed(perturbed_set):
    bs = perturbed_set
    fmap = bs.map
    from gibbsdim import SolenoidPoint
    x = bs.realize(SolenoidPoint(0.77, (0, 1) * (bs.depth // 2)))
    n, m = 4, 3
    s_all, u_all = maps.stable_unstable_norms(fmap, x, n + m)
    s1, u1 = maps.stable_unstable_norms(fmap, x, n)
    y = x
    for _ in range(n):
        y = maps.apply(fmap, *y)
        y = (y[0], y[1] / abs(y[1]))
    s2, u2 = maps.stable_unstable_norms(fmap, y, m)
    assert abs(s_all / (s1 * s2) - 1.0) < 0.05
    assert abs(u_all / (u1 * u2) - 1.0) < 0.05


def test_cone_collapse_away_from_set():
    # the unstable push leaves the cone once the stable stretch dominates
    fmap = MapFamily.perturbed(C, b=1.0, eps=1e-3)
    with pytest.raises(ConeCollapse):
        maps.stable_unstable_norms(fmap, (3.0, 1.0), 8)


def test_critical_distance_product(product_set):
    # critical set is {z = 0} union {w = 0}; the set sits at z = p0, |w| = 1
    assert abs(product_set.critical_distance() - P0) < 1e-9


def test_critical_distance_superattracting_parameter():
    from gibbsdim.basicset import raw_product_net
    zs, ws = raw_product_net(0.0)
    d = maps.critical_distance(MapFamily.product(0.0), list(zip(zs, ws)))
    assert d == 0.0


def test_critical_distance_threshold_raises(product_map):
    from gibbsdim import BasicSetModel
    from gibbsdim.errors import CriticalOnSet
    bs = BasicSetModel(product_map, critical_tol=0.2)
    with pytest.raises(CriticalOnSet):
        bs.critical_distance()


def test_critical_distance_perturbed_converges():
    from gibbsdim import BasicSetModel
    target = P0
    prev_gap = None
    for eps in (1e-3, 5e-4, 2.5e-4):
        bs = BasicSetModel(MapFamily.perturbed(C, b=1.0, eps=eps))
        gap = abs(bs.critical_distance() - target)
        if prev_gap is not None:
            assert gap <= prev_gap + 1e-6
        prev_gap = gap
    assert prev_gap < 5e-3


def test_hyperbolicity_margins(product_set, perturbed_set):
    for bs in (product_set, perturbed_set):
        s_max, u_min = bs.hyperbolicity_witness()
        assert s_max <= 0.9
        assert u_min >= 1.1
