import math

import numpy as np
import pytest

from gibbsdim import BasicSetModel, MapFamily, SolenoidPoint, maps
from gibbsdim.basicset import metric, shift_point
from gibbsdim.errors import (AmbiguousMembership, DepthInsufficient,
                             NotOnBasicSet)

from conftest import C, P0

SEED = 7


def test_realize_product_collapses_fiber(product_set):
    rng = np.random.default_rng(SEED)
    theta = math.pi / 3
    for _ in range(5):
        word = tuple(rng.integers(0, 2, size=12))
        z, w = product_set.realize(SolenoidPoint(theta, word))
        assert abs(z - P0) < 1e-12
        assert abs(w - np.exp(1j * theta)) < 1e-12


def test_realize_perturbed_eps_zero_matches_product(product_set):
    fmap = MapFamily.perturbed(C, b=1.0, eps=0.0)
    bs = BasicSetModel(fmap)
    sp = SolenoidPoint(2.2, (1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1))
    p = bs.realize(sp)
    q = product_set.realize(sp)
    assert metric(p, q) < 1e-12


def test_realize_depth_agreement(perturbed_map):
    rng = np.random.default_rng(SEED)
    word40 = tuple(rng.integers(0, 2, size=40))
    bs20 = BasicSetModel(perturbed_map, depth=20)
    bs40 = BasicSetModel(perturbed_map, depth=40)
    p = bs20.realize(SolenoidPoint(1.5, word40[:20]))
    q = bs40.realize(SolenoidPoint(1.5, word40))
    assert metric(p, q) < 0.9 ** 20


def test_realize_perturbed_needs_prehistory(perturbed_set):
    with pytest.raises(DepthInsufficient):
        perturbed_set.realize(SolenoidPoint(1.0, ()))


def test_membership_basic(product_set):
    assert product_set.membership((P0, np.exp(0.4j)))
    assert not product_set.membership((P0 + 0.5, 1.0))
    assert not product_set.membership((P0, 0.0))


def test_membership_self_consistent(perturbed_set):
    sp = SolenoidPoint(0.9, (0, 1) * (perturbed_set.depth // 2))
    p = perturbed_set.realize(sp)
    assert perturbed_set.membership(p)


def test_rejected_point_leaves_neighborhood(product_set):
    # (p0 + 0.5, 1) starts outside the isolating neighborhood already
    assert not product_set.forward_confined((P0 + 0.5, 1.0))


def test_forward_orbit_escapes_off_set(product_map):
    # direct iteration oracle for a point outside the filled basin
    z, w = P0 + 1.5, 1.0
    for _ in range(50):
        z, w = maps.apply(product_map, z, w)
        if abs(z) > 10:
            break
    assert abs(z) > 10


@pytest.mark.parametrize("theta,word", [
    (0.3, (0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1)),
    (4.1, (1,) * 16),
])
def test_shift_compatibility(perturbed_set, theta, word):
    sp = SolenoidPoint(theta, word)
    x = perturbed_set.realize(sp)
    fx = maps.apply(perturbed_set.map, *x)
    y = perturbed_set.realize(shift_point(sp))
    assert metric(fx, y) < perturbed_set.tol


def test_forward_invariance_witness(perturbed_set):
    assert perturbed_set.forward_invariance_witness(64) < perturbed_set.tol


def test_preimage_count_product(product_set):
    x = (P0, np.exp(1.3j))
    assert product_set.preimage_count(x) == 2


def test_preimage_count_perturbed(perturbed_set):
    sp = SolenoidPoint(1.3, (1, 0, 0, 1) * (perturbed_set.depth // 4))
    x = perturbed_set.realize(sp)
    assert perturbed_set.preimage_count(x) == 1


def test_preimage_candidates_product(product_set):
    x = (P0, np.exp(2.7j))
    cands = product_set.preimage_candidates(x)
    assert len(cands) == 4          # 2 base roots x 2 fiber roots in C^2
    on_set = [c for c in cands
              if c["confined"] and c["distance"] < product_set.tol]
    assert len(on_set) == 2
    # the in-set fiber root is +p0; the rejected one is -p0
    assert all(abs(c["z"] - P0) < 1e-9 for c in on_set)


def test_preimages_map_back(product_set, perturbed_set):
    for bs in (product_set, perturbed_set):
        sp = SolenoidPoint(0.8, (0, 1) * (bs.depth // 2))
        x = bs.realize(sp)
        for c in bs.preimage_candidates(x):
            if c["confined"] and c["distance"] < bs.tol:
                y = maps.apply(bs.map, c["z"], c["w"])
                assert metric(y, x) < 1e-10


def test_preimage_count_constant(product_set):
    rng = np.random.default_rng(SEED)
    counts = set()
    for _ in range(100):
        x = (P0, np.exp(1j * rng.uniform(0, 2 * math.pi)))
        counts.add(product_set.preimage_count(x))
    assert counts == {2}


def test_fat_tolerance_flags_ambiguity(perturbed_map):
    bs = BasicSetModel(perturbed_map, tol=9e-3)
    sp = SolenoidPoint(0.8, (0, 1) * (bs.depth // 2))
    x = bs.realize(sp)
    with pytest.raises(AmbiguousMembership) as exc:
        bs.preimage_count(x)
    assert exc.value.count_strict <= exc.value.count_loose


def test_preimage_count_requires_membership(product_set):
    with pytest.raises(NotOnBasicSet):
        product_set.preimage_count((P0 + 0.5, 1.0))


def test_solenoid_point_validation():
    sp = SolenoidPoint(7.0, (1, 0))
    assert 0 <= sp.theta < 2 * math.pi
    assert sp.depth == 2
    with pytest.raises(ValueError):
        SolenoidPoint(0.0, (1, 0), depth=5)
