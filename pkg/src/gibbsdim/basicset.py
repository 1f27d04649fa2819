"""Solenoid basic sets for quadratic skew products.

The saddle set sits over the unit circle of the base: every point is the
endpoint of a backward orbit whose base angles form a chain theta_{-k}
with d*theta_{-k-1} = theta_{-k} (mod 2pi).  A SolenoidPoint records the
present angle together with a finite branch word for that chain; realizing
it seeds the deepest z with the attracting fixed point p0 and iterates the
full map forward, so the endpoint converges to the true fiber point at the
stable rate.

Membership combines forward confinement in a neighborhood U of
{p0} x S^1 with the distance to the realized z-fiber over the query's own
angle (all branch prefixes of a fixed length, padded to the model depth).
The fiber over one angle has diameter O(eps), while the wrong-branch
preimage candidate misses it by ~ eps/|p0|, which is what makes preimage
counting sharp at the default tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import maps
from .errors import (AmbiguousMembership, ConeCollapse, CriticalOnSet,
                     DepthInsufficient, NotOnBasicSet)

TWO_PI = 2.0 * np.pi

DEFAULT_DEPTH = 16
DEFAULT_TOL = 1e-6
DEFAULT_NEIGHBORHOOD_RADIUS = 0.2
FORWARD_CONFINEMENT_STEPS = 50
NET_ANGLES = 2 ** 14
FIBER_PREFIX_DEPTH = 10
CRITICAL_TOL = 1e-3
SEED_OFFSET = 0.05
STABLE_WITNESS = 0.9
UNSTABLE_WITNESS = 1.1


def metric(p, q):
    """Max metric on C^2."""
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


@dataclass(frozen=True)
class SolenoidPoint:
    """Present base angle plus a finite backward branch word.

    word[j] in {0, .., d-1} selects the j-th backward base branch
    (theta_{-j-1} = (theta_{-j} + 2pi*word[j]) / d); depth == len(word).
    """

    theta: float
    word: tuple = ()
    depth: int = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)
        object.__setattr__(self, "word", tuple(int(b) for b in self.word))
        if self.depth is None:
            object.__setattr__(self, "depth", len(self.word))
        elif self.depth != len(self.word):
            raise ValueError("depth must equal len(word)")


def backward_angles(theta, word, degree=2):
    """Backward angle chain [theta_0, theta_{-1}, ..., theta_{-N}]."""
    angles = [float(theta) % TWO_PI]
    for b in word:
        angles.append((angles[-1] + TWO_PI * b) / degree)
    return angles


def shift_point(sp, degree=2):
    """Solenoid coordinates of f(x): doubles the angle, prepends the branch
    that returns to theta, and drops the deepest backward choice."""
    new_theta = (degree * sp.theta) % TWO_PI
    b0 = int(sp.theta // (TWO_PI / degree))
    if sp.depth == 0:
        return SolenoidPoint(new_theta, ())
    return SolenoidPoint(new_theta, (b0,) + sp.word[:-1])


class BasicSetModel:
    """The constructed saddle set of a MapFamily, with membership tests.

    Parameters are the desk-scale defaults; the attracting-fixed-point
    condition is checked at construction, not assumed.
    """

    def __init__(self, fmap, depth=DEFAULT_DEPTH, tol=DEFAULT_TOL,
                 neighborhood_radius=DEFAULT_NEIGHBORHOOD_RADIUS,
                 forward_steps=FORWARD_CONFINEMENT_STEPS,
                 net_angles=NET_ANGLES,
                 fiber_prefix_depth=FIBER_PREFIX_DEPTH,
                 critical_tol=CRITICAL_TOL):
        self.map = fmap
        self.depth = int(depth)
        self.tol = float(tol)
        self.neighborhood_radius = float(neighborhood_radius)
        self.forward_steps = int(forward_steps)
        self.net_angles = int(net_angles)
        self.fiber_prefix_depth = int(fiber_prefix_depth)
        self.critical_tol = float(critical_tol)
        self.p0 = maps.attracting_fixed_point(fmap)
        self._net_cache = None

    # -- realization ---------------------------------------------------

    def realize(self, sp):
        """Realize a SolenoidPoint as a point of C^2.

        Product maps realize exactly to (p0, e^{i theta}).  Perturbed maps
        seed the deepest z twice (p0 and p0 + offset) and iterate forward;
        the seed spread after `depth` steps is the a-posteriori contraction
        bound, and DepthInsufficient is raised when it exceeds tol.
        """
        if self.map.kind == "product":
            return complex(self.p0), np.exp(1j * sp.theta)
        if sp.depth < 1:
            raise DepthInsufficient(
                "perturbed realization needs a prehistory of depth >= 1")
        z, w, eta = self._realize_batch(
            np.array([sp.theta]),
            np.array([sp.word], dtype=np.int64))
        if eta > self.tol:
            raise DepthInsufficient(
                f"contraction bound {eta:.3g} exceeds tol {self.tol:.3g} "
                f"at depth {sp.depth}; increase the prehistory depth")
        return complex(z[0]), complex(w[0])

    def _realize_batch(self, thetas, words):
        """Vectorized realize: thetas (m,), words (m, N) -> (z, w, eta).

        eta is the max endpoint spread between the two seed choices, the
        a-posteriori bound on the remaining fiber uncertainty.
        """
        fmap = self.map
        m, n_steps = words.shape
        angles = np.empty((n_steps + 1, m))
        angles[0] = np.asarray(thetas, dtype=float) % TWO_PI
        for j in range(n_steps):
            angles[j + 1] = (angles[j] + TWO_PI * words[:, j]) / fmap.degree
        z1 = np.full(m, self.p0, dtype=complex)
        z2 = np.full(m, self.p0 + SEED_OFFSET, dtype=complex)
        for j in range(n_steps, 0, -1):
            w_level = np.exp(1j * angles[j])
            z1, _ = maps.apply(fmap, z1, w_level)
            z2, _ = maps.apply(fmap, z2, w_level)
        eta = float(np.max(np.abs(z1 - z2))) if m else 0.0
        return z1, np.exp(1j * angles[0]), eta

    def fiber_values(self, theta):
        """Realized z-fiber over one base angle: every branch prefix of
        length fiber_prefix_depth, padded with zeros to the model depth."""
        if self.map.kind == "product":
            return np.array([self.p0])
        k = self.fiber_prefix_depth
        n = max(self.depth, k)
        d = self.map.degree
        count = d ** k
        idx = np.arange(count)
        words = np.zeros((count, n), dtype=np.int64)
        for j in range(k):
            words[:, j] = (idx // d ** (k - 1 - j)) % d
        z, _, eta = self._realize_batch(np.full(count, theta), words)
        if eta > self.tol:
            raise DepthInsufficient(
                f"fiber realization bound {eta:.3g} exceeds tol; "
                "increase the model depth")
        return z

    # -- membership ----------------------------------------------------

    def membership_distance(self, point):
        """Distance from `point` to the realized net (z-fiber at the
        query's own angle plus the circle deviation of w)."""
        z, w = complex(point[0]), complex(point[1])
        if w == 0:
            return float("inf")
        theta = float(np.angle(w)) % TWO_PI
        fiber = self.fiber_values(theta)
        z_dist = float(np.min(np.abs(fiber - z)))
        w_dist = abs(abs(w) - 1.0)
        return max(z_dist, w_dist)

    def forward_confined(self, point, steps=None):
        """True when the forward orbit stays in the neighborhood U =
        {|z - p0| <= r, ||w| - 1| <= r} for the configured step count."""
        r = self.neighborhood_radius
        z, w = complex(point[0]), complex(point[1])
        for _ in range((steps or self.forward_steps) + 1):
            if abs(z - self.p0) > r or abs(abs(w) - 1.0) > r:
                return False
            z, w = maps.apply(self.map, z, w)
        return True

    def membership(self, point):
        """Net-distance plus forward-confinement membership test."""
        if not self.forward_confined(point):
            return False
        return self.membership_distance(point) < self.tol

    def require_membership(self, point, what="point"):
        if not self.membership(point):
            raise NotOnBasicSet(f"{what} {point!r} is not on the basic set "
                                f"at tolerance {self.tol:.3g}")

    # -- preimages -------------------------------------------------------

    def preimage_candidates(self, point):
        """All solutions of f(y) = x in C^2, each with its membership
        distance and confinement flag.  Returns a list of dicts."""
        fmap = self.map
        z, w = complex(point[0]), complex(point[1])
        d = fmap.degree
        out = []
        base_root = abs(w) ** (1.0 / d)
        theta = float(np.angle(w))
        for mth in range(d):
            wp = base_root * np.exp(1j * (theta + TWO_PI * mth) / d)
            if fmap.kind == "product":
                s = np.sqrt(complex(z - fmap.c))
                z_roots = [s, -s]
            else:
                alpha = fmap.eps * (fmap.a + fmap.d_coef * wp)
                beta = fmap.c + fmap.eps * (fmap.b * wp + fmap.e * wp * wp)
                disc = np.sqrt(alpha * alpha - 4.0 * (beta - z))
                z_roots = [(-alpha + disc) / 2.0, (-alpha - disc) / 2.0]
            fiber = self.fiber_values(float(np.angle(wp)) % TWO_PI)
            w_dist = abs(abs(wp) - 1.0)
            for zp in z_roots:
                dist = max(float(np.min(np.abs(fiber - zp))), w_dist)
                out.append({
                    "z": complex(zp),
                    "w": complex(wp),
                    "distance": dist,
                    "confined": self.forward_confined((zp, wp)),
                })
        return out

    def preimage_count(self, point, strict=True):
        """Number of preimages of `point` inside the basic set.

        With strict=True (default), raises AmbiguousMembership if any
        candidate lies within a factor 2 of the membership boundary; the
        exception carries both the strict and the loose count.
        """
        self.require_membership(point)
        cands = self.preimage_candidates(point)
        count_strict = sum(1 for c in cands
                           if c["confined"] and c["distance"] < self.tol)
        count_loose = sum(1 for c in cands
                          if c["confined"] and c["distance"] < 2.0 * self.tol)
        if strict:
            for c in cands:
                if c["confined"] and (self.tol / 2.0 < c["distance"]
                                      < 2.0 * self.tol):
                    raise AmbiguousMembership(
                        f"preimage candidate at distance {c['distance']:.3g} "
                        f"sits within 2x of the membership boundary "
                        f"{self.tol:.3g}; shrink the tolerance",
                        count_strict=count_strict, count_loose=count_loose)
        return count_strict

    # -- witnesses -------------------------------------------------------

    def net(self, n_angles=None, rng_seed=0):
        """Realized sample net of the basic set, cached for the default
        size: evenly spaced angles with (for perturbed maps) one random
        branch word each."""
        if n_angles is None and self._net_cache is not None:
            return self._net_cache
        count = int(n_angles or self.net_angles)
        thetas = TWO_PI * np.arange(count) / count
        if self.map.kind == "product":
            zs = np.full(count, self.p0, dtype=complex)
            ws = np.exp(1j * thetas)
        else:
            rng = np.random.default_rng(rng_seed)
            words = rng.integers(0, self.map.degree,
                                 size=(count, self.depth))
            zs, ws, eta = self._realize_batch(thetas, words)
            if eta > self.tol:
                raise DepthInsufficient(
                    "net realization bound exceeds tol; increase depth")
        result = (zs, ws)
        if n_angles is None:
            self._net_cache = result
        return result

    def hyperbolicity_witness(self):
        """(max stable stretch, min unstable stretch) over the net."""
        zs, ws = self.net()
        s = np.abs(maps.dz_dz(self.map, zs, ws))
        u = np.abs(maps.dw_dw(self.map, ws))
        return float(s.max()), float(u.min())

    def assert_hyperbolic(self):
        s_max, u_min = self.hyperbolicity_witness()
        if s_max > STABLE_WITNESS or u_min < UNSTABLE_WITNESS:
            raise ConeCollapse(
                f"hyperbolicity witness failed: max |Dfs| = {s_max:.3g} "
                f"(bound {STABLE_WITNESS}), min |Dfu| = {u_min:.3g} "
                f"(bound {UNSTABLE_WITNESS})")
        return s_max, u_min

    def forward_invariance_witness(self, sample=256, rng_seed=1):
        """Max distance between f(realized point) and the realization of
        its shifted solenoid coordinates, over a random sample of the net."""
        rng = np.random.default_rng(rng_seed)
        worst = 0.0
        for _ in range(sample):
            theta = float(rng.uniform(0.0, TWO_PI))
            word = tuple(int(b) for b in
                         rng.integers(0, self.map.degree, size=self.depth))
            sp = SolenoidPoint(theta, word)
            x = self.realize(sp)
            fx = maps.apply(self.map, *x)
            y = self.realize(shift_point(sp, self.map.degree))
            worst = max(worst, metric(fx, y))
        return worst

    def critical_distance(self):
        """Distance from the net to the critical set of the map; raises
        CriticalOnSet below the configured threshold."""
        zs, ws = self.net()
        dist = maps.critical_distance(self.map, list(zip(zs, ws)))
        if dist < self.critical_tol:
            raise CriticalOnSet(
                f"critical set within {dist:.3g} of the basic set "
                f"(threshold {self.critical_tol:.3g})")
        return dist


def raw_product_net(c, n_angles=256):
    """Net {p_fix} x S^1 built from the raw fixed-point formula without the
    attracting/superattracting guards.  Lets critical-distance diagnostics
    run for parameters the guarded constructor rejects (e.g. c = 0)."""
    root = np.sqrt(complex(1.0 - 4.0 * c))
    p = min([(1.0 - root) / 2.0, (1.0 + root) / 2.0], key=abs)
    thetas = TWO_PI * np.arange(n_angles) / n_angles
    return np.full(n_angles, p, dtype=complex), np.exp(1j * thetas)
