"""Symbolic coordinates on the basic set.

Base dynamics is angle multiplication by the degree, so period-n base
points are theta = 2*pi*k/(d^n - 1) and the forward itinerary of k is its
n-digit base-d expansion.  Over each such angle the fiber composition is a
contraction, so the map has exactly one period-n point on the basic set
per base point: d^n - 1 in all.  The ensemble stores the k-indices and the
refined fiber coordinates; Birkhoff sums stream along the orbit without
materializing full orbit arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import maps
from .basicset import TWO_PI, SolenoidPoint
from .errors import NewtonDiverged, NotOnBasicSet, PeriodTooLarge

MAX_PERIOD = 24
NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-12
NEWTON_STEP_CAP = 0.1


@dataclass(frozen=True)
class Itinerary:
    """Finite base itinerary; orbits are named by the lex-min rotation."""

    word: tuple

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(b) for b in self.word))

    @classmethod
    def from_index(cls, k, n, degree=2):
        digits = []
        for j in range(n - 1, -1, -1):
            digits.append((k // degree ** j) % degree)
        return cls(tuple(digits))

    @property
    def period(self):
        return len(self.word)

    def canonical(self):
        w = self.word
        best = min(w[i:] + w[:i] for i in range(len(w)))
        return Itinerary(best)

    def same_orbit(self, other):
        return (self.period == other.period
                and self.canonical().word == other.canonical().word)


def uniform_solenoid_point(rng, depth, degree=2, theta=None):
    """Random SolenoidPoint: uniform angle, iid uniform branch word.

    depth 0 is allowed and yields an empty word (exact for product maps,
    where the fiber needs no prehistory).
    """
    if theta is None:
        theta = float(rng.uniform(0.0, TWO_PI))
    word = tuple(int(b) for b in rng.integers(0, degree, size=int(depth)))
    return SolenoidPoint(theta, word)


def sample_prehistory(bs, x, depth, rng):
    """One backward orbit of the member point x, choosing uniformly among
    its in-set preimages at each of `depth` steps.

    On a d-prime = 1 set the branch is forced at every step and the word
    is deterministic; depth 0 returns the empty-word coordinates of x.
    Raises NotOnBasicSet when x fails membership.
    """
    bs.require_membership(x)
    theta0 = float(np.angle(complex(x[1]))) % TWO_PI
    point = (complex(x[0]), complex(x[1]))
    word = []
    for _ in range(int(depth)):
        cands = bs.preimage_candidates(point)
        members = [c for c in cands
                   if c["confined"] and c["distance"] < bs.tol]
        if not members:
            raise NotOnBasicSet(
                f"no in-set preimage found at backward step {len(word)}")
        pick = members[int(rng.integers(0, len(members)))]
        branch = int(((np.angle(pick["w"]) * bs.map.degree
                       - np.angle(point[1])) / TWO_PI) % bs.map.degree + 0.5)
        word.append(branch % bs.map.degree)
        point = (pick["z"], pick["w"])
    return SolenoidPoint(theta0, tuple(word))


def _refine_fibers(fmap, thetas, z0, n):
    """Damped Newton for the period-n fiber equation z = F_z^n(z; theta
    chain), vectorized over all base points.  The fiber composition is a
    strong contraction, so D - 1 stays away from zero."""
    z = np.array(z0, dtype=complex)
    m = z.shape[0]
    w0 = np.exp(1j * np.asarray(thetas))
    resid = None
    for _ in range(NEWTON_MAX_ITER):
        zc = z.copy()
        w = w0.copy()
        deriv = np.ones(m, dtype=complex)
        for _j in range(n):
            deriv = deriv * maps.dz_dz(fmap, zc, w)
            zc, w = maps.apply(fmap, zc, w)
            w = w / np.abs(w)
        resid = zc - z
        if float(np.max(np.abs(resid))) < NEWTON_TOL:
            return z
        step = -resid / (deriv - 1.0)
        mag = np.abs(step)
        scale = np.where(mag > NEWTON_STEP_CAP, NEWTON_STEP_CAP / mag, 1.0)
        z = z + step * scale
    raise NewtonDiverged(
        f"period-{n} fiber refinement stalled at residual "
        f"{float(np.max(np.abs(resid))):.3g}")


class PeriodicEnsemble:
    """All period-n points of the map on its basic set, array-backed.

    thetas, zs, ws are aligned (m,) arrays of the orbit representatives at
    time zero; index arithmetic stays in integers so orbits can be grouped
    exactly.
    """

    def __init__(self, fmap, n, thetas, zs):
        self.map = fmap
        self.n = int(n)
        self.thetas = thetas
        self.zs = zs
        self.ws = np.exp(1j * thetas)
        self.indices = np.arange(thetas.shape[0], dtype=np.int64)

    def __len__(self):
        return self.thetas.shape[0]

    @property
    def count(self):
        return len(self)

    def point(self, i):
        return complex(self.zs[i]), complex(self.ws[i])

    def itinerary(self, i):
        return Itinerary.from_index(int(self.indices[i]), self.n,
                                    self.map.degree)

    def items(self):
        """Iterate (Itinerary, (z, w)) pairs, the list-shaped view."""
        for i in range(len(self)):
            yield self.itinerary(i), self.point(i)

    def orbit_ids(self):
        """Smallest k-index on each point's orbit; equal ids mean the same
        periodic orbit."""
        d = self.map.degree
        mod = d ** self.n - 1
        if mod == 0:
            return np.zeros(len(self), dtype=np.int64)
        k = self.indices.copy()
        best = k.copy()
        for _ in range(self.n - 1):
            k = (d * k) % mod
            best = np.minimum(best, k)
        return best

    def birkhoff(self, func):
        """Sum of func(z_j, w_j) along each orbit, j = 0..n-1, streamed."""
        z = self.zs.copy()
        w = self.ws.copy()
        acc = np.zeros(len(self), dtype=float)
        for _ in range(self.n):
            acc += func(z, w)
            z, w = maps.apply(self.map, z, w)
            w = w / np.abs(w)
        return acc

    def birkhoff_log_stable(self):
        fmap = self.map
        return self.birkhoff(
            lambda z, w: np.log(np.abs(maps.dz_dz(fmap, z, w))))

    def birkhoff_log_unstable(self):
        fmap = self.map
        return self.birkhoff(
            lambda z, w: np.log(np.abs(maps.dw_dw(fmap, w))))


def periodic_points(fmap, n, p0=None):
    """PeriodicEnsemble of all period-n points on the basic set.

    Product fibers sit exactly at the attracting fixed point; perturbed
    fibers are Newton-refined from that seed.
    """
    n = int(n)
    if n < 1:
        raise ValueError("period must be >= 1")
    if n > MAX_PERIOD:
        raise PeriodTooLarge(
            f"period {n} exceeds the supported maximum {MAX_PERIOD}")
    if p0 is None:
        p0 = maps.attracting_fixed_point(fmap)
    d = fmap.degree
    m = d ** n - 1
    thetas = TWO_PI * np.arange(m, dtype=float) / m
    if fmap.is_product_structured and fmap.kind == "product":
        zs = np.full(m, p0, dtype=complex)
    else:
        zs = _refine_fibers(fmap, thetas, np.full(m, p0, dtype=complex), n)
    return PeriodicEnsemble(fmap, n, thetas, zs)
