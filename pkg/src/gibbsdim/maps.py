"""Quadratic polynomial skew products on C^2 and their differentials.

Two families. The product map

    f0(z, w) = (z^2 + c, w^d)

and its quadratic perturbation (degree-2 base)

    f_eps(z, w) = (z^2 + c + eps*(a z + b w + d z w + e w^2), w^2).

The z-direction is invariant for every member (the differential is upper
triangular), so the stable line field on a saddle set is exactly the
z-axis and the one-step stable stretch is |dF/dz|.  Unstable directions
depend on prehistories; n-step unstable norms are computed by pushing a
vector of the unstable cone along the orbit with per-step renormalization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConeCollapse, NotAttracting, Superattracting

SUPERATTRACTING_TOL = 1e-8
CONE_SLOPE = 1.0


@dataclass(frozen=True)
class MapFamily:
    """A member of the product or perturbed family.

    kind is "product" or "perturbed".  For products, `degree` is the base
    degree d >= 2 and the coefficients are ignored.  For perturbed maps the
    base is fixed to w^2 and (a, b, d, e, eps) enter the z-coordinate as
    written in the module docstring; `d_coef` is the z*w coefficient (the
    name avoids a clash with the base degree).
    """

    kind: str
    c: complex
    degree: int = 2
    a: complex = 0.0
    b: complex = 0.0
    d_coef: complex = 0.0
    e: complex = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("product", "perturbed"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.degree < 2:
            raise ValueError("base degree must be >= 2")
        if self.kind == "perturbed" and self.degree != 2:
            raise ValueError("perturbed family has a degree-2 base")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")

    @classmethod
    def product(cls, c, degree=2):
        return cls(kind="product", c=complex(c), degree=int(degree))

    @classmethod
    def perturbed(cls, c, a=0.0, b=0.0, d=0.0, e=0.0, eps=0.0):
        return cls(kind="perturbed", c=complex(c), a=complex(a),
                   b=complex(b), d_coef=complex(d), e=complex(e),
                   eps=float(eps))

    @property
    def is_product_structured(self):
        """True when the z-coordinate map does not depend on w, so the
        basic set is a true product {p0} x S^1."""
        if self.kind == "product":
            return True
        return self.eps == 0.0 or (self.b == 0 and self.d_coef == 0
                                   and self.e == 0)


def apply(fmap, z, w):
    """One step of the map; accepts scalars or numpy arrays."""
    if fmap.kind == "product":
        return z * z + fmap.c, w ** fmap.degree
    ez = fmap.eps
    z_new = (z * z + fmap.c
             + ez * (fmap.a * z + fmap.b * w + fmap.d_coef * z * w
                     + fmap.e * w * w))
    return z_new, w * w


def dz_dz(fmap, z, w):
    """dF/dz, the exact one-step stable stretch on the invariant z-line."""
    if fmap.kind == "product":
        return 2.0 * z
    return 2.0 * z + fmap.eps * (fmap.a + fmap.d_coef * w)


def dz_dw(fmap, z, w):
    if fmap.kind == "product":
        return np.zeros_like(np.asarray(w, dtype=complex))
    return fmap.eps * (fmap.b + fmap.d_coef * z + 2.0 * fmap.e * w)


def dw_dw(fmap, w):
    d = fmap.degree
    return d * w ** (d - 1)


@dataclass(frozen=True)
class Differential2:
    """The 2x2 complex differential at a point (upper triangular)."""

    dzz: complex
    dzw: complex
    dwz: complex
    dww: complex

    @property
    def det(self):
        return self.dzz * self.dww - self.dzw * self.dwz

    def as_array(self):
        return np.array([[self.dzz, self.dzw], [self.dwz, self.dww]])


def differential(fmap, z, w):
    return Differential2(dzz=complex(dz_dz(fmap, z, w)),
                         dzw=complex(dz_dw(fmap, z, w)),
                         dwz=0.0,
                         dww=complex(dw_dw(fmap, w)))


def attracting_fixed_point(fmap):
    """The attracting fixed point p0 of z -> z^2 + c.

    Both roots (1 +- sqrt(1 - 4c))/2 are tried; the one with |2 p0| < 1 is
    returned.  Raises NotAttracting when neither root attracts and
    Superattracting when the multiplier is numerically zero.
    """
    p0 = _raw_fixed_point(fmap.c)
    if p0 is None:
        raise NotAttracting(
            f"z^2 + c has no attracting fixed point for c = {fmap.c}")
    if abs(2.0 * p0) < SUPERATTRACTING_TOL:
        raise Superattracting(
            f"fixed point of z^2 + c is superattracting for c = {fmap.c}")
    return p0


def _raw_fixed_point(c):
    """Fixed point of z^2 + c with smallest multiplier, or None."""
    root = np.sqrt(complex(1.0 - 4.0 * c))
    candidates = [(1.0 - root) / 2.0, (1.0 + root) / 2.0]
    best = min(candidates, key=lambda p: abs(2.0 * p))
    if abs(2.0 * best) >= 1.0:
        return None
    return complex(best)


def stable_unstable_norms(fmap, point, n, warmup=None):
    """Norms of Df^n restricted to the stable and unstable directions at
    `point`, as a pair (stable_norm, unstable_norm).

    The stable direction is the exact invariant z-line; its norm is the
    product of |dF/dz| along the orbit.  The unstable norm pushes a cone
    vector (0, 1) forward with per-step renormalization; `warmup` optionally
    gives a finite prehistory (list of points, deepest first) along which
    the vector is aligned before the count starts.  n = 0 returns (1, 1).

    Raises ConeCollapse if the pushed unstable vector leaves the slope-1
    cone around the w-axis, or if a one-step stable factor reaches the
    unstable one (directions fail to separate).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    z, w = complex(point[0]), complex(point[1])

    vz, vw = 0.0 + 0.0j, 1.0 + 0.0j
    if warmup:
        for pz, pw in warmup:
            vz, vw = _push(fmap, complex(pz), complex(pw), vz, vw)
            scale = max(abs(vz), abs(vw))
            vz, vw = vz / scale, vw / scale

    log_s = 0.0
    log_u = 0.0
    for _ in range(n):
        s_factor = abs(dz_dz(fmap, z, w))
        nvz, nvw = _push(fmap, z, w, vz, vw)
        u_norm = float(np.hypot(abs(nvz), abs(nvw)))
        v_norm = float(np.hypot(abs(vz), abs(vw)))
        u_factor = u_norm / v_norm
        if abs(nvw) * CONE_SLOPE < abs(nvz):
            raise ConeCollapse(
                "unstable cone vector left the slope-1 cone; the map is "
                "too far from the product structure to be hyperbolic here")
        if s_factor >= u_factor:
            raise ConeCollapse(
                "stable and unstable one-step factors crossed "
                f"({s_factor:.3g} >= {u_factor:.3g})")
        log_s += np.log(s_factor)
        log_u += np.log(u_factor)
        vz, vw = nvz / u_norm, nvw / u_norm
        z, w = apply(fmap, z, w)
    return float(np.exp(log_s)), float(np.exp(log_u))


def _push(fmap, z, w, vz, vw):
    """Apply the differential at (z, w) to the vector (vz, vw)."""
    return (dz_dz(fmap, z, w) * vz + dz_dw(fmap, z, w) * vw,
            dw_dw(fmap, w) * vw)


def critical_distance(fmap, points):
    """Minimum distance from the sampled set `points` (array of (z, w))
    to the critical set {det Df = 0}.

    det Df = (dF/dz) * (d w^(d-1)), so the critical set is {w = 0} union
    {dF/dz = 0}.  Distances to both complex lines are closed-form.
    """
    zs = np.asarray([p[0] for p in points], dtype=complex)
    ws = np.asarray([p[1] for p in points], dtype=complex)
    dist_w0 = np.abs(ws)
    if fmap.kind == "product" or fmap.eps == 0.0 or fmap.d_coef == 0:
        # dF/dz = 0 is the line z = z_crit (constant in w)
        z_crit = 0.0 if fmap.kind == "product" else -fmap.eps * fmap.a / 2.0
        dist_a0 = np.abs(zs - z_crit)
    else:
        # dF/dz = 2z + eps(a + d w) = 0 is an affine graph over w;
        # distance from (z0, w0) is |r| / sqrt(1 + |s|^2) with
        # r = z0 + (eps/2)(a + d w0) and s = eps d / 2 (least squares in w).
        r = zs + (fmap.eps / 2.0) * (fmap.a + fmap.d_coef * ws)
        s = fmap.eps * fmap.d_coef / 2.0
        dist_a0 = np.abs(r) / np.sqrt(1.0 + abs(s) ** 2)
    return float(np.minimum(dist_w0, dist_a0).min())
