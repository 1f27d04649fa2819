"""Pointwise dimension of Gibbs measures via iterated round balls.

The object of study is B(n, k, z, eps) = f^n(B_{n+k}(z, eps)): push a
Bowen ball forward until its stable and unstable sides are comparable
("round").  The measure of such a ball factors as
exp(S_{n+k} phi_bar(z)) / (d')^k, and the pointwise dimension is the
slope of log-measure against log-radius with rho = eps * |Df^n_s(z)|.

Monte Carlo cross-checks sample the Gibbs measure by cylinder words.  On
the expanding branch (d' = degree) a ball meets the basic set in a single
base arc, so membership is an exact arc test.  On the graph branch
(d' = 1) membership additionally pins the sample's own backward branch
word to the center's routing bits, and survivors get a full two-sided
Bowen verification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import maps, symbolic, thermo
from .basicset import TWO_PI, SolenoidPoint, backward_angles
from .errors import (DegenerateExponents, InconsistentCount,
                     InsufficientSamples, NonConvergent, SignViolation)

BALL_EPS = 0.05
MIN_HITS = 20
# ratio cells only need a crude count; slope fits need MIN_HITS
GRID_MIN_HITS = 8
CHUNK = 2_000_000
FIBER_PAD = 14
ANGLE_BITS = 32
SURVEY_POINTS = 100
CONSTANCY_TOL = 0.02
K_RATIO_ORDER = 30
EXPONENT_FLOOR = 1e-6

REGIME_HOMEO = "homeomorphic-like"
REGIME_GENERIC = "generic"
REGIME_EXPANDING = "expanding"


@dataclass(frozen=True)
class IteratedBall:
    """B(n, k, z, eps) = f^n(B_{n+k}(z, eps)); n = 0 is the Bowen ball."""

    z: tuple
    n: int
    k: int
    eps: float = BALL_EPS

    def __post_init__(self):
        if self.n < 0 or self.k < 0:
            raise ValueError("ball orders must be >= 0")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


def log_ball_measure(gm, ball, bs=None):
    """log of the iterated-ball mass formula: S_{n+k} phi_bar(z)
    - k log d'."""
    bs = bs if bs is not None else gm.basic_set
    gm.assert_normalized()
    s = thermo.birkhoff_sum(bs, gm.phi_bar, ball.z, ball.n + ball.k)
    return s - ball.k * math.log(gm.d_prime)


def ball_measure(gm, ball, bs=None):
    return math.exp(log_ball_measure(gm, ball, bs))


def round_k(bs, z, n, k_cap=200):
    """Smallest-|residual| k with S_n log|Dfs|(z) + S_k log|Dfu|(f^n z)
    nearest zero; ties go to the smaller k; n = 0 gives 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    bs.require_membership(z)
    if n == 0:
        return 0
    fmap = bs.map
    zc, wc = complex(z[0]), complex(z[1])
    s_n = 0.0
    for _ in range(int(n)):
        s_n += math.log(abs(maps.dz_dz(fmap, zc, wc)))
        zc, wc = maps.apply(fmap, zc, wc)
        wc = wc / abs(wc)
    best_k, best_res = 0, abs(s_n)
    s_u = 0.0
    for k in range(1, k_cap + 1):
        s_u += math.log(abs(maps.dw_dw(fmap, wc)))
        zc, wc = maps.apply(fmap, zc, wc)
        wc = wc / abs(wc)
        res = abs(s_n + s_u)
        if res < best_res:
            best_k, best_res = k, res
        if s_u > -s_n:
            break
    return best_k


def dimension_formula(h, chi_s, chi_u, d_prime, regime=REGIME_GENERIC):
    """Pointwise dimension from entropy and exponents.

    Generic/homeomorphic-like regime: h (1/chi_u - 1/chi_s)
    + log d'/chi_s; expanding regime: h/chi_u.
    """
    if h < 0:
        raise ValueError("entropy must be >= 0")
    if abs(chi_s) < EXPONENT_FLOOR or chi_u < EXPONENT_FLOOR:
        raise DegenerateExponents(
            f"exponents too close to zero: chi_s = {chi_s:.3g}, "
            f"chi_u = {chi_u:.3g}")
    if not (chi_s < 0.0 < chi_u):
        raise SignViolation(
            f"need chi_s < 0 < chi_u, got ({chi_s:.6g}, {chi_u:.6g})")
    if regime == REGIME_EXPANDING:
        return h / chi_u
    return h * (1.0 / chi_u - 1.0 / chi_s) + math.log(d_prime) / chi_s


# -- Gibbs sampling plumbing ---------------------------------------------


def _sampler_for(gm):
    sampler = getattr(gm, "_word_sampler", None)
    if sampler is None:
        sampler = thermo.GibbsWordSampler(gm.map, gm.potential)
        sampler.is_uniform = bool(np.ptp(sampler.joint)
                                  < 1e-14 / sampler.joint.size)
        gm._word_sampler = sampler
    return sampler


def _sample_angles_words(gm, rng, count, backward_len):
    """(angles, backward words) for `count` Gibbs samples; the uniform
    table short-circuits to direct draws (identical distribution)."""
    sampler = _sampler_for(gm)
    if sampler.is_uniform:
        phi = rng.random(count) * TWO_PI
        bwd = (rng.integers(0, 2, size=(count, backward_len),
                            dtype=np.int8)
               if backward_len else np.zeros((count, 0), dtype=np.int8))
        return phi, bwd
    fwd, bwd = sampler.sample_words(rng, count, ANGLE_BITS, backward_len)
    return sampler.angles_from_bits(fwd), bwd.astype(np.int8)


def arc_half_width(eps, k):
    """Base-angle half width of B(n, k, ., eps) on the set: the binding
    Bowen constraint is the chord at the deepest unstable step."""
    return 2.0 * math.asin(min(eps, 2.0) / 2.0) * 2.0 ** (1 - k)


@dataclass
class CenterData:
    """A Gibbs-typical ball center with everything the estimators need:
    realized point, forward orbit, backward chain, cumulative sums."""

    sp: SolenoidPoint
    point: tuple
    fwd_angles: np.ndarray      # theta_i = angle of f^i(center)
    fwd_z: np.ndarray
    fwd_bits: np.ndarray        # base itinerary bit consumed at step i
    cum_log_s: np.ndarray       # cum_log_s[i] = S_i log|Dfs|(center)
    cum_log_u: np.ndarray
    cum_phi_bar: np.ndarray
    back_angles: np.ndarray     # backward chain, index j = depth
    back_z: np.ndarray

    def route_bits(self, n):
        """Backward branch word a sample must carry for its depth-n
        preimage to land at the center: the first n forward bits of the
        center, deepest choice first."""
        return self.fwd_bits[:n][::-1]


def make_center(gm, bs, rng, n_max, k_max, eps=BALL_EPS):
    depth = max(bs.depth, n_max + FIBER_PAD)
    sampler = _sampler_for(gm)
    if sampler.is_uniform:
        theta = float(rng.random() * TWO_PI)
        word = tuple(int(b) for b in rng.integers(0, 2, size=depth))
    else:
        fwd, bwd = sampler.sample_words(rng, 1, ANGLE_BITS, depth)
        theta = float(sampler.angles_from_bits(fwd)[0])
        word = tuple(int(b) for b in bwd[0])
    sp = SolenoidPoint(theta, word)
    point = bs.realize(sp)
    fmap = bs.map

    back_angles = np.asarray(backward_angles(theta, word, fmap.degree))
    back_z = np.empty(depth + 1, dtype=complex)
    z = complex(bs.p0)
    back_z[depth] = z
    for j in range(depth, 0, -1):
        z, _ = maps.apply(fmap, z, np.exp(1j * back_angles[j]))
        back_z[j - 1] = z

    steps = n_max + k_max + 2
    fwd_angles = np.empty(steps + 1)
    fwd_z = np.empty(steps + 1, dtype=complex)
    fwd_bits = np.empty(steps + 1, dtype=np.int8)
    log_s = np.empty(steps)
    log_u = np.empty(steps)
    phi_bar = np.empty(steps)
    zc, wc = complex(point[0]), complex(point[1])
    th = theta
    for i in range(steps + 1):
        fwd_angles[i] = th
        fwd_z[i] = zc
        fwd_bits[i] = 0 if th < np.pi else 1
        if i == steps:
            break
        log_s[i] = math.log(abs(maps.dz_dz(fmap, zc, wc)))
        log_u[i] = math.log(abs(maps.dw_dw(fmap, wc)))
        phi_bar[i] = float(gm.phi_bar.values(fmap,
                                             np.array([zc]),
                                             np.array([wc]))[0])
        zc, wc = maps.apply(fmap, zc, wc)
        wc = wc / abs(wc)
        th = (fmap.degree * th) % TWO_PI
    zero = np.zeros(1)
    return CenterData(sp=sp, point=point, fwd_angles=fwd_angles,
                      fwd_z=fwd_z, fwd_bits=fwd_bits,
                      cum_log_s=np.concatenate([zero, np.cumsum(log_s)]),
                      cum_log_u=np.concatenate([zero, np.cumsum(log_u)]),
                      cum_phi_bar=np.concatenate([zero,
                                                  np.cumsum(phi_bar)]),
                      back_angles=back_angles, back_z=back_z)


def _round_k_from_center(center, n):
    if n == 0:
        return 0
    target = -center.cum_log_s[n]
    residuals = np.abs(center.cum_log_u - target)
    return int(np.argmin(residuals))


# -- Monte Carlo ball masses ---------------------------------------------


def _arc_hits(phi, mid, half):
    """Boolean mask of angles within `half` of `mid` on the circle; the
    arcs here are far narrower than pi, so one |d| test plus its 2pi
    complement covers the wraparound without a modulo pass."""
    d = np.abs(phi - mid)
    hit = d <= half
    if mid < half or mid > TWO_PI - half:
        hit |= d >= TWO_PI - half
    return hit


def _mc_masses_expanding(gm, center, balls, samples, rng):
    """Hit counts for arc-shaped balls (d' = degree): per ball, samples
    whose base angle falls in the image arc."""
    counts = np.zeros(len(balls), dtype=np.int64)
    arcs = [((center.fwd_angles[n]) % TWO_PI, arc_half_width(eps, k))
            for (n, k, eps) in balls]
    remaining = samples
    while remaining > 0:
        m = min(CHUNK * 5, remaining)
        phi, _ = _sample_angles_words(gm, rng, m, 0)
        for i, (mid, half) in enumerate(arcs):
            counts[i] += int(np.count_nonzero(_arc_hits(phi, mid,
                                                        half)))
        remaining -= m
    return counts


def _bowen_verify(bs, center, n, k, eps, phi, codes, depth):
    """Full two-sided Bowen check of prefiltered samples against the
    center orbit: each depth-n backward point must eps-shadow the center
    for n+k steps in both coordinates.

    phi / codes are parallel arrays (angle, prehistory bits packed as an
    integer); returns the boolean pass mask."""
    fmap = bs.map
    deg = float(fmap.degree)
    bits = (codes[:, None] >> np.arange(depth, dtype=np.int64)) & 1
    # backward angle chain ang[j] at backward depth j, 0 .. depth
    ang = np.empty((phi.size, depth + 1), dtype=float)
    ang[:, 0] = phi
    for j in range(depth):
        ang[:, j + 1] = (ang[:, j] + TWO_PI * bits[:, j]) / deg
    # z-chain seeded with p0 at the deepest level, realized upward
    z = np.full(phi.size, complex(bs.p0))
    for j in range(depth, n, -1):
        z, _ = maps.apply(fmap, z, np.exp(1j * ang[:, j]))
    w = np.exp(1j * ang[:, n])
    ok = np.ones(phi.size, dtype=bool)
    for i in range(n + k):
        ok &= np.abs(z - center.fwd_z[i]) <= eps
        ok &= np.abs(w - np.exp(1j * center.fwd_angles[i])) <= eps
        z, w = maps.apply(fmap, z, w)
        w = w / np.abs(w)
    return ok


def _mc_masses_graph(gm, bs, center, balls, samples, rng):
    """Hit counts for d' = 1 balls: arc prefilter, routing-bit match on
    the sample's own prehistory, then exact Bowen verification.

    Backward words travel as integer codes (bit j = backward choice j),
    so only arc survivors ever get their bits unpacked.
    """
    n_max = max(b[0] for b in balls)
    counts = np.zeros(len(balls), dtype=np.int64)
    arcs = [((center.fwd_angles[n]) % TWO_PI, arc_half_width(eps, k))
            for (n, k, eps) in balls]
    routes = []
    for (n, _k, _e) in balls:
        bits = center.route_bits(n)
        routes.append(sum(int(b) << j for j, b in enumerate(bits)))
    depth = n_max + FIBER_PAD
    sampler = _sampler_for(gm)
    weights = (1 << np.arange(depth, dtype=np.int64))
    remaining = samples
    while remaining > 0:
        m = min(CHUNK, remaining)
        if sampler.is_uniform:
            phi = rng.random(m) * TWO_PI
            codes = rng.integers(0, 1 << depth, size=m, dtype=np.int64)
        else:
            phi, words = _sample_angles_words(gm, rng, m, depth)
            codes = words.astype(np.int64) @ weights
        for i, ((mid, half), (n, k, eps)) in enumerate(zip(arcs, balls)):
            idx = np.nonzero(_arc_hits(phi, mid, half))[0]
            if idx.size and n > 0:
                mask = (1 << n) - 1
                idx = idx[(codes[idx] & mask) == routes[i]]
            if idx.size:
                ok = _bowen_verify(bs, center, n, k, eps,
                                   phi[idx], codes[idx], depth)
                counts[i] += int(np.count_nonzero(ok))
        remaining -= m
    return counts


def mc_ball_masses(gm, bs, center, balls, samples, rng):
    """Monte Carlo masses of iterated balls at a common center.

    balls: list of (n, k, eps).  Returns hit fractions; raises
    InsufficientSamples when any ball collects fewer than MIN_HITS.
    """
    if gm.d_prime == gm.map.degree:
        counts = _mc_masses_expanding(gm, center, balls, samples, rng)
    elif gm.d_prime == 1:
        counts = _mc_masses_graph(gm, bs, center, balls, samples, rng)
    else:
        raise ValueError("only d' = 1 or d' = degree are supported")
    low = [(b, int(c)) for b, c in zip(balls, counts) if c < MIN_HITS]
    if low:
        raise InsufficientSamples(
            f"Monte Carlo hits below {MIN_HITS} for balls {low}; "
            f"raise the sample count above {samples}")
    return counts / float(samples)


# -- empirical dimension -------------------------------------------------


def _ols(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm = x - x.mean()
    sxx = float(np.dot(xm, xm))
    slope = float(np.dot(xm, y) / sxx)
    inter = float(y.mean() - slope * x.mean())
    resid = y - (inter + slope * x)
    dof = max(len(x) - 2, 1)
    se = math.sqrt(float(np.dot(resid, resid)) / dof / sxx)
    return slope, inter, se


@dataclass
class EmpiricalDimension:
    slope: float
    half_width: float
    se: float
    slope_formula: float        # regression on rounded-k formula masses
    slope_formula_ideal: float  # regression with fractional k (no
                                # rounding wobble); the reference line
    rows: tuple = field(default=(), repr=False)
    counts: tuple = ()

    def __iter__(self):
        yield self.slope
        yield self.half_width


def _k_cap(bs, n_max):
    """Generous upper bound on round_k from the stable rate at p0."""
    rate = abs(math.log(abs(2.0 * bs.p0))) / math.log(bs.map.degree)
    return int(math.ceil(n_max * rate)) + 4


def _formula_table(gm, center, ns, eps):
    """Per-n ball bookkeeping at one center: (balls, x = log rho,
    y_formula at the rounded k, y_ideal at the fractional k where the
    unstable sum exactly cancels the stable one)."""
    log_dp = math.log(gm.d_prime)
    balls, x, y_formula, y_ideal = [], [], [], []
    for n in ns:
        k = _round_k_from_center(center, n)
        balls.append((n, k, eps))
        x.append(math.log(eps) + center.cum_log_s[n])
        y_formula.append(center.cum_phi_bar[n + k] - k * log_dp)
        target = -center.cum_log_s[n]
        j = int(np.searchsorted(center.cum_log_u, target))
        j = min(max(j, 1), len(center.cum_log_u) - 1)
        frac = ((target - center.cum_log_u[j - 1])
                / (center.cum_log_u[j] - center.cum_log_u[j - 1]))
        k_star = (j - 1) + float(frac)
        phi_interp = np.interp(n + k_star,
                               np.arange(len(center.cum_phi_bar)),
                               center.cum_phi_bar)
        y_ideal.append(phi_interp - k_star * log_dp)
    return balls, x, y_formula, y_ideal


def empirical_dimension(gm, bs, eps=BALL_EPS, n_range=range(1, 5),
                        samples=2_000_000, rng_seed=0):
    """Pointwise-dimension slope at a Gibbs-typical center.

    For each n, builds the round ball (k from round_k), takes
    rho = eps |Df^n_s(center)|, and regresses log mass against log rho
    for both the formula masses and the Monte Carlo masses.  Returns an
    EmpiricalDimension whose half_width folds the fit error and the
    formula/MC slope discrepancy together.
    """
    gm.assert_normalized()
    rng = np.random.default_rng(rng_seed)
    ns = sorted(int(n) for n in n_range)
    if not ns or ns[0] < 1:
        raise ValueError("n_range must contain positive orders")
    n_max = ns[-1]
    center = make_center(gm, bs, rng, n_max, _k_cap(bs, n_max), eps)
    balls, x, y_formula, y_ideal = _formula_table(gm, center, ns, eps)
    masses = mc_ball_masses(gm, bs, center, balls, samples, rng)
    y_mc = np.log(masses)

    slope_mc, _, se = _ols(x, y_mc)
    slope_f, _, _ = _ols(x, y_formula)
    slope_i, _, _ = _ols(x, y_ideal)
    half_width = 2.0 * se + abs(slope_mc - slope_i)

    rows = []
    for i, (n, k, _e) in enumerate(balls):
        part = (_ols(x[:i + 1], y_mc[:i + 1])[0] if i >= 1
                else float("nan"))
        rows.append({"n": n, "k": k,
                     "rho": math.exp(x[i]),
                     "log_mu_formula": float(y_formula[i]),
                     "log_mu_mc": float(y_mc[i]),
                     "slope_partial": part})
    counts = tuple(int(round(m * samples)) for m in masses)
    return EmpiricalDimension(slope=slope_mc, half_width=half_width,
                              se=se, slope_formula=slope_f,
                              slope_formula_ideal=slope_i,
                              rows=tuple(rows), counts=counts)


# -- comparability grid ---------------------------------------------------


@dataclass
class GridComparability:
    c_value: float
    geo_mean: float
    min_ratio: float
    max_ratio: float
    cells: int
    min_count: int


def formula_mc_grid(gm, bs, eps=BALL_EPS, n_max=12, k_max=12,
                    centers=30, samples=4_000_000, rng_seed=0):
    """Formula/Monte-Carlo mass ratios over the full (n, k) grid at many
    Gibbs-typical centers; the comparability constant is the spread of
    the ratios around their geometric mean (the mean soaks up the fixed
    arc-geometry factor of the eps-ball convention).

    Expanding-branch only: with d' = degree the balls are base arcs and
    one sorted sample batch prices every cell exactly.
    """
    if gm.d_prime != gm.map.degree:
        raise ValueError("the grid comparability sweep expects the "
                         "expanding branch (d' = degree)")
    gm.assert_normalized()
    rng = np.random.default_rng(rng_seed)
    phi = np.empty(samples)
    done = 0
    while done < samples:
        m = min(CHUNK, samples - done)
        phi[done:done + m], _ = _sample_angles_words(gm, rng, m, 0)
        done += m
    phi.sort()

    log_ratios = []
    min_count = None
    cells = 0
    for _c in range(centers):
        center = make_center(gm, bs, rng, n_max, k_max, eps)
        for n in range(1, n_max + 1):
            s_phi = center.cum_phi_bar
            for k in range(1, k_max + 1):
                log_mu = (s_phi[n + k]
                          - k * math.log(gm.d_prime))
                mid = center.fwd_angles[n] % TWO_PI
                half = arc_half_width(eps, k)
                lo, hi = mid - half, mid + half
                cnt = 0
                for a, b in ((lo, hi),):
                    if a < 0.0:
                        cnt += int(np.searchsorted(phi, b)
                                   - np.searchsorted(phi, 0.0))
                        cnt += int(np.searchsorted(phi, TWO_PI)
                                   - np.searchsorted(phi, a + TWO_PI))
                    elif b > TWO_PI:
                        cnt += int(np.searchsorted(phi, TWO_PI)
                                   - np.searchsorted(phi, a))
                        cnt += int(np.searchsorted(phi, b - TWO_PI))
                    else:
                        cnt += int(np.searchsorted(phi, b)
                                   - np.searchsorted(phi, a))
                min_count = cnt if min_count is None else min(min_count,
                                                              cnt)
                if cnt < GRID_MIN_HITS:
                    raise InsufficientSamples(
                        f"grid cell n={n}, k={k} collected {cnt} hits; "
                        f"raise the sample count above {samples}")
                log_ratios.append(log_mu - math.log(cnt / samples))
                cells += 1
    log_ratios = np.asarray(log_ratios)
    g = float(np.mean(log_ratios))
    dev = log_ratios - g
    c_value = float(np.exp(np.max(np.abs(dev))))
    return GridComparability(c_value=c_value, geo_mean=float(np.exp(g)),
                             min_ratio=float(np.exp(log_ratios.min())),
                             max_ratio=float(np.exp(log_ratios.max())),
                             cells=cells, min_count=int(min_count))


# -- Jacobian -------------------------------------------------------------


@dataclass
class JacobianEstimate:
    geo_mean: float
    spread: float
    rows: tuple = field(default=(), repr=False)


def jacobian_estimate(gm, bs, m, trials=50, rng_seed=0,
                      n_max=8, k_max=12, eps=BALL_EPS):
    """Measure-theoretic Jacobian of f^m from iterated-ball bookkeeping:
    mass(B(n+m, k-m)) / mass(B(n, k)) at random centers and orders.  The
    ball formula makes each ratio exactly (d')^m; the estimate reports
    the geometric mean and the max/min spread as the consistency check.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    gm.assert_normalized()
    rng = np.random.default_rng(rng_seed)
    log_dp = math.log(gm.d_prime)
    rows = []
    logs = []
    for _t in range(trials):
        center = make_center(gm, bs, rng, n_max + m, k_max, eps)
        n = int(rng.integers(1, n_max + 1))
        k = int(rng.integers(m, k_max + 1))
        s = center.cum_phi_bar
        log_a = s[n + k] - k * log_dp
        log_b = s[(n + m) + (k - m)] - (k - m) * log_dp
        ratio = math.exp(log_b - log_a)
        rows.append({"trial": _t, "n": n, "k": k, "m": m,
                     "ratio": ratio})
        logs.append(log_b - log_a)
    logs = np.asarray(logs)
    geo = float(np.exp(logs.mean()))
    spread = float(np.exp(logs.max() - logs.min()))
    return JacobianEstimate(geo_mean=geo, spread=spread,
                            rows=tuple(rows))


# -- classifier ------------------------------------------------------------


@dataclass
class DimensionReport:
    chi_s: float
    chi_u: float
    entropy: float
    d_prime: int
    delta_formula: float
    regime: str
    k_ratio: float
    delta_empirical: float = None
    half_width: float = None
    bowen_root: float = None
    bowen_flag: str = None
    pressure: float = None
    is_lower_bound: bool = False
    constancy_spread: float = None
    hausdorff_dimension: float = None
    survey_counts: dict = None
    note: str = None

    def as_dict(self):
        return {
            "chi_s": self.chi_s, "chi_u": self.chi_u,
            "entropy": self.entropy, "d_prime": self.d_prime,
            "delta_formula": self.delta_formula, "regime": self.regime,
            "k_ratio": self.k_ratio,
            "delta_empirical": self.delta_empirical,
            "half_width": self.half_width,
            "bowen_root": self.bowen_root, "bowen_flag": self.bowen_flag,
            "pressure": self.pressure,
            "is_lower_bound": self.is_lower_bound,
            "constancy_spread": self.constancy_spread,
            "hausdorff_dimension": self.hausdorff_dimension,
            "survey_counts": self.survey_counts, "note": self.note,
        }


def survey_preimage_counts(bs, points=SURVEY_POINTS, rng_seed=0):
    """Preimage counts at uniformly sampled set points.

    Returns (strict counts, loose counts, ambiguous flags); ambiguity at
    a point widens the strict/loose pair instead of aborting the survey.
    """
    from .errors import AmbiguousMembership
    rng = np.random.default_rng(rng_seed)
    strict, loose, ambiguous = [], [], []
    for _ in range(points):
        sp = symbolic.uniform_solenoid_point(rng, bs.depth,
                                             bs.map.degree)
        x = bs.realize(sp)
        try:
            c = bs.preimage_count(x)
            strict.append(c)
            loose.append(c)
            ambiguous.append(False)
        except AmbiguousMembership as exc:
            strict.append(exc.count_strict)
            loose.append(exc.count_loose)
            ambiguous.append(True)
    return strict, loose, ambiguous


def constancy_spread(gm, bs, eps=BALL_EPS, n_range=range(1, 9),
                     points=10, rng_seed=0):
    """Max-minus-min of the formula-side dimension slope over several
    typical centers: the exact-dimensionality gate.  Uses the
    fractional-k formula line, which is deterministic per center, so the
    spread measures genuine point dependence rather than sampling noise.
    """
    rng = np.random.default_rng(rng_seed)
    ns = sorted(int(n) for n in n_range)
    slopes = []
    for _ in range(points):
        center = make_center(gm, bs, rng, ns[-1], _k_cap(bs, ns[-1]),
                             eps)
        _, x, _, y_ideal = _formula_table(gm, center, ns, eps)
        slopes.append(_ols(x, y_ideal)[0])
    return float(max(slopes) - min(slopes)), slopes


def classify_degree2(bs, order=thermo.DEFAULT_ORDER,
                     survey=SURVEY_POINTS, rng_seed=0,
                     with_empirical=False, eps=BALL_EPS,
                     samples=None, n_range=None,
                     on_inconsistent="fallback"):
    """Degree-2 dichotomy: constant preimage count 1 (homeomorphic-like)
    or 2 (expanding, verified by a zero Bowen root).

    A non-constant or ambiguous survey takes the fallback branch:
    regime "generic", d' = the largest observed count, delta_formula
    demoted to a lower bound (is_lower_bound = True).  Pass
    on_inconsistent="raise" to get the InconsistentCount error instead.
    The report also carries the constancy spread of the formula slope
    over typical points and, when it is below CONSTANCY_TOL and the
    count survey was constant, the Hausdorff dimension (= delta).
    """
    fmap = bs.map
    if fmap.degree != 2:
        raise ValueError("classifier handles base degree 2 only")
    bs.assert_hyperbolic()
    bs.critical_distance()

    strict, loose, ambiguous = survey_preimage_counts(bs, survey,
                                                      rng_seed)
    counts_seen = sorted(set(strict) | set(loose))
    constant = (not any(ambiguous)) and len(set(strict)) == 1

    note = None
    is_lower = False
    if constant:
        d_prime = strict[0]
        regime = REGIME_HOMEO if d_prime == 1 else REGIME_EXPANDING
    else:
        if on_inconsistent == "raise":
            raise InconsistentCount(
                f"preimage counts non-constant over {len(strict)} "
                f"samples: counts {counts_seen}, "
                f"{sum(ambiguous)} ambiguous")
        d_prime = max(counts_seen)
        regime = REGIME_GENERIC
        is_lower = True
        note = (f"preimage survey non-constant (counts {counts_seen}, "
                f"{sum(ambiguous)} ambiguous); reporting the "
                f"lower-bound formula with d' = {d_prime}")

    # exponents and entropy from the zero-potential model; its weights
    # do not depend on d', so build at d' = 1 where admissibility holds
    gm = thermo.build_gibbs_model(fmap, thermo.ZeroPotential(), 1,
                                  order=order, basic_set=bs,
                                  check_set=False)
    chi_s, chi_u = gm.lyapunov()
    h = gm.entropy()

    root_val = None
    root_flag = None
    if regime == REGIME_EXPANDING:
        root = thermo.bowen_root(bs, d_prime, order=max(order, 14))
        root_val, root_flag = root.value, root.flag
        if abs(root.value) > 1e-6:
            raise NonConvergent(
                f"expanding branch expects a zero Bowen root, got "
                f"{root.value:.3g}")

    delta = dimension_formula(h, chi_s, chi_u, d_prime, regime)
    k_ratio = (round_k(bs, bs.realize(
        symbolic.uniform_solenoid_point(
            np.random.default_rng(rng_seed + 1), bs.depth, fmap.degree)),
        K_RATIO_ORDER) / K_RATIO_ORDER)

    gm_run = gm if d_prime == 1 else thermo.build_gibbs_model(
        fmap, thermo.ZeroPotential(), d_prime, order=order,
        basic_set=bs, check_set=False)
    if n_range is None:
        n_range = range(1, 9) if d_prime == fmap.degree else range(1, 6)
    if samples is None:
        # deep expanding arcs are cheap to test, graph-branch balls
        # carry a routing-bit factor; both sized for >= MIN_HITS at the
        # deepest default ball
        samples = (120_000_000 if d_prime == fmap.degree
                   else 80_000_000)
    spread, _ = constancy_spread(gm_run, bs, eps=eps, n_range=n_range,
                                 rng_seed=rng_seed + 3)

    report = DimensionReport(
        chi_s=chi_s, chi_u=chi_u, entropy=h, d_prime=int(d_prime),
        delta_formula=float(delta), regime=regime, k_ratio=float(k_ratio),
        bowen_root=root_val, bowen_flag=root_flag,
        pressure=float(gm.pressure.value), is_lower_bound=is_lower,
        constancy_spread=float(spread),
        hausdorff_dimension=(float(delta) if not is_lower
                             and spread < CONSTANCY_TOL else None),
        survey_counts={str(c): int(sum(1 for s in loose if s == c))
                       for c in counts_seen},
        note=note)

    if with_empirical:
        if is_lower:
            # the branch count is unsettled, so no Monte Carlo variant
            # is trustworthy; leave the empirical fields unset
            report.note += ("; empirical slope skipped (branch count "
                            "unsettled)")
        else:
            emp = empirical_dimension(gm_run, bs, eps=eps,
                                      n_range=n_range, samples=samples,
                                      rng_seed=rng_seed + 2)
            report.delta_empirical = emp.slope
            report.half_width = emp.half_width
    return report
