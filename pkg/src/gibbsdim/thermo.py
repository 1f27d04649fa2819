"""Thermodynamic formalism on the basic set.

Pressure comes from two independent routes: sums over periodic points
(trace formula, works for every potential here) and the transfer operator
on base-only potentials (power iteration on a trigonometric grid).  Gibbs
measures are represented at a finite order n by weights proportional to
exp(S_n phi_bar) on the period-n ensemble, where phi_bar is the potential
normalized so its pressure equals log d_prime, the transverse branch
count.

Conventions: pressures and entropies are natural-log; the stable exponent
of a measure is negative, the unstable one positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import maps, symbolic
from .basicset import TWO_PI, BasicSetModel
from .errors import (AdmissibilityError, NonConvergent, NotBaseOnly,
                     NotNormalized, SignViolation)

TRANSFER_GRID = 2048
TRANSFER_TOL = 1e-10
TRANSFER_MAX_ITER = 4000
DEFAULT_ORDER = 12
BOWEN_BRACKET = (0.0, 4.0)
BOWEN_TOL = 1e-8
CYLINDER_DEPTH = 12


def logsumexp(a):
    a = np.asarray(a, dtype=float)
    m = float(np.max(a))
    return m + float(np.log(np.sum(np.exp(a - m))))


# -- potentials --------------------------------------------------------


class Potential:
    """Real-valued potential on C^2, vectorized over points."""

    def values(self, fmap, z, w):
        raise NotImplementedError

    def base_profile(self, fmap, thetas):
        """Values on the basic set as a function of the base angle alone.
        Raises NotBaseOnly when the potential depends on the fiber."""
        raise NotBaseOnly(
            f"{type(self).__name__} is not a base-only potential")

    def birkhoff(self, fmap, ensemble):
        return ensemble.birkhoff(lambda z, w: self.values(fmap, z, w))

    def sup_on_set(self, bs):
        zs, ws = bs.net()
        return float(np.max(self.values(bs.map, zs, ws)))

    def __add__(self, other):
        return SumPotential((self, other))

    def describe(self):
        return {"type": type(self).__name__}


class ZeroPotential(Potential):
    def values(self, fmap, z, w):
        return np.zeros(np.broadcast(z, w).shape)

    def base_profile(self, fmap, thetas):
        return np.zeros_like(np.asarray(thetas, dtype=float))


class ConstantPotential(Potential):
    def __init__(self, kappa):
        self.kappa = float(kappa)

    def values(self, fmap, z, w):
        return np.full(np.broadcast(z, w).shape, self.kappa)

    def base_profile(self, fmap, thetas):
        return np.full(np.asarray(thetas, dtype=float).shape, self.kappa)

    def describe(self):
        return {"type": "ConstantPotential", "kappa": self.kappa}


class StableLogPotential(Potential):
    """t * log |dF/dz|, the stable-derivative potential."""

    def __init__(self, t=1.0):
        self.t = float(t)

    def values(self, fmap, z, w):
        return self.t * np.log(np.abs(maps.dz_dz(fmap, z, w)))

    def base_profile(self, fmap, thetas):
        if fmap.kind != "product":
            raise NotBaseOnly(
                "the stable-log potential depends on the fiber coordinate "
                "for perturbed maps")
        p0 = maps.attracting_fixed_point(fmap)
        val = self.t * float(np.log(abs(2.0 * p0)))
        return np.full(np.asarray(thetas, dtype=float).shape, val)

    def describe(self):
        return {"type": "StableLogPotential", "t": self.t}


class UnstableLogPotential(Potential):
    """s * log |d w^{d-1}|, the unstable-derivative potential (it is a
    function of w alone, which is what makes it usable on cycles)."""

    def __init__(self, s=1.0):
        self.s = float(s)

    def values(self, fmap, z, w):
        return self.s * np.log(np.abs(maps.dw_dw(fmap, w)))

    def base_profile(self, fmap, thetas):
        val = self.s * float(np.log(fmap.degree))
        return np.full(np.asarray(thetas, dtype=float).shape, val)

    def describe(self):
        return {"type": "UnstableLogPotential", "s": self.s}


class AngleHarmonicPotential(Potential):
    """alpha * cos(arg w), the first harmonic in the base angle."""

    def __init__(self, alpha):
        self.alpha = float(alpha)

    def values(self, fmap, z, w):
        return self.alpha * np.cos(np.angle(w))

    def base_profile(self, fmap, thetas):
        return self.alpha * np.cos(np.asarray(thetas, dtype=float))

    def describe(self):
        return {"type": "AngleHarmonicPotential", "alpha": self.alpha}


class SumPotential(Potential):
    def __init__(self, parts):
        flat = []
        for p in parts:
            if isinstance(p, SumPotential):
                flat.extend(p.parts)
            else:
                flat.append(p)
        self.parts = tuple(flat)

    def values(self, fmap, z, w):
        out = np.zeros(np.broadcast(z, w).shape)
        for p in self.parts:
            out = out + p.values(fmap, z, w)
        return out

    def base_profile(self, fmap, thetas):
        out = np.zeros_like(np.asarray(thetas, dtype=float))
        for p in self.parts:
            out = out + p.base_profile(fmap, thetas)
        return out

    def describe(self):
        return {"type": "SumPotential",
                "parts": [p.describe() for p in self.parts]}


_POTENTIAL_BUILDERS = {
    "zero": lambda cfg: ZeroPotential(),
    "constant": lambda cfg: ConstantPotential(cfg["kappa"]),
    "stable_log": lambda cfg: StableLogPotential(cfg.get("t", 1.0)),
    "unstable_log": lambda cfg: UnstableLogPotential(cfg.get("s", 1.0)),
    "angle_harmonic": lambda cfg: AngleHarmonicPotential(cfg["alpha"]),
}


def potential_from_config(cfg):
    """Build a potential from a config mapping ({'type': ..., params})
    or a list of such mappings (summed)."""
    if isinstance(cfg, (list, tuple)):
        return SumPotential(tuple(potential_from_config(c) for c in cfg))
    if not isinstance(cfg, dict) or "type" not in cfg:
        raise ValueError("potential config must be a mapping with a 'type'")
    kind = str(cfg["type"]).lower()
    if kind not in _POTENTIAL_BUILDERS:
        raise ValueError(f"unknown potential type {cfg['type']!r}; "
                         f"known: {sorted(_POTENTIAL_BUILDERS)}")
    try:
        return _POTENTIAL_BUILDERS[kind](cfg)
    except KeyError as exc:
        raise ValueError(f"potential {kind!r} missing parameter {exc}")


# -- pressure ----------------------------------------------------------


@dataclass(frozen=True)
class PressureEstimate:
    value: float
    method: str
    order: int
    diagnostic: float = None
    count: int = None
    warning: str = None

    def as_dict(self):
        return {"value": self.value, "method": self.method,
                "order": self.order, "diagnostic": self.diagnostic,
                "count": self.count, "warning": self.warning}


def _map_of(obj):
    """Accept either a MapFamily or a BasicSetModel."""
    return obj.map if isinstance(obj, BasicSetModel) else obj


def birkhoff_sum(bs, potential, x, n):
    """S_n phi along the forward orbit of the member point x; n=0 is 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    bs.require_membership(x)
    fmap = bs.map
    z = np.array([complex(x[0])])
    w = np.array([complex(x[1])])
    acc = 0.0
    for _ in range(int(n)):
        acc += float(potential.values(fmap, z, w)[0])
        z, w = maps.apply(fmap, z, w)
    return acc


DIAGNOSTIC_WARN = 1e-3


def pressure_periodic(bs, potential, n, ensemble=None,
                      with_diagnostic=True):
    """P_n = (1/n) log sum over Fix(f^n) of exp(S_n phi), with the
    consecutive-order gap |P_n - P_{n-1}| as convergence diagnostic.

    A large gap is reported through the `warning` field, never silently
    dropped and never fatal.
    """
    fmap = _map_of(bs)
    ens = ensemble if ensemble is not None and ensemble.n == n \
        else symbolic.periodic_points(fmap, n)
    s = potential.birkhoff(fmap, ens)
    value = logsumexp(s) / n
    diag = None
    warning = None
    if with_diagnostic and n >= 2:
        prev = symbolic.periodic_points(fmap, n - 1)
        s_prev = potential.birkhoff(fmap, prev)
        diag = abs(value - logsumexp(s_prev) / (n - 1))
        if diag > DIAGNOSTIC_WARN:
            warning = (f"pressure gap {diag:.3g} above "
                       f"{DIAGNOSTIC_WARN:.0e}; raise the order")
    return PressureEstimate(value=float(value), method="periodic", order=n,
                            diagnostic=diag, count=len(ens),
                            warning=warning)


def pressure_transfer(bs, potential, grid=TRANSFER_GRID,
                      tol=TRANSFER_TOL, max_iter=TRANSFER_MAX_ITER):
    """Leading eigenvalue of the base transfer operator by power iteration.

    The potential must be base-only.  Each application evaluates the
    iterate on a d-fold trigonometric upsampling of the grid, so smooth
    eigenfunctions converge spectrally in the grid size.
    """
    fmap = _map_of(bs)
    if grid < 256:
        raise ValueError("transfer grid must be at least 256")
    d = fmap.degree
    g = int(grid)
    thetas_fine = TWO_PI * np.arange(d * g) / (d * g)
    weights = np.exp(potential.base_profile(fmap, thetas_fine))
    psi = np.ones(g)
    lam_prev = None
    diag = None
    for it in range(1, max_iter + 1):
        fine = np.fft.irfft(np.fft.rfft(psi), d * g) * d
        new = np.zeros(g)
        for m in range(d):
            new += weights[m * g:(m + 1) * g] * fine[m * g:(m + 1) * g]
        lam = float(np.sum(new) / np.sum(psi))
        if lam <= 0 or not np.isfinite(lam):
            raise NonConvergent(
                "transfer operator iteration lost positivity")
        psi = new / lam
        if lam_prev is not None:
            diag = abs(lam - lam_prev) / abs(lam)
            if diag < tol:
                return PressureEstimate(value=float(np.log(lam)),
                                      method="transfer", order=g,
                                      diagnostic=diag, count=it)
        lam_prev = lam
    raise NonConvergent(
        f"transfer power iteration did not settle in {max_iter} steps "
        f"(last relative change {diag:.3g})")


# -- admissibility and normalization ------------------------------------


def admissibility_margin(potential, bs, d_prime, pressure_value):
    """sup phi + log d_prime - P(phi); strictly negative means the
    normalized weights contract against the transverse branch count."""
    return (potential.sup_on_set(bs) + float(np.log(d_prime))
            - float(pressure_value))


def check_admissible(potential, bs, d_prime, pressure_value):
    margin = admissibility_margin(potential, bs, d_prime, pressure_value)
    if margin >= 0.0:
        raise AdmissibilityError(
            f"potential is not admissible for d' = {d_prime}: "
            f"sup phi + log d' - P = {margin:.6g} >= 0")
    return margin


def normalize(potential, pressure_value, d_prime):
    """phi_bar = phi + (log d' - P(phi)), so P(phi_bar) = log d'."""
    shift = float(np.log(d_prime)) - float(pressure_value)
    return SumPotential((potential, ConstantPotential(shift)))


# -- Bowen roots ---------------------------------------------------------


@dataclass(frozen=True)
class BowenRoot:
    value: float
    flag: str            # "bracketed" or "no_sign_change"
    residual: float
    order: int
    iterations: int = 0
    trace: tuple = ()    # (iteration, lo, hi) bracket history


def bowen_root_from_sums(stable_sums, n, d_prime,
                         bracket=BOWEN_BRACKET, tol=BOWEN_TOL):
    """Root of g(t) = (1/n) log sum exp(t * S_n log|Dfs|) - log d' by
    bisection on precomputed stable Birkhoff sums.

    g decreases in t.  When g(0) < 0 already (the transverse branch count
    exhausts the periodic count, as for the expanding branch d' = d) there
    is no sign change and the root is reported as 0 with a flag rather
    than an error.
    """
    s = np.asarray(stable_sums, dtype=float)

    def g(t):
        return logsumexp(t * s) / n - float(np.log(d_prime))

    lo, hi = bracket
    g_lo = g(lo)
    if g_lo <= 0.0:
        return BowenRoot(value=float(lo), flag="no_sign_change",
                         residual=float(g_lo), order=n)
    g_hi = g(hi)
    if g_hi > 0.0:
        raise NonConvergent(
            f"Bowen function is still positive at t = {hi}: g = {g_hi:.3g}")
    it = 0
    trace = [(0, lo, hi)]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        it += 1
        trace.append((it, lo, hi))
    root = 0.5 * (lo + hi)
    return BowenRoot(value=float(root), flag="bracketed",
                     residual=float(g(root)), order=n, iterations=it,
                     trace=tuple(trace))


# -- Gibbs model ---------------------------------------------------------


@dataclass
class GibbsModel:
    """Order-n periodic-point representation of the Gibbs measure of phi.

    weights are exp(S_n phi_bar) normalized to sum 1 over the period-n
    ensemble; phi_bar is phi shifted so P(phi_bar) = log d_prime.
    """

    map: object
    basic_set: BasicSetModel
    potential: Potential
    phi_bar: Potential
    d_prime: int
    order: int
    pressure: PressureEstimate
    ensemble: object
    log_weights: np.ndarray
    weights: np.ndarray
    margin: float = None
    _stable_sums: np.ndarray = field(default=None, repr=False)
    _bar_sums: np.ndarray = field(default=None, repr=False)

    # weights diagnostics

    @property
    def normalization_residual(self):
        """|P_n(phi_bar) - log d'| at the model order (zero up to float
        cancellation by construction)."""
        return abs(logsumexp(self._bar_sums) / self.order
                   - float(np.log(self.d_prime)))

    def assert_normalized(self, tol=1e-9):
        res = self.normalization_residual
        if res > tol:
            raise NotNormalized(
                f"normalized potential has pressure residual {res:.3g}")
        return res

    def stable_sums(self):
        if self._stable_sums is None:
            self._stable_sums = self.ensemble.birkhoff_log_stable()
        return self._stable_sums

    def bar_sums(self):
        return self._bar_sums

    # measure functionals

    def expectation(self, potential):
        """Time-averaged Gibbs expectation of a potential at the model
        order: sum of weights * S_n / n."""
        s = potential.birkhoff(self.map, self.ensemble)
        return float(np.dot(self.weights, s) / self.order)

    def entropy(self):
        """h = P(phi) - integral of phi (variational identity)."""
        return float(self.pressure.value - self.expectation(self.potential))

    def lyapunov(self):
        """(chi_s, chi_u) of the measure; raises SignViolation unless
        chi_s < 0 < chi_u."""
        chi_s = float(np.dot(self.weights, self.stable_sums()) / self.order)
        u_sums = self.ensemble.birkhoff_log_unstable()
        chi_u = float(np.dot(self.weights, u_sums) / self.order)
        if not (chi_s < 0.0 < chi_u):
            raise SignViolation(
                f"Lyapunov exponents have the wrong signs: "
                f"chi_s = {chi_s:.6g}, chi_u = {chi_u:.6g}")
        return chi_s, chi_u

    def bowen_root(self, bracket=BOWEN_BRACKET, tol=BOWEN_TOL):
        return bowen_root_from_sums(self.stable_sums(), self.order,
                                    self.d_prime, bracket, tol)


BOWEN_ORDER = 18


def bowen_root(bs, d_prime, order=BOWEN_ORDER, bracket=BOWEN_BRACKET,
               tol=BOWEN_TOL):
    """Bowen-equation root for the basic set: the zero of
    t -> P(t log|Dfs|) - log d', from the period-`order` ensemble."""
    fmap = _map_of(bs)
    ens = symbolic.periodic_points(fmap, order)
    return bowen_root_from_sums(ens.birkhoff_log_stable(), order,
                                d_prime, bracket, tol)


def gibbs_expectation(gm, psi):
    """Gibbs average of psi at the model order (weights times time
    averages)."""
    return gm.expectation(psi)


def entropy(gm):
    return gm.entropy()


def lyapunov(gm):
    return gm.lyapunov()


def build_gibbs_model(fmap, potential, d_prime, order=DEFAULT_ORDER,
                      basic_set=None, pressure=None, check_set=True):
    """Assemble a GibbsModel: pressure, admissibility, normalization,
    and the period-`order` weight table.

    d_prime is the transverse branch count of the basic set (1 for the
    graph part, the base degree for the expanding branch).  Admissibility
    (sup phi + log d' < P) is enforced for d' < degree; the expanding
    branch d' = degree bypasses it, its consistency being visible instead
    as a Bowen root at zero.
    """
    fmap = _map_of(fmap)
    d_prime = int(d_prime)
    if not 1 <= d_prime <= fmap.degree:
        raise ValueError(f"d_prime must be in 1..{fmap.degree}")
    bs = basic_set if basic_set is not None else BasicSetModel(fmap)
    if check_set:
        bs.assert_hyperbolic()
    ens = symbolic.periodic_points(fmap, order, p0=bs.p0)
    s_phi = potential.birkhoff(fmap, ens)
    if pressure is None:
        pressure = PressureEstimate(value=logsumexp(s_phi) / order,
                                  method="periodic", order=order,
                                  count=len(ens))
    margin = None
    if d_prime < fmap.degree:
        margin = check_admissible(potential, bs, d_prime, pressure.value)
    phi_bar = normalize(potential, pressure.value, d_prime)
    shift = float(np.log(d_prime)) - float(pressure.value)
    s_bar = s_phi + order * shift
    log_z = logsumexp(s_bar)
    log_weights = s_bar - log_z
    return GibbsModel(map=fmap, basic_set=bs, potential=potential,
                      phi_bar=phi_bar, d_prime=d_prime, order=order,
                      pressure=pressure, ensemble=ens,
                      log_weights=log_weights,
                      weights=np.exp(log_weights), margin=margin,
                      _bar_sums=s_bar)


# -- cylinder structure and word sampling --------------------------------


def cylinder_log_masses(fmap, potential, depth, pressure_value=None):
    """log-masses of the depth-K forward cylinders, one per base-d word,
    represented at the word's own periodic point and normalized to sum 1.

    Index order: the word b_1..b_K read as a base-d integer, most
    significant digit first.
    """
    ens = symbolic.periodic_points(fmap, depth)
    s = potential.birkhoff(fmap, ens)
    # index k of the ensemble is the base-d integer of the itinerary, but
    # the all-(d-1) word aliases k = 0; append it explicitly.
    d = fmap.degree
    full = np.empty(d ** depth)
    full[:-1] = s
    full[-1] = s[0]
    log_m = full - logsumexp(full)
    return log_m


class GibbsWordSampler:
    """Draws base itineraries (forward) and prehistories (backward) from
    the depth-K cylinder approximation of a Gibbs measure.

    The first K letters come from the exact joint table; further letters
    are drawn from the conditional tables given the K-1 adjacent letters
    (forward: the trailing context, backward: the leading context).
    """

    def __init__(self, fmap, phi_bar, depth=CYLINDER_DEPTH):
        if fmap.degree != 2:
            raise ValueError("word sampler supports base degree 2")
        if depth < 2:
            raise ValueError("sampler depth must be at least 2")
        self.map = fmap
        self.depth = int(depth)
        log_m = cylinder_log_masses(fmap, phi_bar, self.depth)
        mass = np.exp(log_m)
        self.joint = mass / mass.sum()
        self.joint_cdf = np.cumsum(self.joint)
        half = 1 << (self.depth - 1)
        # forward: context = last K-1 letters; P(a | ctx) from
        # mass[ctx*2 + a]
        fwd = mass.reshape(half, 2)
        self.fwd_p1 = fwd[:, 1] / fwd.sum(axis=1)
        # backward: context = first K-1 letters; P(b | ctx) from
        # mass[b*half + ctx]
        bwd = mass.reshape(2, half)
        self.bwd_p1 = bwd[1] / bwd.sum(axis=0)
        self.ctx_mask = half - 1

    def sample_words(self, rng, count, forward_len, backward_len):
        """(forward bits (count, forward_len), backward bits
        (count, backward_len)), vectorized over samples."""
        count = int(count)
        k = self.depth
        draws = rng.random(count)
        idx = np.searchsorted(self.joint_cdf, draws)
        bits0 = ((idx[:, None] >> np.arange(k - 1, -1, -1)) & 1)
        fwd_cols = [bits0[:, j] for j in range(min(k, forward_len))]
        ctx = idx & self.ctx_mask          # trailing k-1 letters
        for _ in range(max(0, forward_len - k)):
            u = rng.random(count)
            a = (u < self.fwd_p1[ctx]).astype(np.int64)
            fwd_cols.append(a)
            ctx = ((ctx << 1) | a) & self.ctx_mask
        head = idx >> 1                    # leading k-1 letters
        bwd_cols = []
        for _ in range(backward_len):
            u = rng.random(count)
            b = (u < self.bwd_p1[head]).astype(np.int64)
            bwd_cols.append(b)
            head = (b << (k - 2)) | (head >> 1)
        fwd = (np.stack(fwd_cols, axis=1) if fwd_cols
               else np.zeros((count, 0), dtype=np.int64))
        bwd = (np.stack(bwd_cols, axis=1) if bwd_cols
               else np.zeros((count, 0), dtype=np.int64))
        return fwd[:, :forward_len], bwd

    @staticmethod
    def angles_from_bits(fwd_bits):
        """Base angle whose doubling itinerary starts with the given
        forward bits: theta = 2 pi (0.b1 b2 ...)_2."""
        n = fwd_bits.shape[1]
        scales = 0.5 ** np.arange(1, n + 1)
        return TWO_PI * (fwd_bits @ scales)


# -- comparability -------------------------------------------------------


def word_birkhoff(fmap, word, potential, p0=None):
    """S_|word| phi at the periodic point whose itinerary is `word`."""
    n = len(word)
    d = fmap.degree
    k = 0
    for b in word:
        k = k * d + int(b)
    m = d ** n - 1
    theta = TWO_PI * (k % m) / m if m else 0.0
    if p0 is None:
        p0 = maps.attracting_fixed_point(fmap)
    if fmap.kind == "product":
        z0 = np.array([p0], dtype=complex)
    else:
        z0 = symbolic._refine_fibers(fmap, np.array([theta]),
                                     np.array([p0], dtype=complex), n)
    z = z0.copy()
    w = np.exp(1j * np.array([theta]))
    acc = 0.0
    for _ in range(n):
        acc += float(potential.values(fmap, z, w)[0])
        z, w = maps.apply(fmap, z, w)
        w = w / np.abs(w)
    return acc


def comparability_trials(fmap, potential, rng, trials=100,
                         prefix_range=(6, 12), suffix_range=(4, 8)):
    """Ratios testing that the weight a suffix word adds is uniformly
    comparable across prefixes.

    Each trial draws prefixes u, v and a common suffix A, and forms
    R = exp([S phi(y_uA) - S phi(y_u)] - [S phi(y_vA) - S phi(y_v)])
    at the corresponding periodic points.  Returns the array of R values;
    the comparability constant is max(max R, 1/min R).
    """
    fmap = _map_of(fmap)
    p0 = maps.attracting_fixed_point(fmap)
    d = fmap.degree
    out = np.empty(trials)

    def nested(u, v):
        m = min(len(u), len(v))
        return u[:m] == v[:m]

    for i in range(trials):
        ku = int(rng.integers(prefix_range[0], prefix_range[1] + 1))
        km = int(rng.integers(prefix_range[0], prefix_range[1] + 1))
        ell = int(rng.integers(suffix_range[0], suffix_range[1] + 1))
        u = tuple(int(b) for b in rng.integers(0, d, size=ku))
        v = tuple(int(b) for b in rng.integers(0, d, size=km))
        while nested(u, v):     # keep the cylinders disjoint
            v = tuple(int(b) for b in rng.integers(0, d, size=km))
        a = tuple(int(b) for b in rng.integers(0, d, size=ell))
        du = (word_birkhoff(fmap, u + a, potential, p0)
              - word_birkhoff(fmap, u, potential, p0))
        dv = (word_birkhoff(fmap, v + a, potential, p0)
              - word_birkhoff(fmap, v, potential, p0))
        out[i] = np.exp(du - dv)
    return out


def comparability_constant(ratios):
    r = np.asarray(ratios, dtype=float)
    return float(max(np.max(r), 1.0 / np.min(r)))
