"""Dimension estimates and normality statistics.

* ``beta_E``: circle average of ``log2|P'(phi)|`` extrapolated to the unit
  circle; ``1 / beta_E`` bounds the Hausdorff dimension from below.
* Ruelle-Bowen dimension: the root ``D`` of
  ``sum_{z in fix(P_n) on J} |P_n'(z)|**-D = 1``.
* Exponent distribution ``mu_n`` of ``Re b`` over ``fix(P_n)`` and the
  Legendre-type check ``max_s(-D s - Phi_n(s))``.
* Normality of binary strings in blocks of ``m`` digits and the Hoeffding
  bound on the fraction of non-normal strings, with exact counts.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .boettcher import eval_phi_circle
from .errors import DerivativeVanishes, InvariantViolation, NoBracket
from .polymap import periodic_points_on_J

DEFAULT_RHO_SCHEDULE = (0.96, 0.98, 0.99)
LEGENDRE_STEP = 1e-3


# --- beta_E ---------------------------------------------------------------

def circle_log_derivative(param, series, rho, n_theta):
    """``log2|P'(phi)|`` and the continuous argument of ``P'(phi)`` on a circle."""
    vals = param.dP(eval_phi_circle(series, rho, n_theta))
    mag = np.abs(vals)
    if mag.min() < 1e-8:
        raise DerivativeVanishes(f"|P'(phi)| = {mag.min():.2e} on the circle rho={rho}")
    return np.log2(mag), np.unwrap(np.angle(vals))


def beta_E(param, series, n_theta=4096, rho_schedule=DEFAULT_RHO_SCHEDULE):
    """``(beta_E, winding, imaginary part modulo winding)``.

    Each circle mean is a trapezoid rule (exact for the periodic
    integrand up to aliasing).  The means are fitted linearly in ``ln rho``
    and extrapolated to ``rho = 1``.
    """
    if n_theta < 2**10:
        raise ValueError("n_theta must be at least 1024")
    means, windings, imag = [], [], []
    for rho in rho_schedule:
        logmag, arg = circle_log_derivative(param, series, rho, n_theta)
        means.append(math.fsum(logmag) / n_theta)
        total = arg[-1] - arg[0] + _wrap(arg[0] - arg[-1])
        windings.append(int(round(total / (2 * math.pi))))
        imag.append(math.fsum(arg) / n_theta / math.log(2))
    x = np.log(np.asarray(rho_schedule))
    slope, intercept = np.polyfit(x, np.asarray(means), 1)
    if len(set(windings)) != 1:
        raise DerivativeVanishes(f"winding of P'(phi) changes across the schedule: {windings}")
    winding = windings[0]
    # the mean argument is defined up to multiples of 2 pi / ln 2 per unit winding
    period = 2 * math.pi / math.log(2)
    im = math.fmod(imag[-1], period * max(1, abs(winding)))
    return float(intercept), winding, float(im)


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def dh_lower_bound(beta):
    if not beta > 0:
        raise ValueError("beta_E must be positive")
    if beta < 0.5 - 1e-6:
        raise InvariantViolation("beta_E >= 1/2", 0.5 - beta, 1e-6)
    return 1.0 / beta


# --- periodic points --------------------------------------------------------

def periodic_betas(orbits):
    """``Re b`` at every point of the listed cycles (one entry per point)."""
    out = []
    for o in orbits:
        out += [o.beta] * o.exact_period
    return np.sort(np.asarray(out, dtype=float))


def ruelle_sum(betas, n, D):
    return math.fsum(np.exp2(-n * D * np.asarray(betas)))


def ruelle_dimension_from_betas(betas, n, tol=1e-10):
    """Root of ``sum 2**(-n D beta) = 1`` on ``(0, 2]`` by bisection."""
    f = lambda D: ruelle_sum(betas, n, D) - 1.0
    lo, hi = 0.0, 2.0
    if not f(lo) > 0 or not f(hi) < 0:
        raise NoBracket(f"A_n(0)={f(lo) + 1:.6g}, A_n(2)={f(hi) + 1:.6g}; periodic points missing?")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ruelle_dimension(param, n, series, orbits=None):
    if orbits is None:
        orbits = periodic_points_on_J(param, n, series)
    return ruelle_dimension_from_betas(periodic_betas(orbits), n)


@dataclass(frozen=True, eq=False)
class ExponentDistribution:
    n: int
    betas: np.ndarray

    @property
    def beta_max(self):
        return float(self.betas[-1])

    def mu(self, beta):
        """Right-continuous fraction of points with ``Re b <= beta``."""
        idx = np.searchsorted(self.betas, np.asarray(beta, dtype=float) + 1e-12, side="right")
        return idx / len(self.betas)

    def F(self, beta):
        return self.mu(beta) ** (1.0 / self.n)

    def Phi(self, beta):
        with np.errstate(divide="ignore"):
            return -np.log2(self.mu(beta)) / self.n

    def grid(self, step=LEGENDRE_STEP):
        k = np.arange(int(math.floor((self.beta_max + 0.1) / step)) + 1)
        return k / round(1 / step)

    def to_csv(self, step=LEGENDRE_STEP, comments=None):
        rows = [f"# {line}" for line in str(comments).splitlines()] if comments else []
        rows.append("beta,mu_n,F_n,Phi_n")
        s = self.grid(step)
        for b, mu, F, Phi in zip(s, self.mu(s), self.F(s), self.Phi(s)):
            rows.append(f"{float(b)!r},{float(mu)!r},{float(F)!r},{float(Phi)!r}")
        return "\n".join(rows) + "\n"

    def to_json(self):
        return {"n": self.n, "count": int(len(self.betas)), "beta_max": self.beta_max,
                "betas": [float(b) for b in self.betas]}


def exponent_distribution(param, n, series, orbits=None):
    if orbits is None:
        orbits = periodic_points_on_J(param, n, series)
    return ExponentDistribution(n, periodic_betas(orbits))


def legendre_check(dist, D, step=LEGENDRE_STEP):
    """``max_s(-D s - Phi_n(s))`` over ``s`` in ``[0, beta_max + 0.1]``."""
    s = dist.grid(step)
    val = -D * s - dist.Phi(s)
    return float(np.max(val))


def periodic_average_beta(orbits):
    return float(np.mean(periodic_betas(orbits)))


@dataclass
class DimensionReport:
    beta_E: float
    winding: int
    bE_imag_mod_winding: float
    lower_bound: float
    ruelle_D: float
    ruelle_period: int
    legendre: float
    periodic_mean_beta: float
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


# --- normality --------------------------------------------------------------

def _digit_counts(bits, m, shift):
    s = bits[shift:] + bits[:shift]
    Q = 2**m
    counts = [0] * Q
    for i in range(0, len(s), m):
        counts[int(s[i:i + m], 2)] += 1
    return counts


def normality_classify(bits, m, epsilon):
    """Whether every ``m``-digit block frequency lies within ``epsilon/Q`` of ``1/Q``.

    The string and its cyclic shifts by ``1..m-1`` positions are all
    tested.  Returns ``(is_normal, frequencies)`` with one row per shift.
    """
    bits = str(bits)
    if len(bits) == 0 or len(bits) % m:
        raise ValueError("length must be a positive multiple of m")
    if set(bits) - {"0", "1"}:
        raise ValueError("bits must be a binary string")
    N = len(bits) // m
    Q = 2**m
    freqs = []
    ok = True
    for shift in range(m):
        f = [c / N for c in _digit_counts(bits, m, shift)]
        freqs.append(f)
        ok &= all(abs(x - 1 / Q) <= epsilon / Q + 1e-15 for x in f)
    return ok, freqs


def _count_bounds(N, m, epsilon):
    """Allowed digit counts ``c``: ``|c/N - 1/Q| <= epsilon/Q``."""
    Q = 2**m
    lo = math.ceil(N * (1 - epsilon) / Q - 1e-9)
    hi = math.floor(N * (1 + epsilon) / Q + 1e-9)
    return max(lo, 0), hi


def normal_mask(N, m, epsilon):
    """Normality verdict for every string of ``N m`` bits, indexed by its value."""
    nbits = N * m
    if nbits > 26:
        raise ValueError("too many strings to enumerate")
    Q = 2**m
    lo, hi = _count_bounds(N, m, epsilon)
    x = np.arange(2**nbits, dtype=np.int64)
    full = (1 << nbits) - 1
    ok = np.ones(len(x), dtype=bool)
    for shift in range(m):
        y = ((x << shift) | (x >> (nbits - shift))) & full if shift else x
        counts = np.zeros((Q, len(x)), dtype=np.int16)
        for i in range(N):
            d = (y >> (nbits - m * (i + 1))) & (Q - 1)
            for q in range(Q):
                counts[q] += d == q
        ok &= ((counts >= lo) & (counts <= hi)).all(axis=0)
    return ok


def normal_prefix_mask(bits, N, m, epsilon):
    """For every ``j < 2**bits``: is the leading ``N m``-bit prefix of ``j`` normal?"""
    mask = normal_mask(N, m, epsilon)
    j = np.arange(2**bits, dtype=np.int64)
    return mask[j >> (bits - N * m)]


def hoeffding_bound(N, m, epsilon):
    Q = 2**m
    return 2 * Q * m * math.exp(-2 * N * epsilon**2 / Q**2)


def hoeffding_tail(N0, m, epsilon, N_max=None):
    """``sum_{N >= N0} hoeffding_bound(N)`` and its closed geometric form."""
    Q = 2**m
    q = math.exp(-2 * epsilon**2 / Q**2)
    closed = hoeffding_bound(N0, m, epsilon) / (1 - q)
    if N_max is None:
        return closed
    return math.fsum(hoeffding_bound(N, m, epsilon) for N in range(N0, N_max + 1)), closed


def count_non_normal(N, m, epsilon, method="auto"):
    """Exact number of non-normal strings of ``N m`` bits."""
    if method == "auto":
        method = "binomial" if m == 1 else ("enumerate" if N * m <= 20 else "dp")
    if method == "enumerate":
        return int((~normal_mask(N, m, epsilon)).sum())
    if method == "binomial":
        if m != 1:
            raise ValueError("binomial count only for m = 1")
        lo, hi = _count_bounds(N, 1, epsilon)
        good = sum(comb(N, c) for c in range(N + 1) if lo <= c <= hi and lo <= N - c <= hi)
        return 2**N - good
    if method == "dp":
        if m != 2:
            raise ValueError("dynamic-programming count only for m = 2")
        return 4**N - _count_normal_m2(N, epsilon)
    raise ValueError(f"unknown method {method!r}")


def _count_normal_m2(N, epsilon):
    """Strings of ``N`` base-4 digits that are normal for both bit alignments.

    Digits ``d_i`` form the aligned blocks; the shifted blocks are
    ``e_i = (low bit of d_i, high bit of d_{i+1})`` with the last wrapping
    to ``d_1``.  The state holds the high bit of ``d_1``, the low bit of
    the latest digit and the counts of digits 0..2 of each alignment
    (digit 3 is implied by the total); counts above the upper bound are
    discarded since such strings can never become normal.
    """
    lo, hi = _count_bounds(N, 2, epsilon)
    U = hi + 1
    shape = (2, 2, U, U, U, U, U, U)
    state = np.zeros(shape, dtype=np.int64)
    for d in range(4):
        idx = [d >> 1, d & 1, 0, 0, 0, 0, 0, 0]
        if d < 3:
            idx[2 + d] = 1
        if min(idx[2:5]) >= 0 and max(idx[2:5]) < U:
            state[tuple(idx)] += 1
    rng = np.arange(U)
    d_sum = rng[:, None, None] + rng[None, :, None] + rng[None, None, :]
    for i in range(2, N + 1):
        new = np.zeros_like(state)
        for d in range(4):
            for low in range(2):
                src = state[:, low]
                e = 2 * low + (d >> 1)
                moved = _bump(_bump(src, d, offset=1), e, offset=4)
                new[:, d & 1] += moved
        # implied counts of digit 3 must stay within the bound
        ok_d = (i - d_sum) <= hi
        ok_e = ((i - 1) - d_sum) <= hi
        new *= ok_d[None, None, :, :, :, None, None, None]
        new *= ok_e[None, None, None, None, None, :, :, :]
        state = new
    total = 0
    counts = np.indices((U, U, U))
    for first_high in range(2):
        for low in range(2):
            e = 2 * low + first_high
            sub = _bump(state[first_high, low], e, offset=3)
            # sub axes: d0 d1 d2 e0 e1 e2
            dc = [counts[0], counts[1], counts[2], N - d_sum]
            okd = np.all([(c >= lo) & (c <= hi) for c in dc], axis=0)
            oke = okd
            total += int((sub * okd[:, :, :, None, None, None] * oke[None, None, None]).sum())
    return total


def _bump(arr, digit, offset):
    """Increment the count of ``digit`` stored on axes ``offset..offset+2``.

    Digit 3 is implied, so nothing moves for it.  Entries pushed beyond
    the cap are dropped.
    """
    if digit == 3:
        return arr.copy()
    axis = offset + digit
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[axis] = slice(0, -1)
    dst[axis] = slice(1, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def non_normal_fraction(N, m, epsilon):
    return count_non_normal(N, m, epsilon) / 2 ** (N * m)


# --- Hölder diagnostic ----------------------------------------------------

def holder_estimate(points, min_sep=1, max_sep=None, periodic=True):
    """Slope of ``log max|f(x+h) - f(x)|`` against ``log h`` over dyadic ``h``.

    ``points`` are curve samples on a uniform angle grid, closed up
    periodically unless ``periodic`` is false.
    """
    pts = np.asarray(getattr(points, "points", points), dtype=complex)
    n = len(pts)
    max_sep = max_sep or n // 8
    seps, osc = [], []
    h = min_sep
    while h <= max_sep:
        diff = np.abs(np.roll(pts, -h) - pts) if periodic else np.abs(pts[h:] - pts[:-h])
        seps.append(h / n)
        osc.append(diff.max())
        h *= 2
    slope, _ = np.polyfit(np.log(seps), np.log(osc), 1)
    return float(slope)
