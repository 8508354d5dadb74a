"""Local model of the Julia set at a repelling periodic point.

Near the landing point ``L`` of a periodic angle ``t`` with period ``N``
and multiplier ``w``, the Böttcher map takes the form

    phi(e^{2 pi i t} e^{-s}) = L + g(s**b * omega(ln s)),

where ``b = ln(w) / (N ln 2)``, ``g`` is the normal form of
``A(y) = P_N(y + L) - L`` (``g(w y) = A(g(y))``, ``g(0) = 0``, ``g'(0) = 1``)
and ``omega`` is periodic with period ``ln M``, ``M = 2**N``.  This module
computes ``g``, its inverse, the Fourier coefficients of ``omega`` and
assembles them into a :class:`TransseriesModel`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .boettcher import NORMALIZATION_NOTE, eval_phi_ray, phi_series, trusted_depth
from .errors import (
    BranchAmbiguity,
    BranchSelectionFailure,
    DomainError,
    InvariantViolation,
    OutsideInversionRadius,
    ResonanceFailure,
)
from .polymap import ExternalAngle, PeriodicOrbit, angle_orbit, landing_chain, landing_point, make_param

log = logging.getLogger(__name__)

DEFAULT_N_MAX = 64
DEFAULT_K_MAX = 8
DEFAULT_GRID = 128
DEFAULT_PHI_ORDER = 2**14
RADIUS_TOL = 1e-9
CONJUGACY_TOL = 1e-9
PERIODICITY_TOL = 1e-6
# Fourier coefficients below this fraction of the largest one are rounding noise
FOURIER_NOISE_FLOOR = 1e-12
# phi is trusted where its estimated truncation tail stays below this
PHI_TAIL_TOL = 1e-13
BRANCH_NOTE = (
    "principal branches of ln s and s**b; omega(tau) is periodic in Re tau "
    "with period ln M and is continued analytically off the real axis"
)


# --- normal form ----------------------------------------------------------

def conjugacy_A(param, orbit):
    """Coefficients (ascending) of ``A(y) = P_N(y + L) - L``, degree ``2**N``."""
    L = orbit.L
    q = np.array([L, 1.0], dtype=complex)
    for _ in range(orbit.N):
        q = param.lam * npoly.polysub(q, npoly.polymul(q, q))
    q[0] -= L
    return q


def compose_poly(A, g, n):
    """``A(g(y))`` to order ``n`` for coefficient vectors with ``g[0] = 0``.

    The constant term of ``A`` is ignored (it is zero up to rounding).
    """
    g = np.asarray(g, dtype=complex)[: n + 1]
    deg = min(len(A) - 1, n)
    acc = np.zeros(n + 1, dtype=complex)
    acc[0] = A[deg]
    # direct products: coefficient magnitudes span many decades, which
    # transform-based convolution would smear into the small ones
    for j in range(deg - 1, 0, -1):
        acc = np.convolve(acc, g)[: n + 1]
        acc[0] += A[j]
    return np.convolve(acc, g)[: n + 1]


def compose_series(f, h, n):
    """``f(h(y))`` to order ``n`` (``h[0] = 0``), direct products."""
    f = np.asarray(f, dtype=complex)
    h = np.asarray(h, dtype=complex)[: n + 1]
    acc = np.zeros(n + 1, dtype=complex)
    acc[0] = f[min(n, len(f) - 1)]
    for j in range(min(n, len(f) - 1) - 1, -1, -1):
        acc = np.convolve(acc, h)[: n + 1]
        acc[0] += f[j]
    return acc


def _mul(a, b, n):
    return np.convolve(a, b)[:n]


def _check_resonance(w, n_max):
    for n in range(2, n_max + 1):
        if abs(w**n - w) < 1e-12:
            raise ResonanceFailure(f"|w^{n} - w| < 1e-12 for w={w}")


def normal_form_g(A, w, n_max=DEFAULT_N_MAX, method="matching", tol=1e-15, max_iter=5000):
    """Coefficients ``a_0..a_{n_max}`` of the normal form (``a_0 = 0``, ``a_1 = 1``).

    ``matching`` solves ``(w**n - w) a_n = [A(g)]_n`` order by order;
    ``iteration`` iterates ``g <- A(g(y / w))`` on truncated series.
    """
    A = np.asarray(A, dtype=complex)
    w = complex(w)
    _check_resonance(w, n_max)
    g = np.zeros(n_max + 1, dtype=complex)
    g[1] = 1.0
    if method == "matching":
        for n in range(2, n_max + 1):
            rhs = compose_poly(A, g[: n + 1], n)[n]
            g[n] = rhs / (w**n - w)
        return g
    if method == "iteration":
        scale = w ** -np.arange(n_max + 1, dtype=float)
        for _ in range(max_iter):
            g_new = compose_poly(A, g * scale, n_max)
            g_new[1] = 1.0
            delta = np.max(np.abs(g_new - g))
            g = g_new
            if delta <= tol * max(1.0, np.max(np.abs(g))):
                return g
        raise ResonanceFailure(f"normal-form iteration did not settle in {max_iter} steps")
    raise ValueError(f"unknown method {method!r}")


def invert_series(g_coeffs):
    """Compositional inverse of a tangent-to-identity series, same order."""
    g = np.asarray(g_coeffs, dtype=complex)
    n = len(g) - 1
    dg = g[1:] * np.arange(1, n + 1)
    ident = np.zeros(n + 1, dtype=complex)
    ident[1] = 1.0
    h = ident.copy()
    steps = max(1, math.ceil(math.log2(max(n, 2)))) + 2
    for _ in range(steps):
        gh = compose_series(g, h, n)
        dgh = compose_series(dg, h, n)
        h = h - _mul(gh - ident, _reciprocal_direct(dgh, n + 1), n + 1)
        h[0] = 0.0
    return h


def _reciprocal_direct(u, n):
    """``1/u`` to ``n`` terms by the triangular recurrence (no transforms)."""
    v = np.zeros(n, dtype=complex)
    v[0] = 1.0 / u[0]
    for k in range(1, n):
        v[k] = -np.dot(u[1 : k + 1], v[k - 1 :: -1][:k]) / u[0]
    return v


def eval_poly(coeffs, y):
    y = np.asarray(y)
    if not np.iscomplexobj(y):
        y = y.astype(complex)
    acc = np.zeros_like(y)
    for c in coeffs[::-1]:
        acc = acc * y + c
    return acc


def round_trip_error(g, ginv, r, n=64):
    y = r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
    with np.errstate(all="ignore"):
        err = np.abs(eval_poly(ginv, eval_poly(g, y)) - y)
    return float(np.max(err)) if np.all(np.isfinite(err)) else np.inf


def certified_radius(g, ginv, tol=RADIUS_TOL, start=1e-2, bisections=30):
    """Largest ``r`` with ``|g^-1(g(y)) - y| <= tol`` on ``|y| = r``."""
    ok = lambda r: round_trip_error(g, ginv, r) <= tol
    r = start
    if ok(r):
        while ok(2 * r) and r < 1e6:
            r *= 2
        lo, hi = r, 2 * r
    else:
        while not ok(r / 2):
            r /= 2
            if r < 1e-12:
                raise OutsideInversionRadius("no radius certifies g^-1(g(y)) = y")
        lo, hi = r / 2, r
    for _ in range(bisections):
        mid = math.sqrt(lo * hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def conjugacy_residual(A, w, g, r, n=64):
    """``sup_{|y| <= r} |g(w y) - A(g(y))|`` sampled on the circle ``|y| = r``."""
    # extended precision keeps the check's own rounding far below the
    # tolerance when |g(w y)| is large
    ext = np.clongdouble
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    y = ext(r) * (np.cos(theta).astype(np.longdouble) + 1j * np.sin(theta).astype(np.longdouble))
    g = np.asarray(g).astype(ext)
    gy = eval_poly(g, y)
    lhs = eval_poly(g, ext(w) * y)
    rhs = eval_poly(np.asarray(A[1:]).astype(ext), gy) * gy
    return float(np.max(np.abs(lhs - rhs)))


# --- omega ----------------------------------------------------------------

def _log_grid(s0, M, grid_size):
    """``grid_size`` log-uniform points covering ``[s0/M, s0)`` plus ``s0``."""
    tau = math.log(s0) - math.log(M) + math.log(M) * np.arange(grid_size + 1) / grid_size
    return tau, np.exp(tau)


def sample_H(param, series, orbit, ginv, s, s_trusted=None):
    """``H(s) = g^-1(phi(e^{2 pi i t} e^{-s}) - L)`` and the values of ``phi - L``."""
    F0 = eval_phi_ray(param, series, orbit.angle, s, s_trusted) - orbit.L
    return eval_poly(ginv, F0), F0


def choose_s0(param, series, orbit, ginv, radius, grid_size=DEFAULT_GRID, s_trusted=None, max_steps=60):
    """Largest grid top ``s0`` (up to a factor ``M**(1/8)``) keeping ``|phi - L| < radius/2``.

    Two periods ``[s0/M**2, s0]`` are required to fit, so that the
    periodicity check has room below the Fourier window.
    """
    M = orbit.M
    beta = orbit.b.real
    s0 = 1.0
    for _ in range(max_steps):
        _, s = _log_grid(s0, M * M, 2 * grid_size)
        F0 = eval_phi_ray(param, series, orbit.angle, s, s_trusted) - orbit.L
        peak = float(np.max(np.abs(F0)))
        if peak < 0.5 * radius:
            return s0
        # |phi - L| grows roughly like s**Re(b)
        factor = min((0.4 * radius / peak) ** (1.0 / beta), M ** -0.125)
        s0 *= factor
    raise OutsideInversionRadius("no s0 keeps phi - L inside the inversion radius")


def omega_fourier(param, series, orbit, g_coeffs, ginv_coeffs, grid_size=DEFAULT_GRID,
                  k_max=DEFAULT_K_MAX, s0=None, radius=None, s_trusted=None):
    """Fourier coefficients ``c_k`` (``|k| <= k_max``) of ``omega``.

    ``omega(tau) = sum_k c_k exp(2 pi i k tau / ln M)`` with
    ``omega(ln s) = s**-b H(s)``.  Returns ``(ks, cs, info)``.
    """
    if grid_size & (grid_size - 1):
        raise ValueError("grid_size must be a power of two")
    if 2 * k_max + 1 > grid_size:
        raise ValueError("grid too small for k_max")
    M, b = orbit.M, orbit.b
    if radius is None:
        radius = certified_radius(g_coeffs, ginv_coeffs)
    if s0 is None:
        s0 = choose_s0(param, series, orbit, ginv_coeffs, radius, grid_size, s_trusted)
    tau, s = _log_grid(s0, M, grid_size)
    H, F0 = sample_H(param, series, orbit, ginv_coeffs, s, s_trusted)
    peak = float(np.max(np.abs(F0)))
    if peak >= 0.5 * radius:
        raise OutsideInversionRadius(
            f"|phi - L| reaches {peak:.3g}, beyond half the inversion radius {radius:.3g}; shrink s0"
        )
    omega = np.exp(-b * tau) * H
    closure = abs(omega[-1] - omega[0]) / abs(omega[0])
    if not closure <= PERIODICITY_TOL:
        raise BranchAmbiguity(f"omega does not close up over one period (mismatch {closure:.2e})")
    coeffs = np.fft.fft(omega[:-1]) / grid_size
    ks = np.arange(-k_max, k_max + 1)
    cs = coeffs[ks % grid_size] * np.exp(-2j * np.pi * ks * tau[0] / math.log(M))
    info = {"s0": s0, "closure": closure, "max_abs_phi_minus_L": peak, "radius": radius,
            "omega_abs_std": float(np.std(np.abs(omega[:-1])))}
    return ks, cs, info


def omega_eval(ks, cs, tau, M):
    tau = np.asarray(tau, dtype=complex)
    phase = 2j * np.pi / math.log(M)
    return np.sum(cs[:, None] * np.exp(phase * ks[:, None] * tau.ravel()[None, :]), axis=0).reshape(tau.shape)


def fourier_decay_constant(ks, cs, M, floor=FOURIER_NOISE_FLOOR, strip=math.pi):
    """Fitted ``C`` in ``|c_k| <= C |c_0| d**|k|``, ``d = exp(-2 pi strip / ln M)``.

    ``strip`` is the half-width of the strip ``|Im tau| < strip`` on which
    omega is taken to be analytic: ``pi`` gives ``d = exp(-2 pi**2 / ln M)``,
    ``pi/2`` (the half plane ``Re s > 0``) gives ``d = exp(-pi**2 / ln M)``.
    Only coefficients above the noise floor enter the fit.
    """
    d = math.exp(-2 * math.pi * strip / math.log(M))
    c0 = abs(cs[ks == 0][0])
    keep = (np.abs(cs) > floor * c0) & (ks != 0)
    if not keep.any():
        return 1.0
    with np.errstate(under="ignore"):
        ratios = np.abs(cs[keep]) / (c0 * d ** np.abs(ks[keep]).astype(float))
    return float(max(1.0, ratios.max()))


# --- the model ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransseriesModel:
    param: object
    orbit: PeriodicOrbit
    A: np.ndarray
    g_coeffs: np.ndarray
    ginv_coeffs: np.ndarray
    ks: np.ndarray
    cs: np.ndarray
    conv_radius_est: float
    s0: float
    residuals: dict = field(default_factory=dict)

    @property
    def L(self):
        return self.orbit.L

    @property
    def b(self):
        return self.orbit.b

    @property
    def w(self):
        return self.orbit.w

    @property
    def M(self):
        return self.orbit.M

    @property
    def fourier(self):
        return {int(k): complex(c) for k, c in zip(self.ks, self.cs)}

    def active_modes(self):
        """Fourier modes above the noise floor; the rest are dropped on evaluation."""
        top = np.max(np.abs(self.cs))
        return np.abs(self.cs) > FOURIER_NOISE_FLOOR * top

    def omega(self, tau):
        keep = self.active_modes()
        return omega_eval(self.ks[keep], self.cs[keep], tau, self.M)

    def H(self, s):
        tau = np.log(np.asarray(s, dtype=complex))
        return np.exp(self.b * tau) * self.omega(tau)

    def to_json(self):
        cplx = lambda v: [[float(z.real), float(z.imag)] for z in v]
        return {
            "lambda": [self.param.lam.real, self.param.lam.imag],
            "angle": {"p": self.orbit.angle.p, "q": self.orbit.angle.q},
            "L": [self.L.real, self.L.imag],
            "N": self.orbit.N,
            "M": self.M,
            "w": [self.w.real, self.w.imag],
            "b": [self.b.real, self.b.imag],
            "g": cplx(self.g_coeffs),
            "ginv": cplx(self.ginv_coeffs),
            "omega": {"k": [int(k) for k in self.ks], "c": cplx(self.cs)},
            "conv_radius_est": self.conv_radius_est,
            "s0": self.s0,
            "residuals": dict(self.residuals),
            "conventions": {"branches": BRANCH_NOTE, "normalization": NORMALIZATION_NOTE},
        }

    @classmethod
    def from_json(cls, d):
        cplx = lambda v: np.array([complex(a, b) for a, b in v])
        param = make_param(complex(*d["lambda"]))
        angle = ExternalAngle(d["angle"]["p"], d["angle"]["q"])
        L = complex(*d["L"])
        N = int(d["N"])
        pts = [L]
        for _ in range(N - 1):
            pts.append(param.P(pts[-1]))
        orbit = PeriodicOrbit(angle, N, tuple(pts), complex(*d["w"]), complex(*d["b"]))
        return cls(param, orbit, conjugacy_A(param, orbit), cplx(d["g"]), cplx(d["ginv"]),
                   np.array(d["omega"]["k"]), cplx(d["omega"]["c"]), float(d["conv_radius_est"]),
                   float(d["s0"]), dict(d.get("residuals", {})))


def periodicity_residual(param, series, orbit, ginv, s0, n_points=8, s_trusted=None):
    """Relative mismatch of ``H(M x) = w H(x)`` for ``x`` in ``[s0/M**2, s0/M)``."""
    M = orbit.M
    x = s0 / M**2 * M ** (np.arange(n_points) / n_points)
    Hx, _ = sample_H(param, series, orbit, ginv, x, s_trusted)
    HMx, _ = sample_H(param, series, orbit, ginv, M * x, s_trusted)
    return float(np.max(np.abs(HMx - orbit.w * Hx) / np.abs(orbit.w * Hx)))


def build_model(param, angle, n_max=DEFAULT_N_MAX, k_max=DEFAULT_K_MAX, series=None,
                order=DEFAULT_PHI_ORDER, grid_size=DEFAULT_GRID, orbit=None):
    """Landing point, normal form, inverse and omega for a periodic angle."""
    angle = ExternalAngle.of(angle)
    if angle.dyadic_exponent:
        raise ValueError("build_model expects an odd denominator; use dyadic_model")
    if series is None:
        series = phi_series(param, order)
    if orbit is None:
        orbit = landing_point(param, angle, series)
    A = conjugacy_A(param, orbit)
    g = normal_form_g(A, orbit.w, n_max)
    ginv = invert_series(g)
    radius = certified_radius(g, ginv)
    s_trusted = trusted_depth(series)
    ks, cs, info = omega_fourier(param, series, orbit, g, ginv, grid_size, k_max,
                                 radius=radius, s_trusted=s_trusted)
    residuals = {
        "A_constant_term": float(abs(A[0])),
        "conjugacy": conjugacy_residual(A, orbit.w, g, radius / 2),
        "round_trip": round_trip_error(g, ginv, radius),
        "omega_closure": info["closure"],
        "periodicity": periodicity_residual(param, series, orbit, ginv, info["s0"], s_trusted=s_trusted),
        "landing": orbit.residual,
        "fourier_decay_C": fourier_decay_constant(ks, cs, orbit.M),
        "fourier_decay_C_half_strip": fourier_decay_constant(ks, cs, orbit.M, strip=math.pi / 2),
        "omega_abs_std": info["omega_abs_std"],
    }
    for name, tol in (("A_constant_term", 1e-10), ("conjugacy", CONJUGACY_TOL),
                      ("periodicity", PERIODICITY_TOL)):
        if not residuals[name] <= tol:
            raise InvariantViolation(name, residuals[name], tol)
    log.debug("model %s: radius %.3g, s0 %.3g", angle, radius, info["s0"])
    return TransseriesModel(param, orbit, A, g, ginv, ks, cs, radius, info["s0"], residuals)


def iterate_poly(A, v, times):
    for _ in range(times):
        v = eval_poly(A[1:], v) * v
    return v


def eval_model(model, s):
    """``L + g(s**b omega(ln s))`` for ``Re s >= 0``.

    Arguments beyond the certified radius are scaled down by ``w**j`` and
    pushed forward with ``A**j`` (``g(w**j y) = A**j(g(y))``).
    """
    s_arr = np.asarray(s, dtype=complex)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    if np.any(s_arr.real < -1e-15 * np.abs(s_arr)):
        raise DomainError("eval_model needs Re s >= 0")
    out = np.full(s_arr.shape, model.L, dtype=complex)
    nz = s_arr != 0
    if nz.any():
        H = model.H(s_arr[nz])
        R = model.conv_radius_est
        absw = abs(model.w)
        j = np.where(np.abs(H) > R, np.ceil(np.log(np.abs(H) / R) / math.log(absw)), 0).astype(int)
        v = eval_poly(model.g_coeffs, H / model.w ** j)
        vals = np.empty_like(v)
        for jj in np.unique(j):
            sel = j == jj
            vals[sel] = iterate_poly(model.A, v[sel], int(jj))
        out[nz] = model.L + vals
    return complex(out[0]) if scalar else out


def self_similarity_residual(model, n_points=32):
    """Relative mismatch of ``H(M s) = w H(s)`` with ``H = g^-1(eval_model - L)``."""
    M = model.M
    s = model.s0 / M**3 * np.logspace(0, math.log10(M) * 2, n_points)
    Hs = eval_poly(model.ginv_coeffs, eval_model(model, s) - model.L)
    HMs = eval_poly(model.ginv_coeffs, eval_model(model, M * s) - model.L)
    return float(np.max(np.abs(HMs - model.w * Hs) / np.abs(model.w * Hs)))


# --- coefficient table ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """``A[n-1, k + k_max]`` multiplies ``s**(n b) * exp(2 pi i k ln s / ln M)``."""

    values: np.ndarray
    k_max: int
    b: complex
    M: int
    L: complex

    def evaluate(self, s):
        s = np.asarray(s, dtype=complex)
        tau = np.log(s)
        n = np.arange(1, self.values.shape[0] + 1)
        k = np.arange(-self.k_max, self.k_max + 1)
        total = 0j
        for row, nn in zip(self.values, n):
            total = total + np.exp(nn * self.b * tau) * np.sum(
                row[:, None] * np.exp(2j * np.pi * k[:, None] * np.atleast_1d(tau)[None, :] / math.log(self.M)), axis=0
            ).reshape(np.shape(tau))
        return self.L + total

    def decay_report(self, eps=0.5, floor=1e-12):
        d = math.exp(-2 * math.pi**2 / math.log(self.M))
        mag = np.abs(self.values)
        n = np.arange(1, mag.shape[0] + 1)[:, None]
        k = np.abs(np.arange(-self.k_max, self.k_max + 1))[None, :]
        keep = mag > floor * mag.max()
        with np.errstate(under="ignore", divide="ignore"):
            ratio = mag / (eps**n * d**k.astype(float))
        return {"eps": eps, "d": d, "C": float(ratio[keep].max()),
                "row_max": [float(v) for v in mag.max(axis=1)]}


def coefficient_table(model, n_max=None, k_max=None):
    """``A_{n,k} = a_n [omega**n]_k`` for ``1 <= n <= n_max``, ``|k| <= k_max``."""
    n_max = len(model.g_coeffs) - 1 if n_max is None else n_max
    k_model = int(model.ks.max())
    k_max = k_model if k_max is None else k_max
    keep = model.active_modes()
    c = np.where(keep, model.cs, 0)
    rows = np.zeros((n_max, 2 * k_max + 1), dtype=complex)
    power = np.array([1.0 + 0j])  # omega**0, centred at index 0
    for n in range(1, n_max + 1):
        power = np.convolve(power, c)
        centre = (len(power) - 1) // 2
        lo = max(0, k_max - centre)
        src = power[max(0, centre - k_max): centre + k_max + 1]
        rows[n - 1, lo: lo + len(src)] = model.g_coeffs[n] * src
        # modes far beyond k_max do not feed back below it at this accuracy
        if centre > 4 * k_max:
            power = power[centre - 4 * k_max: centre + 4 * k_max + 1]
    return CoefficientTable(rows, k_max, model.b, model.M, model.L)


# --- dyadic angles --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DyadicEvaluator:
    """``phi`` near ``e^{2 pi i t}`` for ``t = t' / 2**m`` with ``t'`` periodic."""

    param: object
    angle: ExternalAngle
    base: TransseriesModel
    chain: tuple

    @property
    def m(self):
        return self.angle.dyadic_exponent

    @property
    def L(self):
        return self.chain[0]

    def derivative_to_base(self):
        """``P_m'(L_t)``, the derivative of the pushforward onto the cycle."""
        d = 1.0 + 0j
        for x in self.chain[: self.m]:
            d *= self.param.dP(x)
        return d

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=complex)
        v = np.atleast_1d(eval_model(self.base, 2**self.m * s_arr))
        for j in range(self.m - 1, -1, -1):
            r = np.sqrt(0.25 - v / self.param.lam)
            plus, minus = 0.5 + r, 0.5 - r
            target = self.chain[j]
            v = np.where(np.abs(plus - target) <= np.abs(minus - target), plus, minus)
        return complex(v[0]) if s_arr.ndim == 0 else v


def dyadic_model(param, angle, base_model, series, validate_s=1e-3, tol=1e-5):
    """Evaluator for a dyadic angle by pulling the base model back ``m`` times.

    Branches are the preimages closest to the landing points along the
    doubling orbit; the result is validated against ``phi`` at one point.
    """
    angle = ExternalAngle.of(angle)
    m, N, orbit = angle_orbit(angle)
    if m == 0:
        raise ValueError("dyadic_model expects an even denominator")
    if orbit[m] != base_model.orbit.angle:
        raise ValueError(f"base model must sit at angle {orbit[m]}")
    _, chain = landing_chain(param, angle, series)
    ev = DyadicEvaluator(param, angle, base_model, tuple(chain))
    got = ev(validate_s)
    ref = complex(eval_phi_ray(param, series, angle, validate_s)[0])
    if not abs(got - ref) <= tol * (1 + abs(ref)):
        raise BranchSelectionFailure(
            f"inverse branches reproduce phi only to {abs(got - ref):.2e} at s={validate_s}"
        )
    return ev
