"""Böttcher coordinate of ``P(x) = lam x (1 - x)``.

``G`` conjugates ``z -> z**2`` to ``y -> y**2 / (lam (1 + y))`` and solves
``G(z)**2 = lam G(z**2) (1 + G(z))`` with ``G(0) = 0, G'(0) = lam``.
``phi = -1/G`` then satisfies ``P(phi(z)) = phi(z**2)`` with
``z phi(z) -> -1/lam`` as ``z -> 0``.

Three routes to the coefficients of ``G``:

* ``iteration``: write ``G = lam z + lam**2 z g`` and iterate
  ``g = 2 T N(g)`` where ``T`` inverts ``f -> 2f - f(z**2)``;
* ``recurrence``: match coefficients order by order, O(K**2);
* ``newton``: Newton's method on truncated series, doubling the number of
  correct coefficients per step, O(K log K).
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import NoConvergence, OutOfDomain
from .series import TruncatedSeries, convolve, reciprocal_coeffs

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
ITER_TOL = 1e-14
ITER_MAX = 200

NORMALIZATION_NOTE = (
    "phi = -1/G with G'(0) = lambda, hence z*phi(z) -> -1/lambda; "
    "the convention z*phi(z) -> +1/lambda corresponds to phi -> -phi composed with x -> 1 - x"
)


def _dilate2(a):
    """Coefficients of ``f(z**2)`` truncated to ``len(a)``."""
    out = np.zeros_like(a)
    out[::2] = a[: (len(a) + 1) // 2]
    return out


def operator_T(f: TruncatedSeries) -> TruncatedSeries:
    """``(T f)(z) = 1/2 sum_k 2**-k f(z**(2**k))`` truncated at ``f.order``."""
    a = f.taylor()
    K = len(a) - 1
    out = np.zeros_like(a)
    step, weight = 1, 0.5
    while step <= max(K, 1):
        m = K // step
        out[: step * m + 1 : step] += weight * a[: m + 1]
        step *= 2
        weight *= 0.5
    out[0] = a[0]
    return TruncatedSeries(out, 0)


def _N(lam, g):
    """Right-hand side of ``g - g(z**2)/2 = N(g)``; ``g`` as coefficient array."""
    n = len(g)
    g2 = _dilate2(g)
    zg = np.concatenate(([0], g[:-1]))
    zg2 = np.concatenate(([0], g2[:-1]))
    gg = convolve(g, g, n)
    ggg2 = convolve(g, g2, n)
    zggg2 = np.concatenate(([0], ggg2[:-1]))
    out = 0.5 * lam * (zg - gg + zg2) + 0.5 * lam * lam * zggg2
    if n > 1:
        out[1] += 0.5
    return out


def eqG_residual_coeffs(G, lam):
    """Coefficients of ``G**2 - lam G(z**2)(1 + G)`` up to the order of ``G``."""
    a = G.taylor()
    n = len(a)
    a2 = _dilate2(a)
    r = convolve(a, a, n) - lam * a2 - lam * convolve(a2, a, n)
    return r


def eqG_residual(G, lam):
    """Largest residual coefficient relative to the size of the terms producing it."""
    a = G.taylor()
    n = len(a)
    r = eqG_residual_coeffs(G, lam)
    b = np.abs(a)
    b2 = _dilate2(b)
    scale = np.abs(convolve(b, b, n)) + abs(lam) * b2 + abs(lam) * np.abs(convolve(b2, b, n))
    return float(np.max(np.abs(r) / np.maximum(scale, 1.0)))


def _G_from_g(lam, g, K):
    G = np.zeros(K + 1, dtype=complex)
    G[1] = lam
    G[1:] += lam * lam * g[:K]
    return G


def _bottcher_iteration(lam, K, tol=ITER_TOL, max_iter=ITER_MAX):
    g = np.zeros(max(K, 1), dtype=complex)
    prev_delta = np.inf
    growth = 0
    for it in range(max_iter):
        with np.errstate(all="ignore"):
            g_new = 2 * operator_T(TruncatedSeries(_N(lam, g), 0)).taylor()
        if not np.all(np.isfinite(g_new)):
            return None, it
        delta = np.max(np.abs(g_new - g))
        g = g_new
        if delta <= tol * max(1.0, np.max(np.abs(g))):
            return _G_from_g(lam, g, K), it + 1
        growth = growth + 1 if delta > prev_delta else 0
        if growth > 20:
            return None, it + 1
        prev_delta = delta
    return None, max_iter


def _bottcher_recurrence(lam, K):
    G = np.zeros(K + 1, dtype=complex)
    G[1] = lam
    for n in range(3, K + 2):
        # equation at z**n determines G[n-1]
        rhs = 0j
        if n % 2 == 0:
            rhs += lam * G[n // 2]
        j = np.arange(1, (n - 1) // 2 + 1)
        if len(j):
            rhs += lam * np.dot(G[j], G[n - 2 * j])
        if n - 3 >= 1:
            i = np.arange(2, n - 1)
            rhs -= np.dot(G[i], G[n - i])
        G[n - 1] = rhs / (2 * lam)
    return G


def _bottcher_newton(lam, K):
    G = np.zeros(2, dtype=complex)
    G[1] = lam
    n = 1
    while n < K:
        n2 = min(2 * n, K)
        L = n2 + 2
        Gp = np.zeros(L, dtype=complex)
        Gp[: len(G)] = G
        G2 = _dilate2(Gp)
        F = convolve(Gp, Gp, L) - lam * G2 - lam * convolve(G2, Gp, L)
        D = 2 * Gp - lam * G2
        # both F and D vanish at z = 0; divide by z before the series division
        delta = -convolve(F[1:], reciprocal_coeffs(D[1:], L - 1), L - 1)
        G = Gp[: n2 + 1] + delta[: n2 + 1]
        G[: n + 1] = Gp[: n + 1]
        n = n2
    return G[: K + 1]


def bottcher_G(param, K, method="auto"):
    """Taylor series of ``G`` to order ``K`` (coefficient of ``z`` equals ``lam``).

    ``method='auto'`` runs the fixed-point iteration and falls back to
    Newton's method when the iteration does not contract.
    """
    lam = param.lam
    if method in ("auto", "iteration"):
        coeffs, iters = _bottcher_iteration(lam, K)
        if coeffs is not None:
            G = TruncatedSeries(coeffs, 0)
            if eqG_residual(G, lam) <= RESIDUAL_TOL:
                log.debug("G by iteration: %d iterations", iters)
                return G
        if method == "iteration":
            raise NoConvergence(f"fixed-point iteration for G did not converge (lambda={lam})")
        log.debug("iteration did not converge for lambda=%s; falling back to Newton", lam)
        method = "newton"
    if method not in ("recurrence", "newton"):
        raise ValueError(f"unknown method {method!r}")
    # coefficients overflow when the Julia set is disconnected; the residual check reports it
    with np.errstate(all="ignore"):
        solve = _bottcher_recurrence if method == "recurrence" else _bottcher_newton
        G = TruncatedSeries(solve(lam, K), 0)
        res = eqG_residual(G, lam)
    if not res <= RESIDUAL_TOL:
        raise NoConvergence(f"G residual {res:.2e} exceeds {RESIDUAL_TOL:.0e} "
                            f"(is lambda={lam} outside the connectedness locus?)")
    return G


def phi_series(param, K, method="auto") -> TruncatedSeries:
    """Laurent series of ``phi = -1/G`` from ``z**-1`` to ``z**K``."""
    G = bottcher_G(param, K + 2, method=method)
    u = G.taylor()[1:]
    inv = reciprocal_coeffs(u, K + 2)
    return TruncatedSeries(-inv, -1)


def phi_from_G(G, K=None):
    K = G.order - 2 if K is None else K
    u = G.taylor()[1:]
    return TruncatedSeries(-reciprocal_coeffs(u, K + 2), -1)


def eval_phi(series, z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1) or np.any(z == 0):
        raise OutOfDomain("phi is evaluated on the punctured open unit disk")
    return series(z)


def eval_phi_circle(series, rho, n_theta):
    """``phi(rho e^{2 pi i j / n_theta})`` for ``j = 0..n_theta-1`` by one FFT."""
    if not 0 < rho < 1:
        raise OutOfDomain("rho must lie in (0, 1)")
    powers = np.arange(series.lowest_index, series.order + 1)
    with np.errstate(under="ignore"):
        scaled = series.coeffs * rho ** powers.astype(float)
    folded = np.zeros(n_theta, dtype=complex)
    np.add.at(folded, powers % n_theta, scaled)
    return np.fft.ifft(folded) * n_theta


def functional_residual(param, series, radius=0.5, n=256):
    """``sup |P(phi(z)) - phi(z**2)|`` over ``n`` points of ``|z| = radius``."""
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.max(np.abs(param.P(series(z)) - series(z * z))))


def circle_convergence(param, K, rho, n_theta=4096, method="auto"):
    """Sup change of circle values of phi between orders ``K`` and ``2K``."""
    a = eval_phi_circle(phi_series(param, K, method), rho, n_theta)
    b = eval_phi_circle(phi_series(param, 2 * K, method), rho, n_theta)
    return float(np.max(np.abs(a - b)))


def series_to_json(param, series):
    return series.to_json(**{"lambda": [param.lam.real, param.lam.imag]})


def trusted_depth(series, tail_tol=1e-13):
    """Smallest ``s`` for which ``phi(e^{2 pi i t} e^{-s})`` is trusted from the series.

    The truncation tail is bounded by ``|a| e^{-K s} / (1 - e^{-s})`` with
    ``|a|`` the largest of the last coefficients.
    """
    K = series.order
    tail = float(np.max(np.abs(series.coeffs[-max(8, K // 8):])))
    s = 1.0
    while s > 1e-12:
        bound = tail * np.exp(-K * s / 2) / (1 - np.exp(-s / 2))
        if bound > tail_tol:
            return s
        s /= 2
    return s


def eval_phi_ray(param, series, angle, s, s_trusted=None):
    """``phi(e^{2 pi i t} e^{-s})`` for ``Re s > 0``, accurate close to the circle.

    Points with ``Re s`` below ``s_trusted`` are pushed out by ``k``
    doublings, ``z -> z**(2**k)``, where the series is accurate, and the value
    is pulled back through ``k`` inverse branches of ``P``.  Each branch is
    the preimage closest to the plain series value at that intermediate
    point, which is accurate enough to separate the two preimages.
    """
    from .polymap import ExternalAngle, angle_orbit

    angle = ExternalAngle.of(angle)
    m, N, orbit = angle_orbit(angle)
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s.real <= 0):
        raise OutOfDomain("s must have positive real part")
    if s_trusted is None:
        s_trusted = trusted_depth(series)
    k = np.maximum(0, np.ceil(np.log2(s_trusted / s.real))).astype(int)
    kmax = int(k.max())
    idx = lambda j: j if j < m else m + (j - m) % N
    theta = np.array([float(orbit[idx(j)]) for j in range(kmax + 1)])
    # all intermediate points in one Horner pass: row j holds z**(2**j)
    scale = 2.0 ** np.arange(kmax + 1)[:, None]
    with np.errstate(all="ignore"):
        # rows beyond a point's own depth may underflow; they are never read
        zz = np.exp(2j * np.pi * theta[:, None]) * np.exp(-scale * s[None, :])
        guess = np.asarray(series(zz))
    out = np.empty(len(s), dtype=complex)
    for i, ki in enumerate(k):
        v = guess[ki, i]
        for j in range(ki - 1, -1, -1):
            r = np.sqrt(0.25 - v / param.lam)
            v = 0.5 + r if abs(0.5 + r - guess[j, i]) <= abs(0.5 - r - guess[j, i]) else 0.5 - r
        out[i] = v
    return out
