"""The quadratic family ``P(x) = lam * x * (1 - x)``: iterates, inverse
branches, external angles and landing points of rational angles.

Landing points are located by pulling back values of the Böttcher map along
the doubling orbit of the angle.  Each pullback step replaces
``phi(r e^{2 pi i t})`` by the preimage of ``phi(r e^{2 pi i 2t})`` closest to
it, which is ``phi(r**0.5 e^{2 pi i t})``; the radius tends to one and the
values converge to the landing cycle, which is then polished by Newton's
method on ``P_N(x) = x``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import (
    DedupFailure,
    NewtonDiverged,
    NotRepelling,
    ZeroLambda,
)

ESCAPE_BOUND = 1e8
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100
MERGE_TOL = 1e-8
DEFAULT_RHO_SCHEDULE = (0.9, 0.8, 0.95)


class Escaped(ArithmeticError):
    """An iterate left the disk ``|x| <= escape_bound`` (divergence, not a bug)."""

    def __init__(self, step, value):
        self.step = step
        self.value = value
        super().__init__(f"iterate escaped at step {step}: |x|={float(np.max(np.abs(value))):.3g}")


@dataclass(frozen=True)
class QuadParam:
    lam: complex
    c: complex

    def P(self, x):
        return self.lam * x * (1 - x)

    def dP(self, x):
        return self.lam * (1 - 2 * x)

    def to_z(self, x):
        """Coordinate change to ``z -> z**2 + c``."""
        return self.lam / 2 - self.lam * x

    def from_z(self, z):
        return 0.5 - z / self.lam

    def to_json(self):
        return {"lambda": [self.lam.real, self.lam.imag], "c": [self.c.real, self.c.imag]}


def make_param(lam) -> QuadParam:
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    return QuadParam(lam, lam / 2 - lam * lam / 4)


def eval_P(param, x):
    return param.lam * x * (1 - x)


def eval_Pn(param, x, n, escape_bound=ESCAPE_BOUND):
    for step in range(n):
        x = param.lam * x * (1 - x)
        if np.any(np.abs(x) > escape_bound):
            raise Escaped(step + 1, x)
    return x


def deriv_Pn(param, x, n, escape_bound=ESCAPE_BOUND):
    """``P_n'(x)`` as the product of ``P'`` along the orbit."""
    d = 1.0
    for step in range(n):
        d = d * param.lam * (1 - 2 * x)
        x = param.lam * x * (1 - x)
        if np.any(np.abs(x) > escape_bound):
            raise Escaped(step + 1, x)
    return d


# --- external angles ---------------------------------------------------

@dataclass(frozen=True, order=True)
class ExternalAngle:
    p: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("denominator must be positive")
        f = Fraction(self.p, self.q) % 1
        object.__setattr__(self, "p", f.numerator)
        object.__setattr__(self, "q", f.denominator)

    @classmethod
    def parse(cls, text):
        f = Fraction(str(text).strip())
        return cls(f.numerator, f.denominator)

    @classmethod
    def of(cls, value):
        if isinstance(value, ExternalAngle):
            return value
        if isinstance(value, Fraction):
            return cls(value.numerator, value.denominator)
        if isinstance(value, int):
            return cls(value, 1)
        return cls.parse(value)

    @property
    def fraction(self):
        return Fraction(self.p, self.q)

    @property
    def dyadic_exponent(self):
        return (self.q & -self.q).bit_length() - 1

    @property
    def q_odd(self):
        return self.q >> self.dyadic_exponent

    def doubled(self):
        return ExternalAngle(2 * self.p, self.q)

    def __float__(self):
        return self.p / self.q

    def __str__(self):
        return f"{self.p}/{self.q}"


def angle_orbit(angle):
    """Doubling orbit of ``angle``: ``(preperiod, period, orbit)``.

    ``orbit`` lists the preperiodic angles followed by one full cycle.
    """
    angle = ExternalAngle.of(angle)
    m = angle.dyadic_exponent
    orbit = [angle]
    for _ in range(m):
        orbit.append(orbit[-1].doubled())
    start = orbit[-1]
    t = start.doubled()
    while t != start:
        orbit.append(t)
        t = t.doubled()
    return m, len(orbit) - m, orbit


def multiplicative_order_of_two(q):
    """Least ``N >= 1`` with ``2**N = 1 mod q`` (``q`` odd)."""
    if q % 2 == 0:
        raise ValueError("q must be odd")
    if q == 1:
        return 1
    n, r = 1, 2 % q
    while r != 1:
        r = (2 * r) % q
        n += 1
    return n


def angles_of_period_dividing(n):
    """All angles ``k / (2**n - 1)``, ascending."""
    den = 2**n - 1
    return [ExternalAngle(k, den) for k in range(den)]


# --- inverse branches --------------------------------------------------

class Branches(NamedTuple):
    plus: complex
    minus: complex
    degenerate: bool


def inverse_branches(param, y):
    """The two solutions of ``lam x (1 - x) = y``; ``plus`` uses the principal root."""
    r = np.sqrt(0.25 - np.asarray(y, dtype=complex) / param.lam)
    degenerate = bool(np.any(r == 0))
    plus, minus = 0.5 + r, 0.5 - r
    if np.ndim(plus) == 0:
        plus, minus = complex(plus), complex(minus)
    return Branches(plus, minus, degenerate)


# --- periodic orbits ---------------------------------------------------

@dataclass(frozen=True)
class PeriodicOrbit:
    angle: ExternalAngle
    N: int
    points: tuple
    w: complex
    b: complex
    residual: float = 0.0
    angles: tuple = field(default=(), compare=False)

    @property
    def M(self):
        return 2**self.N

    @property
    def L(self):
        return self.points[0]

    @property
    def exact_period(self):
        return len(self.distinct_points())

    def distinct_points(self, tol=MERGE_TOL):
        out = []
        for z in self.points:
            if all(abs(z - u) > tol * (1 + abs(u)) for u in out):
                out.append(z)
        return out

    @property
    def beta(self):
        """``Re b``, also ``log2|P_n'|/n`` at every point for any multiple ``n``."""
        return self.b.real

    def to_json(self):
        return {
            "angle": {"p": self.angle.p, "q": self.angle.q},
            "N": self.N,
            "M": self.M,
            "points": [[z.real, z.imag] for z in self.points],
            "w": [self.w.real, self.w.imag],
            "b": [self.b.real, self.b.imag],
            "residual": self.residual,
        }


def local_exponent(w, N):
    return cmath.log(w) / (N * math.log(2))


def _phi_on_rays(series, angles, rho):
    z = rho * np.exp(2j * np.pi * np.array([float(a) for a in angles]))
    return np.asarray(series(z), dtype=complex)


def _pullback_step(param, x, nxt):
    y = x[nxt]
    r = np.sqrt(0.25 - y / param.lam)
    c1 = 0.5 + r
    c2 = 0.5 - r
    return np.where(np.abs(c1 - x) <= np.abs(c2 - x), c1, c2)


def _newton_periodic(param, x, n, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER):
    x = np.array(x, dtype=complex)
    active = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        xa = x[active]
        v, d = xa.copy(), np.ones_like(xa)
        for _ in range(n):
            d = d * param.lam * (1 - 2 * v)
            v = param.lam * v * (1 - v)
        step = (v - xa) / (d - 1)
        x[active] = xa - step
        done = np.abs(step) <= tol * (1 + np.abs(xa))
        idx = np.nonzero(active)[0]
        active[idx[done]] = False
    if active.any() or not np.all(np.isfinite(x)):
        raise NewtonDiverged(f"Newton on P_{n}(x) = x did not converge in {max_iter} iterations")
    return x


def land_angles(param, series, angles, rho_schedule=DEFAULT_RHO_SCHEDULE,
                tol=1e-13, max_steps=200_000):
    """Landing points of a doubling-closed list of angles.

    Returns an array aligned with ``angles``.  Every angle must be
    periodic or preperiodic with its whole forward orbit in the list.
    """
    angles = [ExternalAngle.of(a) for a in angles]
    index = {a: i for i, a in enumerate(angles)}
    nxt = np.array([index[a.doubled()] for a in angles])
    periodic = np.array([a.dyadic_exponent == 0 for a in angles])
    period = np.array([multiplicative_order_of_two(a.q_odd) for a in angles])
    last_err = None
    for rho in rho_schedule:
        x = _phi_on_rays(series, angles, rho)
        for _ in range(max_steps):
            x_new = _pullback_step(param, x, nxt)
            delta = np.max(np.abs(x_new - x) / (1 + np.abs(x)))
            x = x_new
            if delta < 1e-9:
                break
        try:
            n_common = int(np.lcm.reduce(period[periodic])) if periodic.any() else 1
            if periodic.any():
                if n_common <= 24:
                    x[periodic] = _newton_periodic(param, x[periodic], n_common)
                else:
                    for N in np.unique(period[periodic]):
                        sel = periodic & (period == N)
                        x[sel] = _newton_periodic(param, x[sel], int(N))
            # preperiodic chains are exact pullbacks of the polished cycle
            for _ in range(int(max((a.dyadic_exponent for a in angles), default=0))):
                x = np.where(periodic, x, _pullback_step(param, x, nxt))
            check = _pullback_step(param, x, nxt)
            bad = np.abs(check - x) > 1e-9 * (1 + np.abs(x))
            if bad.any():
                raise NewtonDiverged(
                    f"polished cycle is not fixed by the angle-guided pullback at {int(bad.sum())} angles"
                )
            return x
        except NewtonDiverged as exc:
            last_err = exc
    raise last_err


def _make_orbit(param, angle, cycle_angles, points, N):
    pts = tuple(complex(z) for z in points)
    w = 1.0 + 0j
    for z in pts:
        w *= param.lam * (1 - 2 * z)
    b = local_exponent(w, N)
    resid = abs(eval_Pn(param, pts[0], N) - pts[0]) / (1 + abs(pts[0]))
    return PeriodicOrbit(ExternalAngle.of(angle), N, pts, complex(w), complex(b), float(resid), tuple(cycle_angles))


def landing_point(param, angle, series, rho_schedule=DEFAULT_RHO_SCHEDULE):
    """The periodic orbit on which a periodic external angle lands."""
    angle = ExternalAngle.of(angle)
    m, N, orbit = angle_orbit(angle)
    if m:
        raise ValueError("landing_point expects a periodic angle; use landing_chain for dyadic angles")
    x = land_angles(param, series, orbit, rho_schedule)
    orb = _make_orbit(param, angle, orbit, x, N)
    if orb.residual > 1e-10:
        raise NewtonDiverged(f"periodic residual {orb.residual:.2e}")
    if abs(orb.w) <= 1:
        raise NotRepelling(f"|w| = {abs(orb.w):.6f} <= 1 at angle {angle}")
    return orb


def landing_chain(param, angle, series, rho_schedule=DEFAULT_RHO_SCHEDULE):
    """Landing points along the full doubling orbit of a (pre)periodic angle.

    Returns ``(orbit_angles, points)`` with ``points[j]`` the landing point
    of ``orbit_angles[j]``.
    """
    m, N, orbit = angle_orbit(angle)
    x = land_angles(param, series, orbit, rho_schedule)
    return orbit, [complex(v) for v in x]


def attracting_cycle(param, burn_in=4000, max_period=64, tol=1e-10):
    """The non-repelling cycle attracting the critical point, as ``(period, points)``.

    Returns ``(0, [])`` when no cycle is detected (critical orbit escapes or
    converges too slowly).
    """
    x = 0.5 + 0j
    for _ in range(burn_in):
        x = param.lam * x * (1 - x)
        if abs(x) > ESCAPE_BOUND:
            return 0, []
    y = x
    for p in range(1, max_period + 1):
        y = param.lam * y * (1 - y)
        if abs(y - x) <= tol * (1 + abs(x)):
            pts = [x]
            for _ in range(p - 1):
                pts.append(param.lam * pts[-1] * (1 - pts[-1]))
            return p, pts
    return 0, []


def expected_J_count(param, n):
    """``#(fix(P_n) on J)`` for a hyperbolic parameter: ``2**n`` minus the attracting cycle."""
    p, _ = attracting_cycle(param)
    return 2**n - (p if p and n % p == 0 else 0)


def periodic_points_on_J(param, n, series, rho_schedule=DEFAULT_RHO_SCHEDULE, threads=1):
    """Repelling cycles of ``P`` with period dividing ``n``, one per cycle of angles.

    Cycles whose landing sets coincide (several angles landing on one
    point) are merged.  Points whose rays all have a period that does not
    divide ``n`` (satellite components) are recovered from longer ray
    periods until the count matches ``expected_J_count``.  The result is
    sorted by smallest angle.
    """
    orbits = _orbits_for_ray_period(param, n, series, rho_schedule, threads)
    target = expected_J_count(param, n)
    r = 1
    while count_points(orbits) < target and r < 2 * n:
        r += 1
        if n % r == 0:
            continue
        extra = [
            o for o in _orbits_for_ray_period(param, r, series, rho_schedule, threads)
            if o.exact_period != r and n % o.exact_period == 0
        ]
        orbits = _merge_orbits(orbits + extra)
    orbits.sort(key=lambda o: o.angle)
    return orbits


def _orbits_for_ray_period(param, n, series, rho_schedule, threads):
    angles = angles_of_period_dividing(n)
    x = land_angles(param, series, angles, rho_schedule)
    index = {a: i for i, a in enumerate(angles)}
    seen = set()
    orbits = []
    for a in angles:
        if a in seen:
            continue
        m, N, cyc = angle_orbit(a)
        seen.update(cyc)
        pts = [x[index[t]] for t in cyc]
        orb = _make_orbit(param, a, cyc, pts, N)
        if abs(orb.w) <= 1:
            continue
        orbits.append(orb)
    return _merge_orbits(orbits)


def _merge_orbits(orbits):
    out = []
    for orb in orbits:
        pts = np.array(orb.distinct_points())
        dup = None
        for k, other in enumerate(out):
            opts = np.array(other.distinct_points())
            if len(opts) != len(pts):
                continue
            d = np.abs(pts[:, None] - opts[None, :]).min(axis=1).max()
            if d <= MERGE_TOL * (1 + np.abs(pts).max()):
                dup = k
                break
        if dup is None:
            out.append(orb)
            continue
        other = out[dup]
        if abs(orb.beta - other.beta) > 1e-6 * (1 + abs(orb.beta)):
            raise DedupFailure(f"angles {orb.angle} and {other.angle} land together with different multipliers")
    return out


def count_points(orbits):
    return sum(o.exact_period for o in orbits)
