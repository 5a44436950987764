"""Elliptic curves over Q in long Weierstrass form, exact arithmetic only.

Coefficients and point coordinates are fractions.Fraction; nothing here
rounds. Point counting mod p is the one numeric-flavored routine and it
works in machine integers via numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

from .arith import (DEFAULT_RHO_BUDGET, DEFAULT_TRIAL_BOUND, Factorization,
                    factor, sieve_primes, valuation)
from .errors import DomainError, IncompleteFactorization, SingularCurve

Rat = Union[int, Fraction]


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "Infinity"


INFINITY = _Infinity()


class Point(NamedTuple):
    x: Fraction
    y: Fraction

    def __repr__(self):
        return f"({self.x}, {self.y})"


CurvePoint = Union[Point, _Infinity]


def point(x: Rat, y: Rat) -> Point:
    return Point(Fraction(x), Fraction(y))


class WeierstrassCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with rational a_i."""

    __slots__ = ("a1", "a2", "a3", "a4", "a6",
                 "b2", "b4", "b6", "b8", "c4", "c6", "disc")

    def __init__(self, a1: Rat, a2: Rat, a3: Rat, a4: Rat, a6: Rat,
                 check: bool = True):
        self.a1 = Fraction(a1)
        self.a2 = Fraction(a2)
        self.a3 = Fraction(a3)
        self.a4 = Fraction(a4)
        self.a6 = Fraction(a6)
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        self.b2 = a1 * a1 + 4 * a2
        self.b4 = 2 * a4 + a1 * a3
        self.b6 = a3 * a3 + 4 * a6
        self.b8 = (a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4
                   + a2 * a3 * a3 - a4 * a4)
        self.c4 = self.b2 * self.b2 - 24 * self.b4
        self.c6 = (-self.b2 ** 3 + 36 * self.b2 * self.b4 - 216 * self.b6)
        self.disc = (-self.b2 * self.b2 * self.b8 - 8 * self.b4 ** 3
                     - 27 * self.b6 * self.b6 + 9 * self.b2 * self.b4 * self.b6)
        assert 4 * self.b8 == self.b2 * self.b6 - self.b4 * self.b4
        assert 1728 * self.disc == self.c4 ** 3 - self.c6 ** 2
        if check and self.disc == 0:
            raise SingularCurve(f"discriminant is zero for a-invariants "
                                f"{self.a_invariants()}")

    def a_invariants(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.a_invariants())

    def j_invariant(self) -> Fraction:
        return self.c4 ** 3 / self.disc

    def __eq__(self, other):
        return (isinstance(other, WeierstrassCurve)
                and self.a_invariants() == other.a_invariants())

    def __hash__(self):
        return hash(self.a_invariants())

    def __repr__(self):
        a = ",".join(str(ai) for ai in self.a_invariants())
        return f"WeierstrassCurve({a})"


def curve_from_a_invariants(a1: Rat, a2: Rat, a3: Rat, a4: Rat,
                            a6: Rat) -> WeierstrassCurve:
    """Build a curve, rejecting singular equations."""
    return WeierstrassCurve(a1, a2, a3, a4, a6)


def is_on_curve(curve: WeierstrassCurve, P: CurvePoint) -> bool:
    if P is INFINITY:
        return True
    x, y = P
    lhs = y * y + curve.a1 * x * y + curve.a3 * y
    rhs = x ** 3 + curve.a2 * x * x + curve.a4 * x + curve.a6
    return lhs == rhs


def negate(curve: WeierstrassCurve, P: CurvePoint) -> CurvePoint:
    if P is INFINITY:
        return INFINITY
    x, y = P
    return Point(x, -y - curve.a1 * x - curve.a3)


def _add_unchecked(curve: WeierstrassCurve, P: CurvePoint,
                   Q: CurvePoint) -> CurvePoint:
    if P is INFINITY:
        return Q
    if Q is INFINITY:
        return P
    a1, a2, a3 = curve.a1, curve.a2, curve.a3
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 + y2 + a1 * x1 + a3 == 0:
            return INFINITY
        num = 3 * x1 * x1 + 2 * a2 * x1 + curve.a4 - a1 * y1
        den = 2 * y1 + a1 * x1 + a3
        lam = num / den
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = lam * (x1 - x3) - y1 - a1 * x3 - a3
    return Point(x3, y3)


def add(curve: WeierstrassCurve, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    """Chord-tangent sum. Inputs must lie on the curve."""
    for R in (P, Q):
        if not is_on_curve(curve, R):
            raise DomainError(f"point {R} is not on the curve")
    return _add_unchecked(curve, P, Q)


def scalar_mul(curve: WeierstrassCurve, n: int, P: CurvePoint) -> CurvePoint:
    """n*P by double-and-add; n may be negative or zero."""
    if not is_on_curve(curve, P):
        raise DomainError(f"point {P} is not on the curve")
    if n < 0:
        n, P = -n, negate(curve, P)
    R: CurvePoint = INFINITY
    while n:
        if n & 1:
            R = _add_unchecked(curve, R, P)
        n >>= 1
        if n:
            P = _add_unchecked(curve, P, P)
    return R


# ---------------------------------------------------------------------------
# Model changes


@dataclass(frozen=True)
class Transformation:
    """x = u^2 x' + r, y = u^3 y' + s u^2 x' + t (source -> primed target)."""

    u: Fraction
    r: Fraction
    s: Fraction
    t: Fraction

    def map_point(self, P: CurvePoint) -> CurvePoint:
        """Source-curve point to target-curve point."""
        if P is INFINITY:
            return INFINITY
        x, y = P
        xp = (x - self.r) / self.u ** 2
        yp = (y - self.s * (x - self.r) - self.t) / self.u ** 3
        return Point(xp, yp)

    def unmap_point(self, P: CurvePoint) -> CurvePoint:
        if P is INFINITY:
            return INFINITY
        xp, yp = P
        x = self.u ** 2 * xp + self.r
        y = self.u ** 3 * yp + self.s * self.u ** 2 * xp + self.t
        return Point(x, y)


def transform_curve(curve: WeierstrassCurve, u: Rat, r: Rat, s: Rat,
                    t: Rat) -> WeierstrassCurve:
    """Apply x = u^2 x' + r, y = u^3 y' + s u^2 x' + t; return the new model."""
    u, r, s, t = Fraction(u), Fraction(r), Fraction(s), Fraction(t)
    if u == 0:
        raise DomainError("transformation scale u must be nonzero")
    a1, a2, a3, a4, a6 = curve.a_invariants()
    na1 = (a1 + 2 * s) / u
    na2 = (a2 - s * a1 + 3 * r - s * s) / u ** 2
    na3 = (a3 + r * a1 + 2 * t) / u ** 3
    na4 = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r
           - 2 * s * t) / u ** 4
    na6 = (a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t
           - r * t * a1) / u ** 6
    return WeierstrassCurve(na1, na2, na3, na4, na6)


def integral_model(curve: WeierstrassCurve,
                   budget: int = DEFAULT_RHO_BUDGET
                   ) -> tuple[WeierstrassCurve, int]:
    """Clear denominators with the least admissible scale.

    Returns (curve', m) where (x, y) -> (m^2 x, m^3 y) maps points of `curve`
    onto curve'. m is the least positive integer making every m^i a_i integral.
    """
    dens = [a.denominator for a in curve.a_invariants()]
    lcm = math.lcm(*dens)
    if lcm == 1:
        return curve, 1
    fz = factor(lcm, budget=budget)
    if not fz.complete:
        raise IncompleteFactorization(
            f"cannot factor denominator lcm {lcm} within budget")
    weights = (1, 2, 3, 4, 6)
    m = 1
    for p in fz.factors:
        e = 0
        for a, w in zip(curve.a_invariants(), weights):
            vp = valuation(a.denominator, p)
            e = max(e, -(-vp // w))  # ceil division
        m *= p ** e
    scaled = transform_curve(curve, Fraction(1, m), 0, 0, 0)
    assert scaled.is_integral()
    return scaled, m


@dataclass
class MinimalModel:
    """Global minimal model plus the transformation that reaches it.

    transformation maps points of the source curve to points of `curve`
    (map_point direction). delta_factorization factors the minimal |Delta|;
    complete is False when the budget left a cofactor.
    """

    curve: WeierstrassCurve
    transformation: Transformation
    delta_factorization: Factorization
    complete: bool


def _kraus_ok_2(c4: int, c6: int) -> bool:
    # An integral model with these invariants exists iff c6 = -1 mod 4,
    # or c4 = 0 mod 16 and c6 = 0 or 8 mod 32.
    return c6 % 4 == 3 or (c4 % 16 == 0 and c6 % 32 in (0, 8))


def _model_from_c4c6(c4: int, c6: int) -> WeierstrassCurve:
    """Kraus-Connell reconstruction of the reduced integral model."""
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    num4 = b2 * b2 - c4
    num6 = -b2 ** 3 + 36 * b2 * (num4 // 24) - c6
    if num4 % 24 or num6 % 216:
        raise DomainError(f"(c4, c6) = ({c4}, {c6}) admits no integral model")
    b4 = num4 // 24
    b6 = num6 // 216
    a1 = b2 % 2
    a2 = (b2 - a1) // 4
    a3 = b6 % 2
    a4 = (b4 - a1 * a3) // 2
    a6 = (b6 - a3) // 4
    curve = WeierstrassCurve(a1, a2, a3, a4, a6)
    assert (curve.c4, curve.c6) == (c4, c6)
    return curve


def minimal_model(curve: WeierstrassCurve,
                  budget: int = DEFAULT_RHO_BUDGET,
                  trial_bound: int = DEFAULT_TRIAL_BOUND) -> MinimalModel:
    """Laska-Kraus-Connell global minimal model, reduced normalization.

    The result has a1, a3 in {0, 1} and a2 in {-1, 0, 1}, so equal curves
    yield identical minimal a-invariants. Raises IncompleteFactorization
    only when an unfactored cofactor could actually hide a 12th power
    (cofactor >= trial_bound^12); smaller leftovers cannot affect u.
    """
    e_int, m = integral_model(curve, budget=budget)
    c4, c6, delta = int(e_int.c4), int(e_int.c6), int(e_int.disc)
    fz = factor(delta, budget=budget, trial_bound=trial_bound)
    if not fz.complete and fz.cofactor >= trial_bound ** 12:
        raise IncompleteFactorization(
            f"unfactored cofactor {fz.cofactor} could hide a 12th power")
    u = 1
    for p in sorted(fz.factors):
        # v_p(gcd(c6^2, Delta)); treat c6 = 0 as infinite valuation.
        vg = fz.factors[p] if c6 == 0 else min(2 * valuation(c6, p),
                                               fz.factors[p])
        d = vg // 12
        if p == 2:
            while d > 0:
                if (c4 % 2 ** (4 * d) == 0 and c6 % 2 ** (6 * d) == 0
                        and _kraus_ok_2(c4 // 2 ** (4 * d),
                                        c6 // 2 ** (6 * d))):
                    break
                d -= 1
        elif p == 3:
            while d > 0 and c6 != 0 and valuation(c6, 3) == 6 * d + 2:
                d -= 1
        u *= p ** d
    c4m, c6m = c4 // u ** 4, c6 // u ** 6
    assert c4m * u ** 4 == c4 and c6m * u ** 6 == c6
    minimal = _model_from_c4c6(c4m, c6m)

    # Composite transformation source -> minimal: scale is u/m overall.
    uu = Fraction(u, m)
    a1, a2, a3 = curve.a1, curve.a2, curve.a3
    na1, na2, na3 = minimal.a1, minimal.a2, minimal.a3
    s = (uu * na1 - a1) / 2
    r = (uu ** 2 * na2 - a2 + s * a1 + s * s) / 3
    t = (uu ** 3 * na3 - a3 - r * a1) / 2
    trans = Transformation(uu, r, s, t)
    assert transform_curve(curve, uu, r, s, t) == minimal

    dmin_factors = dict(fz.factors)
    for p in list(dmin_factors):
        dmin_factors[p] -= 12 * valuation(u, p)
        if dmin_factors[p] == 0:
            del dmin_factors[p]
    dfz = Factorization(n=int(minimal.disc), factors=dmin_factors,
                        cofactor=fz.cofactor, complete=fz.complete)
    assert dfz.check()
    return MinimalModel(minimal, trans, dfz, fz.complete)


def curves_equivalent(e1: WeierstrassCurve, e2: WeierstrassCurve,
                      budget: int = DEFAULT_RHO_BUDGET) -> bool:
    """Q-isomorphism test via identical reduced minimal models."""
    return (minimal_model(e1, budget=budget).curve
            == minimal_model(e2, budget=budget).curve)


# ---------------------------------------------------------------------------
# Reduction mod p and point counts


@dataclass(frozen=True)
class ReductionInfo:
    p: int
    good: bool
    a_mod: tuple[int, int, int, int, int]


def reduce_mod_p(curve: WeierstrassCurve, p: int) -> ReductionInfo:
    """Reduce an integral model mod p and classify good/bad via Delta."""
    if not curve.is_integral():
        raise DomainError("reduce_mod_p needs an integral model")
    a_mod = tuple(int(a) % p for a in curve.a_invariants())
    return ReductionInfo(p, int(curve.disc) % p != 0, a_mod)  # type: ignore


_QR_TABLE_LIMIT = 10**6


def _char_sum(b2: int, b4: int, b6: int, p: int) -> int:
    """Sum over x in F_p of chi(4x^3 + b2 x^2 + 2b4 x + b6)."""
    if p <= _QR_TABLE_LIMIT:
        xs = np.arange(p, dtype=np.int64)
        g = (4 * xs + b2) % p
        g = (g * xs + 2 * b4 % p) % p
        g = (g * xs + b6) % p
        table = np.zeros(p, dtype=np.int8)
        table[(xs * xs) % p] = 1
        nonzero = g != 0
        residues = int(table[g[nonzero]].sum())
        return residues - (int(nonzero.sum()) - residues)
    total = 0
    for x in range(p):
        v = (((4 * x + b2) * x + 2 * b4) * x + b6) % p
        if v:
            total += 1 if pow(v, (p - 1) // 2, p) == 1 else -1
    return total


def count_points_ap(curve: WeierstrassCurve, p: int) -> int:
    """Trace of Frobenius a_p = p + 1 - #E(F_p) at a good prime."""
    if not curve.is_integral():
        raise DomainError("count_points_ap needs an integral model")
    if int(curve.disc) % p == 0:
        raise DomainError(f"bad reduction at p = {p}")
    if p == 2:
        a1, a2, a3, a4, a6 = (int(a) % 2 for a in curve.a_invariants())
        count = 1  # infinity
        for x in (0, 1):
            for y in (0, 1):
                if (y * y + a1 * x * y + a3 * y
                        - (x ** 3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                    count += 1
        return 2 + 1 - count
    # Complete the square: #affine = p + sum chi(4x^3 + b2 x^2 + 2 b4 x + b6).
    b2, b4, b6 = (int(curve.b2) % p, int(curve.b4) % p, int(curve.b6) % p)
    ap = -_char_sum(b2, b4, b6, p)
    assert ap * ap <= 4 * p, f"Hasse bound violated at p={p}: a_p={ap}"
    return ap


def torsion_bound(curve: WeierstrassCurve, num_primes: int = 10) -> int:
    """gcd of #E(F_p) over the first num_primes good odd primes."""
    if num_primes < 1:
        raise DomainError("num_primes must be >= 1")
    if not curve.is_integral():
        raise DomainError("torsion_bound needs an integral model")
    bound = 0
    used = 0
    for p in sieve_primes(10**5):
        if p == 2 or int(curve.disc) % p == 0:
            continue
        bound = math.gcd(bound, p + 1 - count_points_ap(curve, p))
        used += 1
        if used == num_primes or bound == 1:
            break
    return bound
