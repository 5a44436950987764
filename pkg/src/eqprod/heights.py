"""Neron-Tate heights, the height pairing, regulators, independence.

The canonical height is assembled from local parts on the global minimal
model. Writing (U,W) for projective x-coordinates, duplication is the
degree-4 pair U' = U^4 - b4 U^2 W^2 - 2 b6 U W^3 - b8 W^4,
W' = 4 U^3 W + b2 U^2 W^2 + 2 b4 U W^3 + b6 W^4, and

    hbig(P) = lim 4^-n h(x(2^n P))
            = [log max(|x|,1) + sum 4^-(n+1) log c_n]   (archimedean)
              + log den(x) + sum over bad p of ell_p log p,

where c_n is the sup-norm of the duplication step on the renormalized pair
(the telescoped series; it converges geometrically because duplication has
no projective base point when Delta != 0), and ell_p is an exact rational
from the valuation case analysis below, verified against a big-integer
iteration oracle in the tests. The reported height is NAIVE_LIMIT_SCALE
times hbig, the factor fixed by the regulator calibration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from mpmath import mp, mpf

from .arith import DEFAULT_RHO_BUDGET, valuation
from .ecq import (INFINITY, CurvePoint, MinimalModel, Point, WeierstrassCurve,
                  _add_unchecked, is_on_curve, minimal_model)
from .errors import DomainError, IncompleteFactorization

DEFAULT_EPS = 1e-12
DEFAULT_GRAM_TOL = 1e-8

# hhat = NAIVE_LIMIT_SCALE * lim h_naive(x(2^n P)) / 4^n. Both factor-2
# conventions are in circulation; this one reproduces the reference
# regulator 23.4808049005680 on the l=2 example curve (the other choice
# scales a 5x5 regulator by 32).
NAIVE_LIMIT_SCALE = Fraction(1, 2)


def naive_height(P: CurvePoint) -> float:
    """log max(|num x|, den x); 0 at infinity."""
    if P is INFINITY:
        return 0.0
    return math.log(max(abs(P.x.numerator), P.x.denominator))


def _vq(v: Fraction, p: int) -> float:
    """p-adic valuation of a rational; +inf at 0."""
    if v == 0:
        return math.inf
    return valuation(v.numerator, p) - valuation(v.denominator, p)


def _to_mpf(v) -> mpf:
    if isinstance(v, Fraction):
        return mpf(v.numerator) / mpf(v.denominator)
    return mpf(v)


def _is_torsion(curve: WeierstrassCurve, P: CurvePoint) -> bool:
    """Exact torsion test via the order-12 bound on rational torsion."""
    if P is INFINITY:
        return True
    bits0 = (P.x.numerator.bit_length() + P.x.denominator.bit_length() + 64)
    Q: CurvePoint = P
    for _ in range(2, 13):
        Q = _add_unchecked(curve, Q, P)
        if Q is INFINITY:
            return True
        if (Q.x.numerator.bit_length()
                + Q.x.denominator.bit_length()) > 4 * bits0:
            return False  # coordinates blowing up: not torsion
    return False


def _arch_lambda(curve: WeierstrassCurve, x: Fraction, eps: float) -> mpf:
    """Archimedean local term of hbig at the real place (ambient precision)."""
    b2, b4, b6, b8 = (_to_mpf(curve.b2), _to_mpf(curve.b4),
                      _to_mpf(curve.b6), _to_mpf(curve.b8))
    u = _to_mpf(x)
    w = mpf(1)
    m0 = max(abs(u), mpf(1))
    acc = mp.log(m0)
    u, w = u / m0, w / m0
    quarter = mpf(1) / 4
    scale = quarter
    log_bound = mpf(1)
    n = 0
    while True:
        u2, w2, uw = u * u, w * w, u * w
        dd = u2 * u2 - b4 * u2 * w2 - 2 * b6 * uw * w2 - b8 * w2 * w2
        ee = 4 * u2 * uw + b2 * u2 * w2 + 2 * b4 * uw * w2 + b6 * w2 * w2
        c = max(abs(dd), abs(ee))
        logc = mp.log(c)
        acc += logc * scale
        u, w = dd / c, ee / c
        scale *= quarter
        n += 1
        log_bound = max(log_bound, abs(logc))
        # Geometric tail: remaining terms < (2*log_bound) * 4^-n / 3.
        if n >= 20 and 2 * log_bound * scale * 4 / 3 < eps / 2:
            break
        if n >= 500:
            break
    return acc


def _local_ell(curve: WeierstrassCurve, P: Point, p: int) -> Fraction:
    """Exact ell with lambda_p = ell * log p on a p-minimal integral model.

    Nonsingular reduction contributes max(0, -v_p(x)); a point meeting the
    singular fiber contributes a negative rational depending on
    (v_p(Delta), v_p(c4)) and the depths v_p(psi2), v_p(psi3).
    """
    x, y = P
    vx = _vq(x, p)
    if vx < 0:
        return Fraction(int(-vx))
    a1, a2, a3, a4, _ = curve.a_invariants()
    v_half_deriv = _vq(3 * x * x + 2 * a2 * x + a4 - a1 * y, p)
    v_psi2 = _vq(2 * y + a1 * x + a3, p)
    if v_half_deriv <= 0 or v_psi2 <= 0:
        return Fraction(0)
    nv = valuation(int(curve.disc), p)
    if curve.c4 != 0 and valuation(int(curve.c4), p) == 0:
        # Multiplicative reduction; component index from v(psi2).
        half = Fraction(nv, 2)
        alpha = half if v_psi2 == math.inf else min(Fraction(int(v_psi2)),
                                                    half)
        return -alpha * (nv - alpha) / nv
    psi3 = (3 * x**4 + curve.b2 * x**3 + 3 * curve.b4 * x * x
            + 3 * curve.b6 * x + curve.b8)
    v_psi3 = _vq(psi3, p)
    if v_psi3 == math.inf or (v_psi2 != math.inf
                              and v_psi3 >= 3 * v_psi2):
        return Fraction(-2 * int(v_psi2), 3)
    return Fraction(-int(v_psi3), 4)


@dataclass
class _Context:
    mm: MinimalModel
    bad_primes: tuple[int, ...]
    complete: bool


@lru_cache(maxsize=1024)
def _context(curve: WeierstrassCurve, budget: int) -> _Context:
    mm = minimal_model(curve, budget=budget)
    return _Context(mm, tuple(sorted(mm.delta_factorization.factors)),
                    mm.complete)


def _hhat_big(ctx: _Context, Pm: CurvePoint, eps: float) -> float:
    """hbig on the minimal model, |error| < eps/scale-ish; exact 0 on torsion."""
    if Pm is INFINITY or _is_torsion(ctx.mm.curve, Pm):
        return 0.0
    dps = max(40, int(round(-math.log10(eps))) + 25)
    with mp.workdps(dps):
        total = _arch_lambda(ctx.mm.curve, Pm.x, eps)
        total += mp.log(Pm.x.denominator)
        for p in ctx.bad_primes:
            if _vq(Pm.x, p) >= 0:
                ell = _local_ell(ctx.mm.curve, Pm, p)
                if ell:
                    total += _to_mpf(ell) * mp.log(p)
        return float(total)


def _height_raw(curve: WeierstrassCurve, P: CurvePoint, eps: float,
                budget: int, allow_incomplete: bool) -> tuple[float, bool]:
    if P is not INFINITY and not is_on_curve(curve, P):
        raise DomainError(f"point {P} is not on the curve")
    ctx = _context(curve, budget)
    if not ctx.complete and not allow_incomplete:
        raise IncompleteFactorization(
            "bad primes unknown: discriminant factorization incomplete "
            f"(cofactor {ctx.mm.delta_factorization.cofactor})")
    Pm = ctx.mm.transformation.map_point(P)
    big = _hhat_big(ctx, Pm, eps)
    return (float(NAIVE_LIMIT_SCALE) * big, ctx.complete)


@lru_cache(maxsize=8192)
def _height_cached(curve: WeierstrassCurve, P: CurvePoint, eps: float,
                   budget: int) -> tuple[float, bool]:
    return _height_raw(curve, P, eps, budget, allow_incomplete=True)


def canonical_height(curve: WeierstrassCurve, P: CurvePoint,
                     eps: float = DEFAULT_EPS,
                     budget: int = DEFAULT_RHO_BUDGET) -> float:
    """hhat(P) with |error| < eps, in the calibrated normalization."""
    value, complete = _height_cached(curve, P, eps, budget)
    if not complete:
        raise IncompleteFactorization(
            "discriminant factorization incomplete; raise the budget or use "
            "regulator()/independence_verdict() for an advisory value")
    return value


def height_pairing(curve: WeierstrassCurve, P: CurvePoint, Q: CurvePoint,
                   eps: float = DEFAULT_EPS,
                   budget: int = DEFAULT_RHO_BUDGET) -> float:
    """(hhat(P+Q) - hhat(P) - hhat(Q)) / 2, error below 3 eps."""
    for R in (P, Q):
        if R is not INFINITY and not is_on_curve(curve, R):
            raise DomainError(f"point {R} is not on the curve")
    S = _add_unchecked(curve, P, Q)
    hS = canonical_height(curve, S, eps, budget)
    hP = canonical_height(curve, P, eps, budget)
    hQ = canonical_height(curve, Q, eps, budget)
    return (hS - hP - hQ) / 2


@dataclass
class HeightReport:
    points: tuple[str, ...]
    pairing: list[list[float]]
    regulator: float
    rank_lower_bound: int
    tolerance: float
    complete_factorization: bool
    subset: tuple[int, ...]


@dataclass
class IndependenceVerdict:
    rank_lower_bound: int
    subset: tuple[int, ...]
    gram_det: float


def _gram(curve: WeierstrassCurve, points: Sequence[CurvePoint], eps: float,
          budget: int) -> tuple[np.ndarray, bool]:
    n = len(points)
    complete = True
    h = []
    for P in points:
        if P is not INFINITY and not is_on_curve(curve, P):
            raise DomainError(f"point {P} is not on the curve")
        value, comp = _height_cached(curve, P, eps, budget)
        complete = complete and comp
        h.append(value)
    G = np.zeros((n, n))
    for i in range(n):
        G[i, i] = h[i]
        for j in range(i + 1, n):
            S = _add_unchecked(curve, points[i], points[j])
            hS, comp = _height_cached(curve, S, eps, budget)
            complete = complete and comp
            G[i, j] = G[j, i] = (hS - h[i] - h[j]) / 2
    return G, complete


def _greedy_chain(G: np.ndarray, tol: float) -> tuple[list[int], float]:
    """Grow an index chain while the normalized Gram determinant stays > tol.

    Normalization divides by the product of selected diagonal entries so the
    verdict does not depend on the height scale.
    """
    selected: list[int] = []
    det_sel = 1.0
    for i in range(G.shape[0]):
        cand = selected + [i]
        diag = [G[k, k] for k in cand]
        if min(diag) <= tol:
            continue
        sub = G[np.ix_(cand, cand)]
        det = float(np.linalg.det(sub))
        if det / math.prod(diag) > tol:
            selected = cand
            det_sel = det
    return selected, det_sel


def regulator(curve: WeierstrassCurve, points: Sequence[CurvePoint],
              eps: float = DEFAULT_EPS, tol: float = DEFAULT_GRAM_TOL,
              labels: Sequence[str] | None = None,
              budget: int = DEFAULT_RHO_BUDGET) -> HeightReport:
    """Gram matrix, regulator of the greedy-independent subset, rank bound."""
    G, complete = _gram(curve, points, eps, budget)
    selected, det_sel = _greedy_chain(G, tol)
    if labels is None:
        labels = [f"P{i + 1}" for i in range(len(points))]
    return HeightReport(
        points=tuple(labels),
        pairing=[[float(v) for v in row] for row in G],
        regulator=det_sel if selected else 1.0,
        rank_lower_bound=len(selected),
        tolerance=tol,
        complete_factorization=complete,
        subset=tuple(selected),
    )


def independence_verdict(curve: WeierstrassCurve,
                         points: Sequence[CurvePoint],
                         tol: float = DEFAULT_GRAM_TOL,
                         eps: float = DEFAULT_EPS,
                         budget: int = DEFAULT_RHO_BUDGET
                         ) -> IndependenceVerdict:
    """Largest greedy subset whose normalized Gram determinant exceeds tol."""
    G, _ = _gram(curve, points, eps, budget)
    selected, det_sel = _greedy_chain(G, tol)
    return IndependenceVerdict(len(selected), tuple(selected),
                               det_sel if selected else 0.0)


def report_to_json(report: HeightReport) -> dict:
    return {
        "points": list(report.points),
        "pairing": [[float(f"{v:.17g}") for v in row]
                    for row in report.pairing],
        "regulator": float(f"{report.regulator:.17g}"),
        "rank_lower_bound": report.rank_lower_bound,
        "tolerance": report.tolerance,
        "complete_factorization": report.complete_factorization,
        "subset": list(report.subset),
    }


def dumps_report(report: HeightReport) -> str:
    return json.dumps(report_to_json(report), indent=2)
