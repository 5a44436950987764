"""Elliptic curves attached to equal-sum equal-product triple sets.

Family A (l=2): y^2 = x^3 + (T1+e1^2) x^2 + MN x + N^2 with the free
parameter k controlling e1, e2. Family B (l=3): a quartic pencil tied
together by the solvability identity A(T1-T_{i+1}) = m_i^2 - B^2, passed
to a cubic model. Family C (l=4): works for any valid 4-set with
T = T1+T2-T3-T4 nonzero; the two-parameter generator gen_C feeds it.

Marked points come in co-linear batches: each batch lies on a line
y + c x = 0 (c = e1, e2 for A; B, m1, m2 for B) or shares an abscissa
pattern X = -NK/part (C), which is what caps the independent count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import triples as tr
from .ecq import INFINITY, Point, WeierstrassCurve, is_on_curve
from .errors import DegenerateSet, DomainError
from .triples import TripleSet

Rat = Fraction | int


@dataclass(frozen=True)
class FamilyInstance:
    family: str
    params: tuple[Fraction, ...]
    tset: TripleSet
    constants: dict[str, Fraction]
    curve: WeierstrassCurve
    points: tuple[tuple[str, Point], ...]

    def point_map(self) -> dict[str, Point]:
        return dict(self.points)

    def labels(self) -> list[str]:
        return [lab for lab, _ in self.points]

    def marked_points(self) -> list[Point]:
        return [P for _, P in self.points]


def _check_points(curve: WeierstrassCurve,
                  pts: Sequence[tuple[str, Point]]) -> None:
    for label, P in pts:
        if not is_on_curve(curve, P):
            raise DomainError(f"constructed point {label} = {P} "
                              f"is off the curve")


def build_family_A(p: int, q: int, r: int, s: int, t: int,
                   k: Rat) -> FamilyInstance:
    """l=2 construction with seven marked points P1, P_ij, Q_ij."""
    k = Fraction(k)
    if k == 0:
        raise DomainError("k must be nonzero (divides e1, e2)")
    ts = tr.gen_A(p, q, r, s, t)
    (a1, a2, a3), (b1, b2, b3) = ts.triples
    T1, T2 = ts.T
    e1 = Fraction(k * k + T2 - T1, 1) / (2 * k)
    e2 = Fraction(k * k + T1 - T2, 1) / (2 * k)
    assert T1 + e1 * e1 == T2 + e2 * e2
    curve = WeierstrassCurve(0, T1 + e1 * e1, 0, ts.M * ts.N, ts.N**2)
    pts = [("P1", Point(Fraction(0), Fraction(ts.N)))]
    for label, (u, v) in (("P12", (a1, a2)), ("P13", (a1, a3)),
                          ("P23", (a2, a3))):
        pts.append((label, Point(Fraction(-u * v), u * v * e1)))
    for label, (u, v) in (("Q12", (b1, b2)), ("Q13", (b1, b3)),
                          ("Q23", (b2, b3))):
        pts.append((label, Point(Fraction(-u * v), u * v * e2)))
    _check_points(curve, pts)
    consts = {"T1": Fraction(T1), "T2": Fraction(T2), "e1": e1, "e2": e2}
    return FamilyInstance("A", tuple(Fraction(v) for v in (p, q, r, s, t, k)),
                          ts, consts, curve, tuple(pts))


def build_family_B(p: int, q: int, r: int, h: Rat, k: Rat) -> FamilyInstance:
    """l=3 construction with nine marked points on three lines."""
    h, k = Fraction(h), Fraction(k)
    ts = tr.gen_B(p, q, r)
    T1, T2, T3 = ts.T
    d2, d3 = T1 - T2, T1 - T3
    A = -4 * h * k * (h - k) * (d2 * h - d3 * k)
    B = d2 * h * h - d3 * k * k
    if A == 0:
        raise DomainError(f"A vanishes for (h,k)=({h},{k}); "
                          f"need h, k, h-k and (T1-T2)h-(T1-T3)k nonzero")
    m1 = d2 * h * h - 2 * d2 * h * k + d3 * k * k
    m2 = d2 * h * h - 2 * d3 * h * k + d3 * k * k
    assert A * d2 == m1 * m1 - B * B
    assert A * d3 == m2 * m2 - B * B
    curve = WeierstrassCurve(0, A * T1 + B * B, 0, A * A * ts.M * ts.N,
                             A**3 * ts.N**2)
    pts = []
    for row, (name, slope) in zip(ts.triples,
                                  (("P", B), ("Q", m1), ("R", m2))):
        u1, u2, u3 = (Fraction(v) for v in row)
        for i, prod in (("1", u2 * u3), ("2", u1 * u3), ("3", u1 * u2)):
            pts.append((name + i, Point(-prod * A, prod * A * slope)))
    _check_points(curve, pts)
    consts = {"T1": Fraction(T1), "T2": Fraction(T2), "T3": Fraction(T3),
              "A": A, "B": B, "m1": m1, "m2": m2,
              "s": Fraction(ts.triples[0][1]), "w": Fraction(ts.triples[1][0]),
              "z": Fraction(ts.triples[0][2])}
    return FamilyInstance("B", tuple(Fraction(v) for v in (p, q, r, h, k)),
                          ts, consts, curve, tuple(pts))


def _sqrt_exact(v: Fraction) -> Fraction:
    """Nonnegative exact square root; DomainError when v is not a square."""
    if v < 0:
        raise DomainError(f"negative value {v} cannot be a rational square")
    num, den = v.numerator, v.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise DomainError(f"{v} is not a rational square")
    return Fraction(rn, rd)


def build_EC_from_set(ts: TripleSet) -> tuple[WeierstrassCurve,
                                              dict[str, Fraction],
                                              tuple[tuple[str, Point], ...]]:
    """Cubic model Y^2 = X^3 + H X^2 + MNK^2 X + N^2 K^3 for any valid 4-set.

    Twelve marked points X = -NK/part, Y the nonnegative root. Returns
    (curve, constants, points). The quartic values at x = -part must be
    rational squares; this is asserted via the exact Y extraction.
    """
    verdict = tr.validate_set(ts)
    if not verdict.ok:
        raise DegenerateSet("; ".join(verdict.failures))
    if ts.l != 4:
        raise DomainError(f"need a 4-triple set, got l = {ts.l}")
    T1, T2, T3, T4 = (Fraction(t) for t in ts.T)
    T = T1 + T2 - T3 - T4
    if T == 0:
        raise DomainError("T = T1+T2-T3-T4 vanishes")
    D = T1 * T2 - T3 * T4
    K = -(T * T + 2 * (T3 + T4) * T - 4 * D) / (2 * T)
    if K == 0:
        raise DomainError("quartic coefficient K vanishes")
    H = (T * T + 4 * D) ** 2 / (16 * T * T) - T1 * T2
    M, N = Fraction(ts.M), Fraction(ts.N)
    curve = WeierstrassCurve(0, H, 0, M * N * K * K, N * N * K**3)
    pts = []
    for tri_label, row in zip("abcd", ts.triples):
        for i, part in enumerate(row, start=1):
            X = -N * K / part
            rhs = X**3 + H * X * X + M * N * K * K * X + N * N * K**3
            Y = _sqrt_exact(rhs)
            pts.append((f"P{tri_label}{i}", Point(X, Y)))
    _check_points(curve, pts)
    consts = {"T1": T1, "T2": T2, "T3": T3, "T4": T4, "T": T, "K": K, "H": H}
    return curve, consts, tuple(pts)


def build_family_C(q: Rat, s: Rat) -> FamilyInstance:
    """l=4 construction from the two-parameter generator."""
    q, s = Fraction(q), Fraction(s)
    ts = tr.gen_C(q, s)
    curve, consts, pts = build_EC_from_set(ts)
    t1, t2, t3, t4, t5 = tr._c_polynomials(q, s)
    consts = dict(consts)
    consts.update({"t1": t1, "t2": t2, "t3": t3, "t4": t4, "t5": t5})
    return FamilyInstance("C", (q, s), ts, consts, curve, pts)


def line_residuals(inst: FamilyInstance) -> dict[str, Fraction]:
    """Residual of each marked point against its batch line y + c x = 0.

    Zero for families A and B by construction; family C points are keyed
    by abscissa batches instead, so this returns {} for C.
    """
    slopes: dict[str, Fraction]
    if inst.family == "A":
        slopes = {"P": inst.constants["e1"], "Q": inst.constants["e2"]}
    elif inst.family == "B":
        slopes = {"P": inst.constants["B"], "Q": inst.constants["m1"],
                  "R": inst.constants["m2"]}
    else:
        return {}
    out = {}
    for label, P in inst.points:
        if inst.family == "A" and label == "P1":
            continue
        c = slopes.get(label[0])
        if c is not None:
            out[label] = P.y + c * P.x
    return out


# ---------------------------------------------------------------------------
# Serialization


def _rat_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else \
        f"{v.numerator}/{v.denominator}"


def curve_to_json(curve: WeierstrassCurve) -> dict:
    return {"a": [_rat_str(a) for a in curve.a_invariants()]}


def curve_from_json(obj: dict) -> WeierstrassCurve:
    a = [Fraction(v) for v in obj["a"]]
    if len(a) != 5:
        raise DomainError("curve JSON needs exactly 5 a-invariants")
    return WeierstrassCurve(*a)


def instance_to_json(inst: FamilyInstance) -> dict:
    return {
        "family": inst.family,
        "params": [_rat_str(v) for v in inst.params],
        "set": tr.triple_set_to_json(inst.tset),
        "constants": {k: _rat_str(v) for k, v in inst.constants.items()},
        "curve": curve_to_json(inst.curve),
        "points": [{"label": lab, "x": _rat_str(P.x), "y": _rat_str(P.y)}
                   for lab, P in inst.points],
    }


def build_instance(family: str, params: Sequence[Rat]) -> FamilyInstance:
    """Dispatch on family tag; arity A:6, B:5, C:2."""
    family = family.upper()
    builders = {"A": (build_family_A, 6), "B": (build_family_B, 5),
                "C": (build_family_C, 2)}
    if family not in builders:
        raise DomainError(f"unknown family {family!r}")
    fn, arity = builders[family]
    if len(params) != arity:
        raise DomainError(f"family {family} takes {arity} parameters, "
                          f"got {len(params)}")
    if family in ("A", "B"):
        head = [int(v) for v in params[:arity - (1 if family == 'A' else 2)]]
        rest = [Fraction(v) for v in params[len(head):]]
        for orig, conv in zip(params[:len(head)], head):
            if Fraction(orig) != conv:
                raise DomainError("triple-set parameters must be integers")
        return fn(*head, *rest)
    return fn(*params)


def dumps_instance(inst: FamilyInstance) -> str:
    return json.dumps(instance_to_json(inst), indent=2)
