"""Triple sets with a common sum and a common product.

A TripleSet holds l triples of nonzero integers sharing elementary symmetric
values e1 = M and e3 = N; the middle symmetric values T_j = e2(triple j) are
what the curve constructions feed on. Generators for the three parametrized
families live here; the curves built on top of them live in families.py.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSet, DomainError

Triple = tuple[int, int, int]


@dataclass(frozen=True)
class TripleSet:
    l: int
    M: int
    N: int
    T: tuple[int, ...]
    triples: tuple[Triple, ...]

    def __post_init__(self):
        if self.l != len(self.triples) or self.l != len(self.T):
            raise DegenerateSet("l must equal the number of triples")


def make_triple_set(triples: Sequence[Sequence[int]]) -> TripleSet:
    """Validate raw triples and package them with their invariants."""
    tl = tuple(tuple(int(v) for v in t) for t in triples)
    verdict = validate_raw(tl)
    if not verdict.ok:
        raise DegenerateSet("; ".join(verdict.failures))
    M = sum(tl[0])
    N = tl[0][0] * tl[0][1] * tl[0][2]
    T = tuple(a * b + b * c + a * c for a, b, c in tl)
    return TripleSet(len(tl), M, N, T, tl)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    failures: tuple[str, ...] = ()


def validate_raw(triples: Sequence[Sequence[int]]) -> Verdict:
    """Check nonzero parts, equal sums, equal products. Names each failure."""
    fails = []
    if len(triples) < 1:
        fails.append("need at least one triple")
        return Verdict(False, tuple(fails))
    for i, t in enumerate(triples):
        if len(t) != 3:
            fails.append(f"triple {i} does not have 3 parts")
            return Verdict(False, tuple(fails))
        if any(v == 0 for v in t):
            fails.append(f"triple {i} has a zero part")
    M = sum(triples[0])
    N = math.prod(triples[0])
    for i, t in enumerate(triples[1:], start=1):
        if sum(t) != M:
            fails.append(f"sum of triple {i} is {sum(t)}, expected {M}")
        if math.prod(t) != N:
            fails.append(f"product of triple {i} is {math.prod(t)}, "
                         f"expected {N}")
    return Verdict(not fails, tuple(fails))


def validate_set(ts: TripleSet) -> Verdict:
    """Re-check a TripleSet against its own stored invariants."""
    verdict = validate_raw(ts.triples)
    fails = list(verdict.failures)
    if verdict.ok:
        if ts.M != sum(ts.triples[0]):
            fails.append(f"stored M = {ts.M} mismatches triples")
        if ts.N != math.prod(ts.triples[0]):
            fails.append(f"stored N = {ts.N} mismatches triples")
        for j, t in enumerate(ts.triples):
            e2 = t[0] * t[1] + t[1] * t[2] + t[0] * t[2]
            if ts.T[j] != e2:
                fails.append(f"stored T[{j}] = {ts.T[j]}, expected {e2}")
    return Verdict(not fails, tuple(fails))


# ---------------------------------------------------------------------------
# Family generators


def gen_A(p: int, q: int, r: int, s: int, t: int) -> TripleSet:
    """Two triples sharing sum and product.

    Parts: (p(s+rt), q(s+pt), r(s+qt)) and (q(s+rt), r(s+pt), p(s+qt)).
    """
    a = (p * (s + r * t), q * (s + p * t), r * (s + q * t))
    b = (q * (s + r * t), r * (s + p * t), p * (s + q * t))
    if any(v == 0 for v in a + b):
        raise DegenerateSet(f"zero part in gen_A({p},{q},{r},{s},{t})")
    return make_triple_set([a, b])


def gen_B(p: int, q: int, r: int) -> TripleSet:
    """Three triples sharing sum and product."""
    s = p * q * r * (r - p) + p * p - p - r + 1
    w = q * (r * r - p - r + 1) + p - r
    z = p * q * r * (q * r - q - 1) + p + q - 1
    t1 = (p * q * r * w, s, z)
    t2 = (w, q * r * s, p * z)
    t3 = (p * w, q * s, r * z)
    if any(v == 0 for v in t1 + t2 + t3):
        raise DegenerateSet(f"zero part in gen_B({p},{q},{r})")
    return make_triple_set([t1, t2, t3])


def _c_polynomials(q: Fraction, s: Fraction) -> tuple[Fraction, ...]:
    t1 = q**2 * s**2 - 2 * q**2 * s + q * s + q - 1
    t2 = (q**2 * s**2 - 2 * q**2 * s + q * s**2 - q * s + s**2 + q - s)
    t3 = (q**3 * s**3 - q**2 * s**4 - 4 * q**3 * s**2 + 5 * q**2 * s**3
          - q * s**4 + 4 * q**3 * s - 6 * q**2 * s**2 + 2 * q * s**3
          - s**4 + q**2 * s + 2 * s**3 - 2 * q**2 + q * s - 2 * s**2 + q)
    t4 = (-q**2 * s**5 + q**3 * s**3 + 4 * q**2 * s**4 - 4 * q**3 * s**2
          - 4 * q**2 * s**3 - 2 * q * s**4 + 4 * q**3 * s + q**2 * s**2
          + 4 * q * s**3 - q**2 * s - s**3 - 2 * q**2 - q * s + s**2
          + 2 * q - s)
    t5 = (q**2 * s**7 + q**4 * s**4 - 3 * q**3 * s**5 - 4 * q**2 * s**6
          + q * s**7 - 4 * q**4 * s**3 + 15 * q**3 * s**4 - q * s**6
          + 4 * q**4 * s**2 - 22 * q**3 * s**3 + 12 * q**2 * s**4
          - 5 * q * s**5 + 2 * s**6 + 10 * q**3 * s**2 - 12 * q**2 * s**3
          + 7 * q * s**4 - 4 * s**5 - 4 * q**3 * s + 12 * q**2 * s**2
          - 7 * q * s**3 + 4 * s**4 - 4 * q**2 * s + q * s**2 - s**3 + q**2)
    return t1, t2, t3, t4, t5


def gen_C_parts(q, s) -> tuple[tuple[Fraction, Fraction, Fraction], ...]:
    """The four raw part-triples of the l=4 family, before scaling."""
    q = Fraction(q)
    s = Fraction(s)
    t1, t2, t3, t4, t5 = _c_polynomials(q, s)
    a = ((s - 1) * t1 * t2 * t3, s * q * (1 - s) * t1 * t5,
         (s * s - q) * t1 * t1 * t4)
    b = ((s - 1) * q * t1 * t2 * t3, -(t1 * t1) * t5,
         (s - 1) * s * (s * s - q) * t1 * t4)
    c = ((1 - s) * t1 * t5, (s - 1) * q * t1 * t2 * t4,
         s * (s * s - q) * t1 * t1 * t3)
    d = ((1 - s) * q * t1 * t5, (s - 1) * s * t1 * t2 * t4,
         (s * s - q) * t1 * t1 * t3)
    return a, b, c, d


def gen_C(q, s) -> TripleSet:
    """Four triples sharing sum and product, from a two-parameter family.

    Integer-valued parts are emitted exactly as the polynomials produce
    them. Rational parts are scaled by the least positive rational making
    the set primitive integral (scaling by u sends M -> uM, N -> u^3 N and
    preserves validity).
    """
    raw = gen_C_parts(q, s)
    flat = [v for tri in raw for v in tri]
    if any(v == 0 for v in flat):
        raise DegenerateSet(f"zero part in gen_C({q},{s})")
    if all(v.denominator == 1 for v in flat):
        scale = Fraction(1)
    else:
        lcm = math.lcm(*(v.denominator for v in flat))
        g = math.gcd(*(int(v * lcm) for v in flat))
        scale = Fraction(lcm, g)
    scaled = [[int(v * scale) for v in tri] for tri in raw]
    return make_triple_set(scaled)


# ---------------------------------------------------------------------------
# Direct search


def _search_chunk(M: int, a_lo: int, a_hi: int):
    """(N, a, b) arrays for positive a<=b<=c, a+b+c=M, a in [a_lo, a_hi)."""
    ns, as_, bs = [], [], []
    for a in range(a_lo, a_hi):
        b = np.arange(a, (M - a) // 2 + 1, dtype=np.int64)
        if len(b) == 0:
            continue
        c = M - a - b
        ns.append(a * b * c)
        as_.append(np.full(len(b), a, dtype=np.int64))
        bs.append(b)
    if not ns:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty
    return np.concatenate(ns), np.concatenate(as_), np.concatenate(bs)


def direct_search(M: int, min_multiplicity: int = 2,
                  require_positive: bool = True,
                  abs_bound: int | None = None,
                  workers: int | None = None
                  ) -> list[tuple[int, list[Triple]]]:
    """Group unordered triples with sum M by product.

    Returns [(N, [triples])...] for products hit by at least
    min_multiplicity triples, N ascending, triples sorted. With
    require_positive=False an explicit abs_bound on |part| is required
    since the solution set is otherwise infinite; parts stay nonzero.
    """
    if min_multiplicity < 1:
        raise DomainError("min_multiplicity must be >= 1")
    if require_positive:
        if M < 3:
            return []
        a_max = M // 3
        if workers and workers > 1:
            bounds = np.linspace(1, a_max + 1, workers + 1, dtype=int)
            chunks = [_search_chunk(M, int(lo), int(hi))
                      for lo, hi in zip(bounds[:-1], bounds[1:])]
            ns = np.concatenate([c[0] for c in chunks])
            aa = np.concatenate([c[1] for c in chunks])
            bb = np.concatenate([c[2] for c in chunks])
        else:
            ns, aa, bb = _search_chunk(M, 1, a_max + 1)
    else:
        if abs_bound is None:
            raise DomainError("abs_bound is required when positivity is off")
        ns_l, aa_l, bb_l = [], [], []
        for a in range(-abs_bound, abs_bound + 1):
            if a == 0:
                continue
            for b in range(max(a, M - a - abs_bound), abs_bound + 1):
                c = M - a - b
                if b == 0 or c == 0 or c < b or abs(c) > abs_bound:
                    continue
                ns_l.append(a * b * c)
                aa_l.append(a)
                bb_l.append(b)
        ns = np.array(ns_l, dtype=np.int64)
        aa = np.array(aa_l, dtype=np.int64)
        bb = np.array(bb_l, dtype=np.int64)

    if len(ns) == 0:
        return []
    order = np.lexsort((bb, aa, ns))
    ns, aa, bb = ns[order], aa[order], bb[order]
    out: list[tuple[int, list[Triple]]] = []
    start = 0
    for end in range(1, len(ns) + 1):
        if end == len(ns) or ns[end] != ns[start]:
            if end - start >= min_multiplicity:
                group = [(int(aa[i]), int(bb[i]),
                          int(M - aa[i] - bb[i])) for i in range(start, end)]
                out.append((int(ns[start]), group))
            start = end
    return out


# ---------------------------------------------------------------------------
# Serialization


def triple_set_to_json(ts: TripleSet) -> dict:
    return {
        "l": ts.l,
        "M": str(ts.M),
        "N": str(ts.N),
        "T": [str(t) for t in ts.T],
        "triples": [[str(v) for v in t] for t in ts.triples],
    }


def triple_set_from_json(obj: dict) -> TripleSet:
    ts = make_triple_set([[int(v) for v in t] for t in obj["triples"]])
    declared = (int(obj["l"]), int(obj["M"]), int(obj["N"]),
                tuple(int(t) for t in obj["T"]))
    if declared != (ts.l, ts.M, ts.N, ts.T):
        raise DegenerateSet("declared l/M/N/T disagree with the triples")
    return ts


def dumps_triple_set(ts: TripleSet) -> str:
    return json.dumps(triple_set_to_json(ts), indent=2)


def loads_triple_set(text: str) -> TripleSet:
    return triple_set_from_json(json.loads(text))
