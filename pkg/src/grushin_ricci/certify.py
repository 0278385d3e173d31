"""Interval branch-and-bound certification of the curvature inequalities.

Each registered claim is a list of conditions ``lhs(r) - est(r) >= threshold``
over an r-range, at a fixed point parameter lambda.  A box of r values is

* accepted when the interval enclosure of the margin clears the threshold
  strictly, or when the margin is monotone on the box (derivative enclosure
  of one sign) and the relevant end evaluates above the threshold; an exact
  zero-width end value equal to the threshold is also accepted,
* refuted when a double-precision sample falls below the threshold and a
  zero-width interval evaluation at that point confirms it,
* split at its midpoint otherwise, lower half first.

Derivatives are taken with respect to t = sin^2 r, which is increasing in r.
The float ``HALF_PI`` is treated as the exact right end pi/2.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import forms
from .interval import IJet, Interval, cos_box, sin_box
from .params import HALF_PI, DomainError, WarpParams, check_lambda, sincos

QUARTER_PI = math.pi / 4


def _fprime(t, c2, c, l2, m, n):
    return forms.fprime(t, c, l2)


EXPRESSIONS: dict[str, Callable] = {
    "A": lambda t, c2, c, l2, m, n: forms.aux_A(t, c2, l2),
    "B": lambda t, c2, c, l2, m, n: forms.aux_B(t, l2),
    "fprime": _fprime,
    "one_minus_fprime": lambda *a: 1 - _fprime(*a),
    "neg_fpp_over_f": lambda t, c2, c, l2, m, n: forms.neg_fpp_over_f(t, l2),
    "neg_fphp_over_fh": lambda t, c2, c, l2, m, n: forms.neg_fphp_over_fh(t, c2, l2),
    "neg_hpp_over_h": lambda t, c2, c, l2, m, n: forms.neg_hpp_over_h(t, c2, l2),
    "one_minus_hp2_over_h2": lambda t, c2, c, l2, m, n: forms.one_minus_hp2_over_h2(t, c2, l2),
    "one_minus_fp2_over_f2": lambda t, c2, c, l2, m, n: forms.one_minus_fp2_over_f2(t, l2),
    "hpp_estimate": lambda t, c2, c, l2, m, n: forms.hpp_ratio_estimate(t, c2, l2),
    "hp2_estimate": lambda t, c2, c, l2, m, n: forms.hp2_ratio_estimate(t, c2, l2),
    "hp2_estimate_gap": lambda t, c2, c, l2, m, n: forms.hp2_estimate_gap(t, c2, l2),
    "term_I": lambda t, c2, c, l2, m, n: forms.term_I(t, l2, m, n),
    "term_I_est_upper_range": lambda t, c2, c, l2, m, n: forms.term_I_lower_upper_range(t, l2, m, n),
    "term_I_est_lower_range": lambda t, c2, c, l2, m, n: forms.term_I_lower_lower_range(t, c2, l2, m, n),
    "ric_hh": lambda t, c2, c, l2, m, n: forms.ric_hh(t, c2, l2, m, n),
    "ric_uu": lambda t, c2, c, l2, m, n: forms.ric_uu(t, c2, l2, m, n),
    "ric_vv": lambda t, c2, c, l2, m, n: forms.ric_vv(t, c2, l2, m, n),
}


# -- evaluation contexts ---------------------------------------------------

def _box_args(a: float, b: float, lam: float):
    S = sin_box(a, b)
    C = cos_box(a, b)
    T = S.sqr()
    C2 = C.sqr()
    T = T.intersect(Interval(0.0, 1.0))
    try:
        T = T.intersect(1 - C2)
        C2 = C2.intersect(1 - T)
    except ValueError:  # pragma: no cover - enclosures always overlap
        pass
    L = Interval(lam)
    return T, C2, C, L * L


def interval_eval(expression_id: str, r_box: Interval, lam: float, m: int, n: int,
                  pieces_depth: int = 6) -> Interval:
    """Sound enclosure of an expression's range over ``r_box`` within [0, pi/2].

    The box is bisected up to ``pieces_depth`` times; a piece on which the
    derivative enclosure has one sign contributes the hull of its end values,
    other pieces their plain enclosure.
    """
    try:
        fn = EXPRESSIONS[expression_id]
    except KeyError:
        raise DomainError(f"unsupported expression id {expression_id!r}") from None
    if not (0.0 <= r_box.lo and r_box.hi <= HALF_PI):
        raise DomainError(f"box {r_box!r} not inside [0, pi/2]")
    lam = check_lambda(lam)

    def point(r):
        return fn(*_box_args(r, r, lam), m, n)

    def piece(a, b, depth):
        plain = fn(*_box_args(a, b, lam), m, n)
        if a == b:
            return plain
        d = _jet_eval(fn, a, b, lam, m, n).d
        if d.lo >= 0.0 or d.hi <= 0.0:
            ends = point(a).hull(point(b))
            return Interval(max(ends.lo, plain.lo), min(ends.hi, plain.hi))
        mid = 0.5 * a + 0.5 * b
        if depth >= pieces_depth or not (a < mid < b):
            return plain
        return piece(a, mid, depth + 1).hull(piece(mid, b, depth + 1))

    return piece(r_box.lo, r_box.hi, 0)


def _jet_eval(fn, a: float, b: float, lam: float, m: int, n: int) -> IJet:
    T, C2, C, L2 = _box_args(a, b, lam)
    t = IJet(T, Interval(1.0))
    c2 = IJet(C2, Interval(-1.0))
    c = IJet(C, Interval(-1.0) / (2 * C))
    return fn(t, c2, c, IJet.const(L2), m, n)


def point_eval(expression_id: str, r: float, lam: float, m: int, n: int) -> float:
    """Plain double-precision evaluation of a registered expression."""
    s, c = sincos(r)
    return EXPRESSIONS[expression_id](s * s, c * c, c, lam * lam, m, n)


# -- claims ----------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    """``lhs - estimate >= threshold`` where ``estimate`` may depend on r.

    ``margin`` names an algebraically identical expression for ``lhs - estimate``
    that the interval engine encloses instead; witnesses still use ``lhs``.
    """

    lhs: str
    threshold: float
    estimate: str | None = None
    margin: str | None = None

    def margin_fn(self):
        if self.margin is not None:
            return EXPRESSIONS[self.margin]
        lhs = EXPRESSIONS[self.lhs]
        if self.estimate is None:
            return lhs
        est = EXPRESSIONS[self.estimate]
        return lambda *a: lhs(*a) - est(*a)

    def bound_at(self, r, lam, m, n) -> float:
        if self.estimate is None:
            return self.threshold
        return self.threshold + point_eval(self.estimate, r, lam, m, n)


def _always(p: WarpParams) -> bool:
    return True


def _m_ge_8n(p: WarpParams) -> bool:
    return p.m >= 8 * (p.n - 1)


def _m_ge_4n(p: WarpParams) -> bool:
    return p.m >= 4 * p.n


@dataclass(frozen=True)
class Claim:
    id: str
    description: str
    conditions: tuple[Condition, ...]
    domain: tuple[float, float] = (0.0, HALF_PI)
    guard: Callable[[WarpParams], bool] = _always
    guard_text: str = "lambda >= 1"


REGISTRY: dict[str, Claim] = {
    c.id: c
    for c in [
        Claim("C1", "0 <= f' <= 1", (Condition("fprime", 0.0), Condition("one_minus_fprime", 0.0))),
        Claim("C2", "-f''/f >= 1", (Condition("neg_fpp_over_f", 1.0),)),
        Claim("C2'", "-f''/f >= 1/2", (Condition("neg_fpp_over_f", 0.5),)),
        Claim("C3", "-f'h'/(fh) >= 1/2", (Condition("neg_fphp_over_fh", 0.5),)),
        Claim("C4", "-h''/h >= 1 - 2 lam^4 sin^2 r / A^2",
              (Condition("neg_hpp_over_h", 0.0, "hpp_estimate"),)),
        Claim("C5", "I >= 0", (Condition("term_I", 0.0),), guard=_m_ge_8n, guard_text="m >= 8(n-1)"),
        Claim("C5a", "I >= estimate >= 0 on [pi/4, pi/2]",
              (Condition("term_I", 0.0, "term_I_est_upper_range"), Condition("term_I_est_upper_range", 0.0)),
              domain=(QUARTER_PI, HALF_PI), guard=_m_ge_8n, guard_text="m >= 8(n-1)"),
        Claim("C5b", "I >= estimate >= 0 on [0, pi/4]",
              (Condition("term_I", 0.0, "term_I_est_lower_range"), Condition("term_I_est_lower_range", 0.0)),
              domain=(0.0, QUARTER_PI), guard=_m_ge_8n, guard_text="m >= 8(n-1)"),
        Claim("C6", "(1 - h'^2)/h^2 >= -lam^4 sin^2 r (sin^2 r + 1)/A^2",
              (Condition("one_minus_hp2_over_h2", 0.0, "hp2_estimate", margin="hp2_estimate_gap"),)),
        Claim("C7", "Ric(V,V) >= 1", (Condition("ric_vv", 1.0),), guard=_m_ge_4n, guard_text="m >= 4n"),
        Claim("C8", "Ric(H,H) >= 1", (Condition("ric_hh", 1.0),), guard=_m_ge_8n, guard_text="m >= 8(n-1)"),
        Claim("C9", "Ric(U,U) >= 1", (Condition("ric_uu", 1.0),)),
        Claim("C10", "Ric >= 1 in all three directions",
              (Condition("ric_hh", 1.0), Condition("ric_uu", 1.0), Condition("ric_vv", 1.0)),
              guard=_m_ge_8n, guard_text="m >= 8(n-1)"),
    ]
}


# -- certificates ----------------------------------------------------------

@dataclass
class Certificate:
    claim_id: str
    params: WarpParams
    status: str  # "verified" | "refuted" | "inconclusive"
    boxes_processed: int
    min_enclosure: Interval
    max_depth: int
    witness_r: float | None = None
    point_value: float | None = None
    bound: float | None = None
    condition: str | None = None
    wall_ms: float = field(default=0.0, compare=False)

    def to_dict(self, timing: bool = True) -> dict:
        witness = None
        if self.status == "refuted":
            witness = {"r": self.witness_r, "value": self.point_value,
                       "bound": self.bound, "condition": self.condition}
        return {
            "claim": self.claim_id,
            "lambda": self.params.lam,
            "m": self.params.m,
            "n": self.params.n,
            "status": self.status,
            "witness": witness,
            "min_lo": self.min_enclosure.lo,
            "min_hi": self.min_enclosure.hi,
            "boxes": self.boxes_processed,
            "depth": self.max_depth,
            "wall_ms": round(self.wall_ms, 3) if timing else None,
        }


@dataclass
class _Outcome:
    status: str
    boxes: int = 0
    depth: int = 0
    worst: Interval | None = None  # enclosure with the smallest lo - threshold
    witness: tuple[float, float, float] | None = None  # r, lhs value, bound


def _refine_witness(cond: Condition, lo: float, hi: float, lam, m, n, seed_r: float):
    """Most violating double-precision point near the claim's minimum."""
    def margin(r):
        return point_eval(cond.lhs, r, lam, m, n) - cond.bound_at(r, lam, m, n)

    grid = np.linspace(lo, hi, 1025)
    grid[0], grid[-1] = lo, hi
    vals = [margin(float(r)) for r in grid]
    k = int(np.argmin(vals))
    cands = [(vals[k], float(grid[k])), (margin(seed_r), seed_r)]
    a, b = float(grid[max(k - 1, 0)]), float(grid[min(k + 1, len(grid) - 1)])
    if b > a:
        res = minimize_scalar(margin, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        cands.append((float(res.fun), float(res.x)))
    cands.sort()
    return cands


def _confirm(cond: Condition, fn, r: float, lam, m, n):
    """Rigorous check that r violates the condition; returns (lhs, bound) or None."""
    value = point_eval(cond.lhs, r, lam, m, n)
    bound = cond.bound_at(r, lam, m, n)
    enc = fn(*_box_args(r, r, lam), m, n)
    err = max(enc.width, 4 * math.ulp(max(abs(value), abs(bound), 1.0)))
    if enc.hi < cond.threshold and (bound - value) > 10 * err:
        return value, bound, enc
    return None


def _run_condition(cond: Condition, domain, lam, m, n, max_depth, min_width, max_boxes) -> _Outcome:
    fn = cond.margin_fn()
    thr = cond.threshold
    out = _Outcome("verified")
    stack = [(domain[0], domain[1], 0)]
    exhausted = False

    def note(enc: Interval):
        if out.worst is None or enc.lo < out.worst.lo:
            out.worst = enc

    while stack:
        a, b, depth = stack.pop()
        out.boxes += 1
        out.depth = max(out.depth, depth)
        enc = fn(*_box_args(a, b, lam), m, n)
        if enc.lo > thr:
            note(enc)
            continue
        jet = _jet_eval(fn, a, b, lam, m, n)
        end = a if jet.d.lo >= 0.0 else b if jet.d.hi <= 0.0 else None
        if end is not None:
            pt = fn(*_box_args(end, end, lam), m, n)
            if pt.lo > thr or (pt.lo == thr and pt.width == 0.0):
                note(Interval(pt.lo, max(pt.hi, jet.v.hi)))
                continue
        mid = 0.5 * a + 0.5 * b
        for r in (mid, end) if end is not None else (mid,):
            if point_eval(cond.lhs, r, lam, m, n) < cond.bound_at(r, lam, m, n):
                for _, rr in _refine_witness(cond, domain[0], domain[1], lam, m, n, r):
                    hit = _confirm(cond, fn, rr, lam, m, n)
                    if hit is not None:
                        out.status = "refuted"
                        out.witness = (rr, hit[0], hit[1])
                        out.worst = hit[2]
                        return out
        if depth >= max_depth or (b - a) <= min_width or out.boxes >= max_boxes or not (a < mid < b):
            exhausted = True
            note(enc)
            continue
        stack.append((mid, b, depth + 1))
        stack.append((a, mid, depth + 1))
    if exhausted:
        out.status = "inconclusive"
    return out


def certify_claim(
    claim_id: str,
    params: WarpParams,
    max_depth: int = 48,
    min_width: float = 1e-14,
    max_boxes: int = 200_000,
    check_guard: bool = True,
) -> Certificate:
    """Decide one registered claim at the point parameters ``params``."""
    try:
        claim = REGISTRY[claim_id]
    except KeyError:
        raise DomainError(f"unknown claim {claim_id!r}; known: {', '.join(REGISTRY)}") from None
    if check_guard and not claim.guard(params):
        raise DomainError(f"{claim_id} requires {claim.guard_text}; got m={params.m}, n={params.n}")
    start = time.perf_counter()
    lam, m, n = params.lam, params.m, params.n
    outcomes = [
        (cond, _run_condition(cond, claim.domain, lam, m, n, max_depth, min_width, max_boxes))
        for cond in claim.conditions
    ]
    boxes = sum(o.boxes for _, o in outcomes)
    depth = max(o.depth for _, o in outcomes)
    refuted = [(c, o) for c, o in outcomes if o.status == "refuted"]
    if refuted:
        cond, o = refuted[0]
        status = "refuted"
    else:
        status = "inconclusive" if any(o.status == "inconclusive" for _, o in outcomes) else "verified"
        cond, o = min(outcomes, key=lambda co: co[1].worst.lo - co[0].threshold)
    cert = Certificate(
        claim_id=claim_id, params=params, status=status, boxes_processed=boxes,
        min_enclosure=o.worst, max_depth=depth, condition=cond.lhs,
        wall_ms=(time.perf_counter() - start) * 1e3,
    )
    if status == "refuted":
        cert.witness_r, cert.point_value, cert.bound = o.witness
    else:
        cert.condition = None
    return cert


def _certify_job(args):
    claim_id, lam, m, n, max_depth, check_guard = args
    return certify_claim(claim_id, WarpParams(lam, m, n), max_depth=max_depth, check_guard=check_guard)


def _map(jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [_certify_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_certify_job, jobs))


@dataclass
class TheoremSummary:
    n: int
    m: int
    certificates: list[Certificate]

    @property
    def verified(self) -> bool:
        return all(c.status == "verified" for c in self.certificates)


def certify_theorem(n: int, m: int, lambda_list, max_depth: int = 48, workers: int = 1) -> TheoremSummary:
    """Certificates of Ric >= 1 (claim C10) for each lambda in ``lambda_list``."""
    jobs = [("C10", float(lam), m, n, max_depth, False) for lam in lambda_list]
    return TheoremSummary(n, m, _map(jobs, workers))


def registry_report(n: int, m: int, lambda_list, claims=None, max_depth: int = 48,
                    workers: int = 1) -> list[Certificate]:
    """Status of every registered claim at every lambda (guards not enforced)."""
    ids = list(REGISTRY) if claims is None else list(claims)
    jobs = [(cid, float(lam), m, n, max_depth, False) for lam in lambda_list for cid in ids]
    return _map(jobs, workers)
