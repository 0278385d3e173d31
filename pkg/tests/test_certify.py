import json
import math

import pytest

from grushin_ricci.certify import (
    REGISTRY,
    certify_claim,
    certify_theorem,
    point_eval,
    registry_report,
)
from grushin_ricci.params import HALF_PI, DomainError, WarpParams
from grushin_ricci.report import to_json

P182 = WarpParams(1.0, 8, 2)


def test_registry_ids_stable():
    assert list(REGISTRY) == ["C1", "C2", "C2'", "C3", "C4", "C5", "C5a", "C5b", "C6", "C7", "C8", "C9", "C10"]


def test_c3_verified():
    c = certify_claim("C3", P182)
    assert c.status == "verified" and c.min_enclosure.lo >= 0.5


def test_c2_refuted_at_right_end():
    c = certify_claim("C2", P182)
    assert c.status == "refuted"
    assert c.witness_r == pytest.approx(HALF_PI, abs=1e-6)
    assert c.point_value == pytest.approx(0.75, abs=1e-6)
    assert point_eval("neg_fpp_over_f", HALF_PI, 1.0, 8, 2) == 0.75


def test_c4_refuted_at_lambda_2():
    c = certify_claim("C4", WarpParams(2.0, 8, 2))
    assert c.status == "refuted"
    assert c.witness_r == pytest.approx(HALF_PI, abs=1e-6)
    assert c.point_value == pytest.approx(-1.25, abs=1e-6)
    assert c.bound == pytest.approx(-1.0, abs=1e-6)


def test_c10_verified_lambda_10():
    c = certify_claim("C10", WarpParams(10.0, 8, 2))
    assert c.status == "verified" and c.min_enclosure.lo >= 1.0
    assert c.max_depth <= 48


def test_theorem_summary():
    s = certify_theorem(2, 8, [1, 2, 5, 10, 100])
    assert s.verified and len(s.certificates) == 5
    s = certify_theorem(3, 16, [1, 10])
    assert s.verified
    # m = 1 still clears the bound at lam = 1 (minimum 3/2) and fails at lam = 2
    assert certify_theorem(2, 1, [1.0]).verified
    bad = certify_theorem(2, 1, [2.0])
    assert not bad.verified and bad.certificates[0].status == "refuted"


def test_refutations_are_valid():
    certs = registry_report(2, 8, [1.0, 2.0, 10.0]) + registry_report(2, 1, [2.0, 5.0])
    refuted = [c for c in certs if c.status == "refuted"]
    assert refuted
    for c in refuted:
        p = c.params
        claim = REGISTRY[c.claim_id]
        cond = next(k for k in claim.conditions if k.lhs == c.condition)
        value = point_eval(cond.lhs, c.witness_r, p.lam, p.m, p.n)
        bound = cond.bound_at(c.witness_r, p.lam, p.m, p.n)
        assert value == c.point_value and bound == c.bound
        assert value < bound
        err = 16 * math.ulp(max(abs(value), abs(bound), 1.0))
        assert bound - value > 10 * err


@pytest.mark.parametrize("n, m", [(2, 8), (3, 16), (4, 24), (2, 20)])
@pytest.mark.parametrize("lam", [1.0, 1.5, 3.0, 30.0])
def test_c5_always_decided(n, m, lam):
    for cid in ("C5", "C5a", "C5b"):
        c = certify_claim(cid, WarpParams(lam, m, n), max_depth=40)
        assert c.status == "verified", (cid, c.status)


def test_registry_statuses():
    by_id = {c.claim_id: c.status for c in registry_report(2, 8, [1.0])}
    assert by_id["C1"] == "verified" and by_id["C5"] == "verified" and by_id["C2"] == "refuted"
    by_id = {c.claim_id: c.status for c in registry_report(2, 8, [2.0])}
    assert by_id["C4"] == "refuted" and by_id["C8"] == "verified"


def test_guard_enforced():
    with pytest.raises(DomainError):
        certify_claim("C10", WarpParams(1.0, 1, 2))
    with pytest.raises(DomainError):
        certify_claim("C99", P182)


def test_inconclusive_on_tiny_budget():
    c = certify_claim("C10", WarpParams(100.0, 8, 2), max_depth=2)
    assert c.status == "inconclusive"


def test_certificate_schema_and_round_trip():
    d = certify_claim("C2", P182).to_dict(timing=False)
    assert list(d) == ["claim", "lambda", "m", "n", "status", "witness", "min_lo", "min_hi", "boxes", "depth", "wall_ms"]
    assert d["wall_ms"] is None
    assert json.loads(to_json(d)) == d
    assert certify_claim("C3", P182).to_dict(timing=True)["wall_ms"] >= 0


@pytest.mark.parametrize("workers", [2, 8])
def test_determinism_across_workers(workers):
    lams = [1.0, 2.0, 10.0]
    base = to_json([c.to_dict(timing=False) for c in registry_report(2, 8, lams, workers=1)])
    other = to_json([c.to_dict(timing=False) for c in registry_report(2, 8, lams, workers=workers)])
    assert base == other
