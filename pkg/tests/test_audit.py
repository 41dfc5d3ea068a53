import csv
import io
import json

import pytest

from psmra.audit import CHECK_IDS, audit, coalitions, select_checks


def test_check_ids_unique():
    assert len(set(CHECK_IDS)) == len(CHECK_IDS) == 14


def test_select_checks():
    assert select_checks("all") == list(CHECK_IDS)
    assert select_checks(None) == list(CHECK_IDS)
    assert select_checks("C-3.7-*") == ["C-3.7-PI-A", "C-3.7-PI-B", "C-3.7-PS-A", "C-3.7-PS-B"]
    assert select_checks("C-3.4, C-3.2-ET") == ["C-3.2-ET", "C-3.4"]
    with pytest.raises(ValueError):
        select_checks("C-9.9")
    with pytest.raises(ValueError):
        select_checks("X-*")


def test_coalitions(small, mid):
    assert coalitions(small) == [((2,), 1)]
    assert coalitions(mid) == [((2,), 1), ((2, 3), 1)]


def test_subset_audit(small):
    rep = audit(small, "C-3.2-*")
    assert rep.checks["C-3.2-ET"].status == "ok"
    assert rep.checks["C-3.2-ET"].actual == 256
    assert rep.checks["C-3.2-ER"].actual == 16
    assert rep.checks["C-3.2-S"].status == "recorded"
    assert rep.checks["C-3.2-S"].actual == 336
    assert rep.checks["C-3.4"].status == "skipped"
    assert rep.exit_code == 0
    doc = rep.to_json()
    assert doc["format"] == 1
    assert [c["id"] for c in doc["checks"]] == list(CHECK_IDS)
    skipped = [c for c in doc["checks"] if c["status"] == "skipped"]
    assert skipped and all(c["pass"] is None for c in skipped)


def test_budget_overrun_is_recorded(small):
    rep = audit(small, "C-3.7-PS-B,C-3.2-ET", budget=5000)
    rec = rep.checks["C-3.7-PS-B"]
    assert rec.status == "budget"
    assert rec.passed is None
    assert rec.details["limit"] == 5000
    assert rep.over_budget == ["C-3.7-PS-B"]
    assert rep.exit_code == 5


def test_full_report_small(small_report):
    rep = small_report
    assert rep.mismatches == ["C-3.3-ETINM", "C-3.3-M", "C-3.5-1", "C-3.7-PS-B"]
    assert rep.exit_code == 4
    assert rep.checks["C-3.1-ROUNDTRIP"].actual == 336 * 256
    assert rep.checks["C-3.3-M"].actual == 4032
    assert rep.sizes["M"] == 4032
    assert rep.remarks[0]["reachable"] is False
    ps = [p for p in rep.probabilities if p["attack"] == "substitution" and p["model"] == "B"]
    assert ps[0]["scope"] == "all"
    assert str(ps[0]["value"]) == "1/4"


def test_report_serialization_is_stable(small_report):
    text = small_report.dumps()
    assert text == small_report.dumps()
    doc = json.loads(text)
    assert json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n" == text
    rows = list(csv.reader(io.StringIO(small_report.to_csv())))
    assert rows[0][:3] == ["id", "status", "pass"]
    assert [r[0] for r in rows[1:]] == list(CHECK_IDS)
    status = {r[0]: r[1] for r in rows[1:]}
    assert status["C-3.3-M"] == "mismatch"
    assert status["C-3.2-S"] == "recorded"
