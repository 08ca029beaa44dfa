import json

import numpy as np
import pytest

from conftoda import report, toda
from conftoda.errors import DomainError
from conftoda.report import CSV_FIELDS, CheckRecord, Report, SuiteConfig, run_suite

ORACLE = {"type": "oracle", "a": 0.3, "b": 1.2, "c": 0.24}
FAST = ["grunsky-symmetry", "faber", "moments-oracle", "jump", "tau-closed-form", "rh", "sigma"]


@pytest.mark.parametrize(
    "kw",
    [
        {"order": 40, "grid": 256},
        {"tolerances": {"jump": 0.0}},
        {"global_tol": -1.0},
        {"checks": ["nope"]},
        {"fmt": "xml"},
        {"lax_flows": [0]},
    ],
)
def test_config_validation(kw):
    with pytest.raises(DomainError):
        SuiteConfig(**kw).validate()


def test_config_from_json_rejects_unknown_keys():
    with pytest.raises(DomainError):
        SuiteConfig.from_json({"corpus": [ORACLE], "colour": "red"})
    cfg = SuiteConfig.from_json({"corpus": [ORACLE], "checks": ["tau-gradient"]})
    assert cfg.checks == ["tau-gradient"]


def test_trivial_oracle_passes_everything():
    rep = run_suite(SuiteConfig(corpus=[{"type": "oracle", "a": 0, "b": 1, "c": 0}]), timestamp="t")
    assert rep.ok and rep.exit_code() == 0 and rep.totals["total"] > 30


def test_tau_gradient_suite():
    rep = run_suite(SuiteConfig(corpus=[ORACLE], checks=["tau-gradient"]), timestamp="t")
    assert rep.ok and all(r.tolerance == 1e-6 for r in rep.records)


def test_zero_tolerance_fails_every_inexact_check():
    rep = run_suite(SuiteConfig(corpus=[ORACLE], checks=FAST, global_tol=0.0), timestamp="t")
    assert all(r.passed == (r.residual == 0.0) for r in rep.records)
    assert rep.totals["failed"] > 0 and rep.exit_code() == 1


def test_malformed_entries_are_skipped_with_reason():
    rep = run_suite(SuiteConfig(corpus=[{"type": "mystery"}, {"type": "oracle", "a": 2, "b": 1, "c": 0}, ORACLE],
                                checks=["moments-oracle"]), timestamp="t")
    skipped = [r for r in rep.records if r.check == "corpus"]
    assert len(skipped) == 2 and all(r.note.startswith("skipped") for r in skipped)
    assert any(r.check == "moments-oracle" and r.passed for r in rep.records)
    assert not rep.ok


def test_report_is_deterministic():
    cfg = SuiteConfig(corpus=[ORACLE, {"type": "sigma", "g": [1.1, 0.03, [0.05, 0.03]]}], checks=FAST)
    a = run_suite(cfg, timestamp="fixed").dumps()
    b = run_suite(cfg, timestamp="fixed").dumps()
    assert a == b


def test_parallel_matches_serial():
    corpus = [ORACLE, {"type": "identity"}, {"type": "oracle", "a": 0.1, "b": 0.9, "c": 0.1}]
    serial = run_suite(SuiteConfig(corpus=corpus, checks=FAST), timestamp="t").dumps()
    parallel = run_suite(SuiteConfig(corpus=corpus, checks=FAST, workers=3), timestamp="t").dumps()
    assert serial == parallel


def test_records_are_sorted_and_tagged():
    rep = run_suite(SuiteConfig(corpus=[ORACLE], checks=["rh", "jump"]), timestamp="t")
    recs = rep.to_json()["records"]
    assert [r["check"] for r in recs] == sorted(r["check"] for r in recs)
    assert all(r["identity"] == report.IDENTITIES[r["check"]] for r in recs)


def test_json_roundtrip():
    rep = run_suite(SuiteConfig(corpus=[ORACLE], checks=["jump"]), timestamp="t")
    back = Report.from_json(json.loads(rep.dumps()))
    assert back.dumps() == rep.dumps()


def test_empty_report_csv_is_header_only():
    assert Report().to_csv() == ",".join(CSV_FIELDS) + "\n"


def test_csv_rows():
    rec = CheckRecord("jump", "x", "e", (1, "g"), 1e-12, 1e-8, True)
    rows = Report([rec]).to_csv().splitlines()
    assert rows[1] == "jump,x,e,1 g,1e-12,1e-08,1,"


def test_sweep_csv_slope(mobius):
    rows = toda.lax_sweep(mobius, 1, [8e-4, 4e-4, 2e-4, 1e-4], "f")
    text = report.sweep_csv(rows)
    assert text.splitlines()[0] == "eps,residual"
    e, r = report.read_sweep_csv(text)
    assert len(e) == 4 and abs(report.loglog_slope(e, r) - 2) < 0.1
    e0, r0 = report.read_sweep_csv(report.sweep_csv([]))
    assert len(e0) == 0


@pytest.mark.parametrize(
    "spec, kind",
    [
        ({"type": "identity"}, "pair"),
        ({"type": "coefficients", "a": [1.0, 0.02], "b": [1.0, 0.01]}, "pair"),
        ({"type": "sigma", "g": [1.1, 0.0, 0.05]}, "sigma"),
        ({"type": "homeo-mobius", "a": [0.1, 0.1], "alpha": 0.2}, "homeo"),
        ({"type": "homeo-phase", "seed": 3}, "homeo"),
    ],
)
def test_build_entry_kinds(spec, kind):
    assert report.build_entry(spec).kind == kind


def test_build_entry_from_files(tmp_path, mobius):
    from conftoda import welding

    p = tmp_path / "pair.json"
    p.write_text(json.dumps(mobius.to_json()))
    e = report.build_entry({"type": "pair", "path": str(p)})
    assert e.pair.f.max_abs_diff(mobius.f) == 0
    inline = report.build_entry({"type": "pair", "pair": mobius.to_json(), "name": "m"})
    assert inline.name == "m"
    h = tmp_path / "h.json"
    h.write_text(json.dumps(welding.CircleHomeo.identity().to_json()))
    assert report.build_entry({"type": "homeo-file", "path": str(h)}).homeo is not None


def test_default_corpus_passes():
    rep = run_suite(SuiteConfig(corpus=report.default_corpus()), timestamp="t")
    failed = [r for r in rep.records if not r.passed]
    assert not failed, failed
    assert rep.metadata["negative_flow_convention"] == toda.NEGATIVE_FLOW_CONVENTION
