import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

os.environ.setdefault("LOG_LEVEL", "WARNING")

import pytest  # noqa: E402
from pydantic import ValidationError  # noqa: E402

from app.models import RunConfig, SuiteReport  # noqa: E402
from app.services.semilattice import EngineError  # noqa: E402
from app.services.suites import SuiteRunner, report_json, run_suite  # noqa: E402


def small(**overrides) -> RunConfig:
    values = dict(window=10, samples=3, depth=6, seed=7)
    values.update(overrides)
    return RunConfig(**values)


def names(report: SuiteReport):
    return [check.name for check in report.checks]


def assert_passed(report: SuiteReport):
    failed = [(c.name, c.counterexample or c.detail) for c in report.checks if not c.passed]
    assert not failed, failed
    assert report.passed


def test_tau_c_rank_one_runs_every_suite():
    report = run_suite(small(topology="tau_c", n=1, window=8))
    assert_passed(report)
    assert "collectionwise_expand" in names(report)
    assert "non_discrete_rejected" in names(report)
    assert "joint_discontinuity" not in names(report)
    assert names(report)[-1] == "tamper_corpus"


def test_tau_c_rank_two():
    suites = ["laws", "base", "upsets", "continuity", "top_rank", "regularity", "extras", "controls"]
    report = run_suite(small(topology="tau_c", n=2, suites=suites))
    assert_passed(report)
    assert {"semilattice_laws", "base_axioms", "finite_subcover", "regular_open_basics", "top_rank_cover",
            "regularity_shrink", "basic_opens_closed", "sequential_compactness"} <= set(names(report))
    subcover = next(c for c in report.checks if c.name == "finite_subcover")
    assert subcover.certificates and subcover.certificates[0].kind == "Subcover"


def test_tau_fc2_witness_suites():
    report = run_suite(small(topology="tau_fc2", n=2, suites=["fc_witnesses", "top_rank", "regularity", "controls"]))
    assert_passed(report)
    assert names(report) == ["joint_discontinuity", "closed_discrete", "fczero_defect", "top_rank_dense",
                             "anchor_neighborhoods_not_closed", "accumulation_point", "top_rank_cover",
                             "regularity_shrink", "tamper_corpus", "semantic_tamper", "color_blind_control"]


def test_tau_fcn_witness_suites():
    report = run_suite(small(topology="tau_fcn", n=3, window=12, suites=["fc_witnesses", "controls"]))
    assert_passed(report)
    assert "top_rank_cover" not in names(report)


def test_tau_fcn_zero_neighborhoods_shrink():
    report = run_suite(small(topology="tau_fcn", n=3, window=12, suites=["regularity"]))
    assert_passed(report)
    assert names(report) == ["regularity_shrink"]
    assert report.checks[0].certificates[0].payload["status"] == "shrunk"


def test_tamper_corpus_reports_the_rejecting_layer():
    report = run_suite(small(topology="tau_fc2", n=2, suites=["fc_witnesses", "controls"]))
    assert_passed(report)
    tamper = next(c for c in report.checks if c.name == "tamper_corpus")
    stored, regenerated = tamper.detail.split("; rejected by ")[1].split("; with regenerated scripts ")
    assert {part.split()[0] for part in stored.split(", ")} <= {"payload", "script"}
    assert regenerated


def test_tau_0_is_flagged_non_t1():
    report = run_suite(small(topology="tau_0", n=2, suites=["base", "upsets", "continuity", "regularity"]))
    assert_passed(report)
    assert names(report) == ["base_axioms", "not_t1", "separate_continuity"]
    assert "not T1" in report.checks[0].detail


def test_oracle_suite():
    report = run_suite(small(topology="tau_c", n=2, window=8, suites=["oracle"]))
    assert_passed(report)
    assert names(report) == ["oracle_limit_points", "oracle_closure", "oracle_interior", "oracle_padding_stable"]


def test_report_is_byte_stable(tmp_path):
    path = str(tmp_path / "reports" / "tau_c.json")
    config = small(topology="tau_c", n=2, suites=["continuity", "controls"], out=path)
    first = run_suite(config)
    with open(path, "r", encoding="utf-8") as f:
        written = f.read()
    assert written == report_json(first) + "\n"
    assert report_json(run_suite(config)) == report_json(first)


def test_suite_corpora_do_not_depend_on_selection():
    alone = run_suite(small(topology="tau_c", n=2, suites=["continuity"]))
    together = run_suite(small(topology="tau_c", n=2, suites=["upsets", "continuity"]))
    first = next(c for c in together.checks if c.name == "separate_continuity")
    assert alone.checks[0].model_dump() == first.model_dump()


def test_engine_errors_become_failed_checks(monkeypatch):
    runner = SuiteRunner(small(topology="tau_c", n=2))

    def broken(*args, **kwargs):
        raise EngineError("boom")

    monkeypatch.setattr(runner.witnesses, "separate_continuity_modulus", broken)
    results = runner.suite_checks("continuity")
    failed = next(c for c in results if c.name == "separate_continuity")
    assert not failed.passed
    assert failed.detail == "EngineError: boom"


def test_invalid_configs():
    with pytest.raises(ValidationError):
        RunConfig(topology="tau_fc2", n=3)
    with pytest.raises(ValidationError):
        RunConfig(topology="tau_fcn", n=2)
    with pytest.raises(ValidationError):
        RunConfig(topology="tau_c", anchor="{0}")
    with pytest.raises(ValidationError):
        RunConfig(suites=["nope"])
    with pytest.raises(ValidationError):
        RunConfig(pads=(0, 1))
    with pytest.raises(ValueError):
        SuiteRunner(small()).suite_checks("nope")


if __name__ == "__main__":
    # Run ad-hoc if executed directly
    test_tau_c_rank_one_runs_every_suite()
    test_oracle_suite()
    print("All ad-hoc tests completed")
