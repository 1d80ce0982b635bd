import pytest

from tresse.core.selftest import (
    ORACLES,
    check_f3,
    check_fiber,
    check_orbit_codim,
    check_equivalence_maps,
    check_relative_invariance,
    linearization_corpus,
    run_selftest,
)


def test_unknown_oracle(config):
    with pytest.raises(ValueError, match="nope"):
        run_selftest(config, only=["nope"])


def test_informational_oracle_is_not_required():
    assert ORACLES["profile-printed"][1] is False
    assert ORACLES["syzygies"][2] is True


def test_equivalence_oracle_is_slow_and_required():
    assert ORACLES["equivalence-maps"][1:] == (True, True)


@pytest.mark.slow
def test_equivalence_oracle_single_map(config):
    passed, detail = check_equivalence_maps(config, maps=1)
    assert passed, detail
    assert detail.startswith("5 images equivalent")


def test_corpus_is_reproducible(config):
    corpus = linearization_corpus(config)
    assert corpus == linearization_corpus(config)
    assert sum(not expected for _, expected in corpus) == 2


def test_relative_invariance_oracle(config):
    passed, detail = check_relative_invariance(config, fields=2)
    assert passed, detail


@pytest.mark.slow
def test_orbit_codim_oracle(config):
    passed, detail = check_orbit_codim(config)
    assert passed, detail
    assert "k=6: 14" in detail


def test_f3_oracle(config):
    passed, detail = check_f3(config)
    assert passed, detail


def test_fiber_oracle(config):
    passed, detail = check_fiber(config)
    assert passed, detail


def test_quick_run_skips_slow_oracles(config):
    report = run_selftest(config, only=["syzygies", "f3"], quick=True)
    assert [r.name for r in report.results] == ["f3"]
    assert report.passed
    assert report.failed == []


def test_informational_failure_does_not_fail_the_run(config, monkeypatch):
    monkeypatch.setitem(ORACLES, "profile-printed", (lambda cfg: (False, "off"), False, False))
    report = run_selftest(config, only=["profile-printed"])
    assert report.passed
    assert not report.results[0].passed


def test_errors_become_failures(config, monkeypatch):
    from tresse.exceptions import SamplingError

    def broken(cfg):
        raise SamplingError("All sample points are singular")

    monkeypatch.setitem(ORACLES, "f3", (broken, True, False))
    report = run_selftest(config, only=["f3"])
    assert not report.passed
    assert "SamplingError" in report.failed[0].detail


@pytest.mark.slow
def test_full_selftest(config):
    report = run_selftest(config)
    assert report.passed, [(r.name, r.detail) for r in report.failed]
