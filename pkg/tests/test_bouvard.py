import numpy as np
import pytest

from laplace_ls.bouvard import (
    LABELS,
    condition_diagnostics,
    load_dataset,
    printed_system,
    replicate,
    stepwise_systems,
)
from laplace_ls.errors import UnknownDatasetError
from laplace_ls.inference import variance_for_variable
from laplace_ls.precision import printed_unit
from laplace_ls.reverse_cholesky import factor, solve

SATURN_CHECKSUM = "5688fef5c90cd76697feb702e6e0c285e769118c49ae011dd398ae40c22096e2"


def test_embedded_values_are_frozen(saturn):
    assert saturn.checksum() == SATURN_CHECKSUM


def test_dataset_shape(saturn):
    S = saturn.system
    assert S.n == 6 and S.s == 129 and S.rss == 31096.0
    assert S.labels == LABELS
    assert S.entry(1, 1) == 424865729.0 and S.entry(5, 5) == 129.0
    assert np.all(np.linalg.eigvalsh(S.matrix()) > 0)


def test_unknown_dataset():
    with pytest.raises(UnknownDatasetError) as err:
        load_dataset("venus")
    assert "saturn-motion" in str(err.value)
    assert isinstance(err.value, KeyError)


def test_stepwise_route_reproduces_every_recomputed_digit(saturn):
    steps = stepwise_systems(saturn)
    for size, (rows, rhs) in saturn.recomputed_snapshots.items():
        m, r = steps[size]
        for i, row in enumerate(rows):
            for off, text in enumerate(row):
                assert abs(m[i, i + off] - float(text)) <= printed_unit(text), (size, i, off)
        for i, text in enumerate(rhs):
            assert abs(r[i] - float(text)) <= printed_unit(text), (size, i)


def test_final_pair_solution(saturn):
    x = solve(factor(printed_system(saturn, 2)))
    assert x[0] == pytest.approx(0.08916, abs=1e-5)
    assert x[1] == pytest.approx(-0.00304, abs=1e-5)


def test_poids_of_z_prime_from_printed_pair(saturn):
    r = variance_for_variable(printed_system(saturn, 2), 1)
    assert r.log10_poids == pytest.approx(5.0778624, abs=1e-3)
    assert r.label == "z'"


def test_conditioning(saturn):
    kappa, scaled = condition_diagnostics(saturn)
    assert kappa > 1e8
    assert scaled == pytest.approx(104, abs=5)
    assert condition_diagnostics(saturn.system) == (kappa, scaled)


def test_replicate_passes_all_gating_checks(saturn):
    report = replicate(saturn)
    assert report.passed, [c.name for c in report.failures()]
    assert report.group("step") and report.group("step-chained")
    assert not any(c.gating for c in report.group("step-chained"))
    doc = report.to_dict()
    assert doc["passed"] is True and doc["dataset"] == "saturn-motion"
    assert report.find("stepwise z").note


def test_chained_route_drifts_from_recomputed_lines(saturn):
    report = replicate(saturn)
    chained_fail = [c for c in report.group("step-chained") if not c.passed]
    assert chained_fail
    assert all(c.name.startswith("chained step ") for c in chained_fail)
    assert not any("step B" in c.name for c in chained_fail)
