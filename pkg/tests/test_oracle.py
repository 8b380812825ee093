import random
import stat

import pytest

from srres.exactla import GF2, GF3, QQ
from srres.oracle import (
    OracleReport,
    dense_rank,
    hilbert_identity,
    hilbert_numerator_direct,
    inputs_digest,
    m2_compare,
    m2_script,
    minimal_nonfaces,
    parse_m2_output,
    strand_homology_direct,
    strand_homology_report,
)
from srres.resolution import assemble, hochster_betti
from srres.simplicial import SimplicialComplex, mask_of
from srres.transfer import StrandCache

FIELDS = [QQ, GF2, GF3]


def cx(m, facets):
    return SimplicialComplex.from_facets(m, facets)


def four_cycle():
    return SimplicialComplex.from_nonfaces(4, [[1, 3], [2, 4]])


def _random_complex(rng, m):
    facets = []
    for _ in range(rng.randrange(1, m + 3)):
        size = rng.randrange(1, m + 1)
        facets.append(rng.sample(range(1, m + 1), size))
    return SimplicialComplex.from_facets(m, facets)


# -- report plumbing ---------------------------------------------------------------


def test_report_states():
    r = OracleReport("x", "0" * 16, "pass")
    assert r.passed and not r.skipped and r.to_json()["status"] == "pass"
    with pytest.raises(AssertionError):
        OracleReport("x", "0" * 16, "maybe")
    # digest is input-stable and input-sensitive
    assert inputs_digest(a=1, b=[2]) == inputs_digest(b=[2], a=1)
    assert inputs_digest(a=1) != inputs_digest(a=2)


def test_dense_rank_small_cases():
    one = QQ.one()
    zero = QQ.zero()
    assert dense_rank([], QQ) == 0
    assert dense_rank([[zero, zero]], QQ) == 0
    assert dense_rank([[one, zero], [zero, one]], QQ) == 2
    assert dense_rank([[one, one], [one, one]], QQ) == 1
    # characteristic matters: this matrix drops rank mod 2
    two = [[QQ.of(1), QQ.of(1)], [QQ.of(1), QQ.of(-1)]]
    assert dense_rank(two, QQ) == 2
    assert dense_rank([[GF2.of(1), GF2.of(1)], [GF2.of(1), GF2.of(-1)]], GF2) == 1


# -- strand homology ---------------------------------------------------------------


def test_strand_homology_direct_frozen_examples():
    bd1 = SimplicialComplex.from_nonfaces(2, [[1, 2]])
    assert strand_homology_direct(bd1, mask_of([1, 2], 2), QQ) == {1: 1}
    # the full edge is acyclic in that strand
    assert strand_homology_direct(cx(2, [[1, 2]]), mask_of([1, 2], 2), QQ) == {}
    # the empty multidegree carries the ground field
    assert strand_homology_direct(bd1, 0, QQ) == {0: 1}


@pytest.mark.parametrize("field", FIELDS)
def test_strand_homology_matches_pipeline(field):
    rng = random.Random(61 + (field.p or 0))
    for _ in range(6):
        K = _random_complex(rng, rng.choice([3, 4]))
        assert strand_homology_report(K, field).passed


def test_strand_homology_matches_hochster_betti():
    K = four_cycle()
    betti = hochster_betti(K, QQ)
    for U in range(1 << 4):
        dims = strand_homology_direct(K, U, QQ)
        for n, d in dims.items():
            assert betti.beta(n, U) == d


# -- Hilbert numerator --------------------------------------------------------------


def test_hilbert_numerator_frozen_examples():
    bd1 = SimplicialComplex.from_nonfaces(2, [[1, 2]])
    assert hilbert_numerator_direct(bd1) == {0: 1, 3: -1}
    assert hilbert_numerator_direct(cx(3, [[1, 2, 3]])) == {0: 1}
    assert hilbert_numerator_direct(four_cycle()) == {0: 1, 5: -1, 10: -1, 15: 1}


@pytest.mark.parametrize("field", FIELDS)
def test_hilbert_identity_on_random_complexes(field):
    rng = random.Random(71 + (field.p or 0))
    for _ in range(6):
        K = _random_complex(rng, rng.choice([3, 4]))
        report = hilbert_identity(K, hochster_betti(K, field))
        assert report.passed, report.details
        # and against the assembled model's own table
        model = assemble(StrandCache(K, field))
        assert hilbert_identity(K, model.betti()).passed


def test_hilbert_identity_flags_a_wrong_table():
    K = four_cycle()
    betti = hochster_betti(K, QQ)
    betti.by_multidegree[(1, 5)] += 1
    report = hilbert_identity(K, betti)
    assert report.status == "fail"
    assert any("t^5" in d for d in report.details)


# -- external comparison ------------------------------------------------------------

FOUR_CYCLE_M2_OUTPUT = """\
spurious banner line
SRRES-M2 BEGIN
GEN 0 0 0 0 0
GEN 1 1 0 1 0
GEN 1 0 1 0 1
GEN 2 1 1 1 1
LAST 2 VARS v_1 v_2 v_3 v_4
SRRES-M2 END
trailing noise
"""


def test_parse_m2_output_canned():
    betti, last = parse_m2_output(FOUR_CYCLE_M2_OUTPUT, 4)
    assert betti == {(0, 0): 1, (1, 5): 1, (1, 10): 1, (2, 15): 1}
    assert last == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        parse_m2_output("no block here", 4)
    with pytest.raises(ValueError):
        parse_m2_output("SRRES-M2 BEGIN\nGEN 0 2 0 0 0\nSRRES-M2 END", 4)
    with pytest.raises(ValueError):
        parse_m2_output("SRRES-M2 BEGIN\nwhat\nSRRES-M2 END", 4)


def test_minimal_nonfaces_and_script_shape():
    K = four_cycle()
    assert minimal_nonfaces(K) == [mask_of([1, 3], 4), mask_of([2, 4], 4)]
    script = m2_script(K, GF2)
    assert "ZZ/2" in script and "v_1*v_3" in script and "v_2*v_4" in script
    assert "SRRES-M2 BEGIN" in m2_script(K, QQ) and "QQ" in m2_script(K, QQ)
    # a complex with no non-faces resolves as the free module
    assert "monomialIdeal(0_R)" in m2_script(cx(2, [[1, 2]]), QQ)


def test_m2_compare_skips_without_binary(monkeypatch):
    monkeypatch.delenv("SRRES_M2_BIN", raising=False)
    report = m2_compare(four_cycle(), QQ)
    assert report.skipped and "SRRES_M2_BIN" in report.details[0]


def _stub(tmp_path, monkeypatch, body):
    path = tmp_path / "fake-m2"
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    monkeypatch.setenv("SRRES_M2_BIN", str(path))
    return path


def test_m2_compare_against_stub_binary(tmp_path, monkeypatch):
    _stub(tmp_path, monkeypatch, f"cat <<'EOF'\n{FOUR_CYCLE_M2_OUTPUT}EOF\n")
    report = m2_compare(four_cycle(), QQ)
    assert report.passed, report.details

    # a stub reporting a wrong Betti table is a fail, not a skip
    wrong = FOUR_CYCLE_M2_OUTPUT.replace("GEN 1 0 1 0 1\n", "")
    _stub(tmp_path, monkeypatch, f"cat <<'EOF'\n{wrong}EOF\n")
    report = m2_compare(four_cycle(), QQ)
    assert report.status == "fail"
    assert any("beta" in d for d in report.details)


def test_m2_compare_skips_on_subprocess_trouble(tmp_path, monkeypatch):
    _stub(tmp_path, monkeypatch, "exit 3\n")
    report = m2_compare(four_cycle(), QQ)
    assert report.skipped and "exit 3" in report.details[0]

    _stub(tmp_path, monkeypatch, "echo garbage\n")
    assert m2_compare(four_cycle(), QQ).skipped

    monkeypatch.setenv("SRRES_M2_BIN", str(tmp_path / "does-not-exist"))
    assert m2_compare(four_cycle(), QQ).skipped
