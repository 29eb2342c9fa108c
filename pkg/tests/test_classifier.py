import csv
from pathlib import Path

import pytest

from rspin.classifier import classify, dimension, stratum_signature
from rspin.errors import InvalidInput, OutsideClassificationTable
from rspin.spin_solver import SpinData

FIXTURE = Path(__file__).parent / "fixtures" / "classification_table.csv"


def load_rows():
    with open(FIXTURE) as fh:
        for row in csv.DictReader(fh):
            m = tuple(int(v) for v in row["m"].split()) if row["m"] else ()
            yield (int(row["g"]), int(row["r"]), m, int(row["d"]),
                   int(row["count"]), row["label"], int(row["dimension"]))


ROWS = list(load_rows())


def test_fixture_size():
    assert len(ROWS) >= 300
    labels = {row[5] for row in ROWS}
    for clause in ["C2-g2", "C2-i", "C2-ii", "C2-iii", "C2-iv", "C2-v", "C1-i", "C1-ii",
                   "C1-iii", "C1-iv", "C1-v", "C1-a", "C1-b", "C1-c", "C1-even",
                   "C1-even-d0", "generic-connected"]:
        assert clause in labels


def test_fixture_table():
    mismatches = []
    for g, r, m, d, count, label, dim in ROWS:
        sd = SpinData(g, r, m)
        assert sd.d == d
        v = classify(sd)
        if (v.count, v.case_label, v.dimension) != (count, label, dim):
            mismatches.append(((g, r, m), (v.count, v.case_label), (count, label)))
        assert v.dimension == 2 * g - 2 + d + len(m)
    assert not mismatches


@pytest.mark.parametrize("sd, count, label", [
    (SpinData(4, 2, (6,)), 3, "C1-i"),
    (SpinData(3, 2, ()), 2, "C2-v"),
    (SpinData(4, 3, ()), 2, "C1-c"),
    (SpinData(4, 5, (1,)), 1, "generic-connected"),
    (SpinData(5, 2, (2, 2)), 2, "C1-even"),
    (SpinData(5, 3, (2, 6)), 2, "C1-even-d0"),
    (SpinData(2, 5, (2,)), 1, "C2-g2"),
    (SpinData(5, 2, (4, 4)), 3, "C1-ii"),
])
def test_examples(sd, count, label):
    v = classify(sd)
    assert (v.count, v.case_label) == (count, label)


def test_precedence_three_before_parity():
    # g odd, m = (g-1, g-1) satisfies both the three-component and the parity clause
    v = classify(SpinData(7, 4, (6, 6)))
    assert v.count == 3 and v.case_label == "C1-ii"


def test_stratum_signature():
    assert sorted(stratum_signature(SpinData(3, 2, (), 2))) == [2, 2]
    assert sorted(stratum_signature(SpinData(2, 2, ()))) == [2]
    assert sorted(stratum_signature(SpinData(4, 3, (1, 2)))) == [1, 2, 3]
    for g, r, m, *_ in ROWS:
        assert sum(stratum_signature(SpinData(g, r, m))) == 2 * g - 2


def test_dimension():
    assert dimension(SpinData(2, 2, ())) == 3
    assert dimension(SpinData(1, 2, ())) == 0
    assert dimension(SpinData(4, 2, (1, 1, 0), 2)) == 11


def test_refusals():
    with pytest.raises(OutsideClassificationTable):
        classify(SpinData(1, 3, (0,)))
    with pytest.raises(InvalidInput):
        SpinData(5, 3, ())


def test_total_function():
    for g in range(2, 9):
        for r in range(2, 9):
            for a in range(0, 2 * g - 1):
                for b in range(0, 2 * g - 1 - a):
                    try:
                        sd = SpinData(g, r, (a, b))
                    except InvalidInput:
                        continue
                    v = classify(sd)
                    assert v.count in (1, 2, 3) and v.case_label
