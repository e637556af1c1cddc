import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalbfs import SampleTable, correlation_matrix, pearson


def pearson_oracle(x, y):
    """Straight from the definition, in exact-ish fsum arithmetic."""
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    num = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    ssx = math.fsum((a - mx) ** 2 for a in x)
    ssy = math.fsum((b - my) ** 2 for b in y)
    if ssx == 0 or ssy == 0:
        return None
    return num / math.sqrt(ssx * ssy)


def test_perfect_positive():
    assert pearson([1, 2, 3], [1, 2, 3]) == 1.0


def test_perfect_negative():
    assert pearson([1, 2, 3], [6, 4, 2]) == -1.0


def test_derived_value_from_definition_oracle():
    # Frozen output of pearson_oracle([1, 2, 3, 4], [1, 3, 2, 5]).
    expected = 0.8315218406202999
    assert abs(pearson_oracle([1, 2, 3, 4], [1, 3, 2, 5]) - expected) < 1e-15
    assert abs(pearson([1, 2, 3, 4], [1, 3, 2, 5]) - expected) < 1e-12


def test_zero_variance_is_undefined():
    assert pearson([1, 2, 3], [5, 5, 5]) is None
    assert pearson([7, 7], [1, 2]) is None


def test_length_mismatch_and_short_series():
    with pytest.raises(ValueError):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        pearson([1], [1])


@pytest.mark.parametrize("seed", range(10))
def test_matches_oracle_on_random_series(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 200)
    x = [rng.uniform(-50, 50) for _ in range(n)]
    y = [rng.uniform(-50, 50) for _ in range(n)]
    assert abs(pearson(x, y) - pearson_oracle(x, y)) < 1e-12


@given(
    st.integers(0, 10_000),
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
)
@settings(max_examples=200, deadline=None)
def test_scale_shift_invariance(seed, a, b):
    rng = random.Random(seed)
    n = rng.randint(3, 40)
    x = [rng.uniform(-100, 100) for _ in range(n)]
    y = [rng.uniform(-100, 100) for _ in range(n)]
    base = pearson(x, y)
    if abs(a) < 1e-3:
        return
    scaled = pearson([a * v + b for v in x], y)
    sign = 1.0 if a > 0 else -1.0
    assert abs(scaled - sign * base) < 1e-9


def _table(columns, names=None):
    names = names or tuple(f"c{i}" for i in range(len(columns)))
    return SampleTable(variable_names=tuple(names), rows=np.array(columns, float).T)


def test_matrix_identical_columns():
    table = _table([[1, 2, 3], [1, 2, 3]])
    matrix = correlation_matrix(table)
    assert matrix.values == [[1.0, 1.0], [1.0, 1.0]]


def test_matrix_constant_column_is_undefined_everywhere():
    table = _table([[1, 2, 3], [4, 4, 4], [3, 1, 2]])
    matrix = correlation_matrix(table)
    assert matrix.value("c0", "c1") is None
    assert matrix.value("c1", "c2") is None
    assert matrix.value("c1", "c1") is None
    assert matrix.value("c0", "c0") == 1.0
    assert matrix.value("c0", "c2") is not None


@pytest.mark.parametrize("seed", range(6))
def test_matrix_entries_equal_pairwise_recomputation(seed):
    rng = random.Random(seed)
    k = rng.randint(2, 6)
    n = rng.randint(2, 30)
    columns = [[rng.uniform(-10, 10) for _ in range(n)] for _ in range(k)]
    table = _table(columns)
    matrix = correlation_matrix(table)
    for i in range(k):
        assert matrix.values[i][i] == 1.0
        for j in range(k):
            expected = pearson(columns[i], columns[j]) if i != j else 1.0
            got = matrix.values[i][j]
            assert got == matrix.values[j][i]
            if i != j:
                assert abs(got - expected) < 1e-15
            assert -1 - 1e-9 <= got <= 1 + 1e-9


def test_pairs_excluding_keeps_order():
    table = _table([[1, 2, 4], [2, 1, 3], [0, 5, 1]], names=("x", "y", "z"))
    matrix = correlation_matrix(table)
    pairs = matrix.pairs_excluding("y")
    assert [name for name, _ in pairs] == ["x", "z"]


def test_matrix_csv_export_marks_undefined():
    table = _table([[1, 2, 3], [4, 4, 4]], names=("a", "b"))
    text = correlation_matrix(table).to_csv_text()
    lines = text.splitlines()
    assert lines[0] == ",a,b"
    assert lines[1].startswith("a,1.0,")
    assert "n/a" in lines[1] and "n/a" in lines[2]
