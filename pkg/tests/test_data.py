import numpy as np
import pytest

from saag.data import (Dataset, ParseError, SparseVector,
                       dump_libsvm, make_schedule, make_synthetic,
                       parse_libsvm, split_train_test)


def test_parse_basic():
    ds = parse_libsvm("+1 1:1.0 3:-2.5\n-1 2:0.5")
    assert ds.n == 2
    assert ds.d == 3
    assert list(ds.labels) == [1.0, -1.0]
    assert list(ds.rows[0].indices) == [1, 3]
    assert list(ds.rows[0].values) == [1.0, -2.5]


def test_parse_label_mapping():
    # any label <= 0 maps to -1, > 0 maps to +1
    ds = parse_libsvm("0 1:1\n-3 1:1\n2 1:1\n0.5 1:1")
    assert list(ds.labels) == [-1.0, -1.0, 1.0, 1.0]


def test_parse_skips_empty_lines_and_drops_zeros():
    ds = parse_libsvm("\n+1 1:1.0 2:0.0 3:2.0\n\n-1 1:4.0\n")
    assert ds.n == 2
    assert list(ds.rows[0].indices) == [1, 3]
    assert ds.d == 3


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="empty dataset"):
        parse_libsvm("")
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm("1 2:abc")
    with pytest.raises(ParseError, match="line 2"):
        parse_libsvm("+1 1:1\n-1 3:1 2:1")  # non-increasing
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm("+1 0:1")  # zero index
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm("abc 1:1")
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm("+1 11")  # missing colon


def test_roundtrip_exact():
    rng = np.random.default_rng(0)
    for trial in range(20):
        n = int(rng.integers(1, 12))
        d = int(rng.integers(1, 9))
        lines = []
        for _ in range(n):
            nnz = int(rng.integers(0, d + 1))
            idx = np.sort(rng.choice(d, size=nnz, replace=False)) + 1
            vals = rng.standard_normal(nnz)
            vals[vals == 0.0] = 1.0
            label = "+1" if rng.random() < 0.5 else "-1"
            lines.append(label + "".join(f" {i}:{float(v)!r}" for i, v in zip(idx, vals)))
        ds = parse_libsvm("\n".join(lines))
        ds2 = parse_libsvm(dump_libsvm(ds))
        assert ds2.n == ds.n and ds2.d == ds.d
        assert np.array_equal(ds2.labels, ds.labels)
        for r1, r2 in zip(ds.rows, ds2.rows):
            assert np.array_equal(r1.indices, r2.indices)
            assert np.array_equal(r1.values, r2.values)


def test_sparse_vector_invariants():
    with pytest.raises(ValueError):
        SparseVector(np.array([1, 1]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        SparseVector(np.array([2, 1]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        SparseVector(np.array([0]), np.array([1.0]))
    with pytest.raises(ValueError):
        SparseVector(np.array([1]), np.array([0.0]))


def test_dataset_invariants():
    row = SparseVector(np.array([2]), np.array([1.0]))
    with pytest.raises(ValueError):
        Dataset([row], np.array([1.0]), d=1)  # index exceeds d
    with pytest.raises(ValueError):
        Dataset([row], np.array([2.0]), d=2)  # bad label
    with pytest.raises(ValueError):
        Dataset([], np.array([]), d=2)


def test_split_cardinality_and_union():
    ds = make_synthetic(10, 3, seed=0)
    train, test = split_train_test(ds, 0.8, seed=7)
    assert train.n == 8 and test.n == 2
    assert train.d == ds.d and test.d == ds.d
    # union is a permutation of the input rows (match on object identity)
    ids = {id(r) for r in ds.rows}
    split_ids = [id(r) for r in train.rows + test.rows]
    assert len(split_ids) == 10 and set(split_ids) == ids


def test_split_tiny_and_determinism():
    ds = make_synthetic(2, 2, seed=1)
    a, b = split_train_test(ds, 0.5, seed=3)
    assert a.n == 1 and b.n == 1
    ds10 = make_synthetic(10, 3, seed=2)
    t1, s1 = split_train_test(ds10, 0.8, seed=5)
    t2, s2 = split_train_test(ds10, 0.8, seed=5)
    assert [id(r) for r in t1.rows] == [id(r) for r in t2.rows]
    assert [id(r) for r in s1.rows] == [id(r) for r in s2.rows]


def test_split_errors():
    ds = make_synthetic(10, 3, seed=0)
    with pytest.raises(ValueError):
        split_train_test(ds, 0.0, seed=0)
    with pytest.raises(ValueError):
        split_train_test(ds, 1.0, seed=0)
    one = make_synthetic(1, 2, seed=0)
    with pytest.raises(ValueError):
        split_train_test(one, 0.5, seed=0)


def test_schedule_partition_property():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        b = int(rng.integers(1, n + 1))
        sched = make_schedule(n, b, seed=int(rng.integers(1000)),
                              epoch=int(rng.integers(5)))
        assert sched.m == -(-n // b)
        allidx = np.concatenate(sched.batches)
        assert sorted(allidx) == list(range(n))
        sizes = {len(batch) for batch in sched.batches}
        assert sizes <= {b, n - (sched.m - 1) * b}


def test_schedule_examples_and_determinism():
    s = make_schedule(6, 2, seed=0)
    assert s.m == 3 and all(len(batch) == 2 for batch in s.batches)
    s = make_schedule(10, 3, seed=0)
    assert s.m == 4 and sorted(len(batch) for batch in s.batches) == [1, 3, 3, 3]
    s = make_schedule(5, 5, seed=0)
    assert s.m == 1 and list(s.batches[0]) == [0, 1, 2, 3, 4]
    a = make_schedule(20, 3, seed=4, epoch=2)
    b = make_schedule(20, 3, seed=4, epoch=2)
    assert all(np.array_equal(x, y) for x, y in zip(a.batches, b.batches))
    c = make_schedule(20, 3, seed=4, epoch=3)
    assert any(not np.array_equal(x, y) for x, y in zip(a.batches, c.batches))


def test_schedule_errors():
    with pytest.raises(ValueError):
        make_schedule(5, 0, seed=0)
    with pytest.raises(ValueError):
        make_schedule(5, 6, seed=0)


def test_synthetic_generator():
    ds = make_synthetic(50, 4, seed=0)
    assert ds.n == 50 and ds.d == 4
    assert set(np.unique(ds.labels)) <= {-1.0, 1.0}
    flipped = make_synthetic(50, 4, seed=0, flip=0.1)
    assert int(np.sum(flipped.labels != ds.labels)) == 5
    # margin variant keeps a genuine separating direction
    wide = make_synthetic(50, 4, seed=0, margin=2.0)
    dense = wide.dense()
    rng = np.random.default_rng(0)
    rng.standard_normal((50, 4))
    u = rng.standard_normal(4)
    u /= np.linalg.norm(u)
    margins = wide.labels * (dense @ u)
    assert np.all(margins >= 2.0 - 1e-9)
