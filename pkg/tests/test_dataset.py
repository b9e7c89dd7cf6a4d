import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ssreg.dataset import SemiSupervisedDataset, center, load_csv, make_split, write_csv
from ssreg.errors import InputError, LoadError
from ssreg.estimators import ESTIMATORS, EstimatorConfig, UnsupervisedRowsIgnored
from ssreg.simgen import ScenarioSpec, generate
from ssreg.tuning import Fixed


def small_dataset(rng, n=12, m=7, d=3):
    return SemiSupervisedDataset(
        rng.normal(size=n), rng.normal(size=(n, d)), rng.normal(size=n),
        rng.normal(size=m), rng.normal(size=(m, d)),
    )


def test_dataset_shapes_and_readonly(rng):
    ds = small_dataset(rng)
    assert (ds.n, ds.m, ds.d, ds.N) == (12, 7, 3, 19)
    assert ds.x_labeled.shape == (12, 4)
    np.testing.assert_array_equal(ds.x_labeled[:, 0], ds.z_labeled)
    with pytest.raises(ValueError):
        ds.w_labeled[0, 0] = 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(z_labeled=[1.0]),  # n < 2
        dict(y_labeled=[1.0, 2.0, np.nan]),
        dict(w_unlabeled=np.ones((2, 4))),  # d mismatch
        dict(z_unlabeled=np.ones(3)),  # unlabeled row mismatch
    ],
)
def test_dataset_invalid(kwargs):
    base = dict(z_labeled=np.ones(3), w_labeled=np.ones((3, 2)), y_labeled=np.ones(3),
                z_unlabeled=np.ones(2), w_unlabeled=np.ones((2, 2)))
    base.update(kwargs)
    if "z_labeled" in kwargs:
        base.update(w_labeled=np.ones((1, 2)), y_labeled=np.ones(1))
    with pytest.raises(InputError):
        SemiSupervisedDataset(**base)


def test_dataset_without_controls():
    ds = SemiSupervisedDataset(np.arange(3.0), np.empty((3, 0)), np.ones(3), np.empty(0), np.empty((0, 0)))
    assert ds.d == 0 and ds.m == 0


# -------------------------------------------------------------------- splits

def test_two_way_n4():
    plan = make_split(4, "two_way", seed=11)
    a, b = plan.index_sets
    assert len(a) == len(b) == 2
    assert set(a) | set(b) == {0, 1, 2, 3} and not set(a) & set(b)


def test_three_way_n5_sizes():
    plan = make_split(5, "three_way", seed=3)
    assert sorted(len(p) for p in plan.index_sets) == [1, 2, 2]
    # remainder goes to the earlier parts
    assert [len(p) for p in plan.index_sets] == [2, 2, 1]


def test_split_deterministic():
    assert make_split(40, "k_fold", 9, folds=5, m=23) == make_split(40, "k_fold", 9, folds=5, m=23)
    assert make_split(40, "two_way", 9) != make_split(40, "two_way", 10)


@pytest.mark.parametrize("scheme,n", [("two_way", 1), ("three_way", 2)])
def test_split_too_small(scheme, n):
    with pytest.raises(InputError):
        make_split(n, scheme, 0)


def test_k_fold_needs_2k():
    with pytest.raises(InputError):
        make_split(9, "k_fold", 0, folds=5)
    make_split(10, "k_fold", 0, folds=5)


@given(
    n=st.integers(10, 200),
    m=st.integers(0, 300),
    k=st.integers(2, 5),
    seed=st.integers(0, 2**63 - 1),
    scheme=st.sampled_from(["two_way", "three_way", "k_fold"]),
)
def test_split_partition_property(n, m, k, seed, scheme):
    plan = make_split(n, scheme, seed, folds=k, m=m)
    parts = plan.index_sets
    sizes = [len(p) for p in parts]
    assert max(sizes) - min(sizes) <= 1
    assert sorted(np.concatenate(parts).tolist()) == list(range(n))
    if scheme == "k_fold":
        usizes = [len(p) for p in plan.unlabeled_sets]
        assert max(usizes) - min(usizes) <= 1
        assert sorted(np.concatenate(plan.unlabeled_sets).tolist()) == list(range(m))


# ----------------------------------------------------------------- centering

def test_center_means(rng):
    ds = small_dataset(rng).replace(w_labeled=rng.normal(size=(12, 3)) + 5.0)
    out, info = center(ds)
    assert abs(out.z_pooled.mean()) < 1e-12
    assert np.all(np.abs(out.w_pooled.mean(axis=0)) < 1e-12)
    assert abs(out.y_labeled.mean()) < 1e-12
    assert info.w_means.shape == (3,)


def test_center_idempotent(rng):
    once, _ = center(small_dataset(rng))
    _, info = center(once)
    assert abs(info.z_mean) <= 1e-12 and abs(info.y_mean) <= 1e-12
    assert np.all(np.abs(info.w_means) <= 1e-12)


def test_center_constant_column(rng):
    ds = small_dataset(rng)
    w = np.array(ds.w_labeled)
    wu = np.array(ds.w_unlabeled)
    w[:, 1] = 2.5
    wu[:, 1] = 2.5
    out, info = center(ds.replace(w_labeled=w, w_unlabeled=wu))
    assert info.w_means[1] == 2.5
    assert np.all(out.w_pooled[:, 1] == 0.0)


def test_center_already_centered_is_identity(rng):
    once, _ = center(small_dataset(rng))
    twice, _ = center(once)
    np.testing.assert_allclose(twice.w_pooled, once.w_pooled, atol=1e-14)


def fixed_config():
    return EstimatorConfig(lambda_beta=Fixed(0.3), lambda_gamma=Fixed(0.05), lambda_u=Fixed(0.1), dr_folds=2)


@pytest.mark.parametrize("name", sorted(ESTIMATORS))
def test_center_shift_invariance(name):
    inst = generate(ScenarioSpec("M1", 60, 80, 12, seed=5, s=4))
    ds = inst.dataset
    shift_w = np.linspace(-3, 3, ds.d)
    shifted = ds.replace(
        z_labeled=ds.z_labeled + 1.7, z_unlabeled=ds.z_unlabeled + 1.7,
        w_labeled=ds.w_labeled + shift_w, w_unlabeled=ds.w_unlabeled + shift_w,
        y_labeled=ds.y_labeled - 4.0,
    )
    est = ESTIMATORS[name]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupervisedRowsIgnored)
        a = est(center(ds)[0], fixed_config())
        b = est(center(shifted)[0], fixed_config())
    assert b.theta_hat == pytest.approx(a.theta_hat, rel=1e-7, abs=1e-9)
    if np.isfinite(a.std_error):
        assert b.std_error == pytest.approx(a.std_error, rel=1e-6)


# ----------------------------------------------------------------------- CSV

def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_header_order(tmp_path):
    lab = write(tmp_path / "l.csv", "age,y,w1,w2\n1,2,3,4\n5,6,7,8\n")
    unl = write(tmp_path / "u.csv", "age,w1,w2\n9,10,11\n")
    ds = load_csv(lab, unl, "age", "y")
    assert ds.d == 2 and ds.w_names == ("w1", "w2")
    np.testing.assert_array_equal(ds.w_labeled, [[3, 4], [7, 8]])
    np.testing.assert_array_equal(ds.z_unlabeled, [9])


def test_load_missing_unlabeled_column(tmp_path):
    lab = write(tmp_path / "l.csv", "age,y,w1,w2\n1,2,3,4\n5,6,7,8\n")
    unl = write(tmp_path / "u.csv", "age,w1\n9,10\n")
    with pytest.raises(LoadError, match="w2"):
        load_csv(lab, unl, "age", "y")


def test_load_empty_unlabeled(tmp_path):
    lab = write(tmp_path / "l.csv", "z,y,w1\n1,2,3\n4,5,6\n")
    unl = write(tmp_path / "u.csv", "z,w1\n")
    ds = load_csv(lab, unl, "z", "y")
    assert ds.m == 0 and ds.d == 1


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("z,y,w1\n1,2,abc\n3,4,5\n", "row 2, column 'w1'"),
        ("z,y,w1\n1,2,3\n3,,5\n", "row 3, column 'y'"),
        ("z,y,w1\n1,2,nan\n3,4,5\n", "non-finite"),
        ("z,y,w1\n1,2\n", "expected 3 cells"),
    ],
)
def test_load_bad_cells(tmp_path, text, fragment):
    lab = write(tmp_path / "l.csv", text)
    with pytest.raises(LoadError, match=fragment):
        load_csv(lab, None, "z", "y")


def test_load_missing_file_and_column(tmp_path):
    with pytest.raises(LoadError, match="not found"):
        load_csv(tmp_path / "nope.csv", None, "z", "y")
    lab = write(tmp_path / "l.csv", "z,y,w1\n1,2,3\n4,5,6\n")
    with pytest.raises(LoadError, match="'age'"):
        load_csv(lab, None, "age", "y")


def test_csv_round_trip(tmp_path):
    ds = generate(ScenarioSpec("M1", 20, 15, 30, seed=2)).dataset
    write_csv(ds, tmp_path / "l.csv", tmp_path / "u.csv")
    back = load_csv(tmp_path / "l.csv", tmp_path / "u.csv", "z", "y")
    for a, b in [(ds.z_labeled, back.z_labeled), (ds.w_labeled, back.w_labeled), (ds.y_labeled, back.y_labeled),
                 (ds.z_unlabeled, back.z_unlabeled), (ds.w_unlabeled, back.w_unlabeled)]:
        np.testing.assert_array_equal(b, a)
