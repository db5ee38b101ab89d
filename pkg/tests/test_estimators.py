import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import cross_val_score
from sklearn.naive_bayes import GaussianNB
from sklearn.pipeline import make_pipeline

from lofs import GroupSAOLASelector, OnlineStreamingSelector

from synthetic import copy_dataset, gaussian_dataset


@pytest.fixture
def xy():
    ds = copy_dataset(n=300, n_noise=6, seed=2)
    return np.asarray(ds.X), np.asarray(ds.y)


def test_fit_transform(xy):
    X, y = xy
    sel = OnlineStreamingSelector(algorithm="fast_osfs").fit(X, y)
    assert sel.selected_features_ == [0]
    assert sel.transform(X).shape == (300, 1)
    np.testing.assert_array_equal(sel.get_support(indices=True), [0])


def test_matches_dataset_input(xy):
    ds = copy_dataset(n=300, n_noise=6, seed=2)
    a = OnlineStreamingSelector(algorithm="saola", order="shuffled", random_state=1).fit(ds)
    b = OnlineStreamingSelector(algorithm="saola", order="shuffled", random_state=1).fit(*xy)
    assert a.selected_features_ == b.selected_features_


def test_get_params_and_clone():
    sel = OnlineStreamingSelector(algorithm="osfs", alpha=0.01, max_cond_size=2)
    params = clone(sel).get_params()
    assert params["algorithm"] == "osfs" and params["alpha"] == 0.01 and params["max_cond_size"] == 2


def test_not_fitted(xy):
    with pytest.raises(NotFittedError):
        OnlineStreamingSelector().transform(xy[0])


def test_bad_algorithm(xy):
    with pytest.raises(ValueError):
        OnlineStreamingSelector(algorithm="lasso").fit(*xy)


def test_pipeline_continuous():
    ds = gaussian_dataset(400, 8, seed=0, informative=2)
    X, y = np.asarray(ds.X), np.asarray(ds.y)
    pipe = make_pipeline(OnlineStreamingSelector(algorithm="saola"), GaussianNB())
    scores = cross_val_score(pipe, X, y, cv=3)
    assert scores.mean() > 0.8


def test_group_selector(xy):
    X, y = xy
    sel = GroupSAOLASelector(groups={"G1": [0, 1], "G2": [2, 3, 4], "G3": [5, 6, 7]}).fit(X, y)
    assert sel.selected_groups_ == {"G1": [0]}
    assert sel.transform(X).shape == (300, 1)
    assert GroupSAOLASelector(groups=[[0, 1], [2, 3, 4, 5, 6, 7]]).fit(X, y).selected_features_ == [0]


def test_group_selector_needs_groups(xy):
    with pytest.raises(ValueError):
        GroupSAOLASelector().fit(*xy)
