"""scikit-learn compatible wrappers around the streaming selectors.

The columns of ``X`` are treated as a feature stream, in column order or in a
seeded shuffled order, and the fitted selector keeps the selected columns::

    >>> sel = OnlineStreamingSelector(algorithm="saola").fit(X, y)   # doctest: +SKIP
    >>> X_small = sel.transform(X)                                   # doctest: +SKIP
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .dataset import Dataset, Group, make_stream
from .lfi import ALGORITHMS, SelectorConfig, run_selector
from .lgf import run_group_selector


def _as_dataset(X, y, feature_kinds, groups=None):
    if isinstance(X, Dataset):
        if y is not None:
            raise ValueError("y must be None when X is a Dataset")
        return X if groups is None else X.with_groups(groups)
    X, y = check_X_y(X, y, ensure_min_features=0)
    return Dataset.from_arrays(X, y, feature_kinds=feature_kinds, groups=groups)


class _StreamingSelectorBase(SelectorMixin, BaseEstimator):
    def _config(self):
        return SelectorConfig(
            alpha=self.alpha,
            max_cond_size=self.max_cond_size,
            measure=self.measure,
            saola_delta=self.saola_delta,
            ai_w0=self.ai_w0,
            ai_dw=self.ai_dw,
        )

    def _get_support_mask(self):
        check_is_fitted(self, "selected_features_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[list(self.selected_features_)] = True
        return mask


class OnlineStreamingSelector(_StreamingSelectorBase):
    """Feature selector for features arriving one at a time.

    Parameters
    ----------
    algorithm : {"alpha_investing", "osfs", "fast_osfs", "saola"}
    alpha : float
        Significance level of the independence tests.
    max_cond_size : int
        Largest conditioning set searched by OSFS and Fast-OSFS.
    measure : {"chi2", "g2", "fisher_z", "mi"} or None
        ``None`` picks the default measure for the data kinds.
    saola_delta : float
        Relevance threshold for SAOLA.
    ai_w0, ai_dw : float
        Alpha-investing initial wealth and payout.
    order : {"natural", "shuffled"}
        Arrival order of the columns.
    random_state : int or None
        Seed for ``order="shuffled"``.
    feature_kinds : str or sequence
        ``"auto"``, ``"all_discrete"``, ``"all_continuous"`` or per-column kinds.

    Attributes
    ----------
    selected_features_ : list of int
        Selected column indices in selection order.
    state_ : SelectionState
        Full run state including the arrival log.
    """

    def __init__(
        self,
        algorithm="fast_osfs",
        alpha=0.05,
        max_cond_size=3,
        measure=None,
        saola_delta=0.0,
        ai_w0=0.5,
        ai_dw=0.5,
        order="natural",
        random_state=None,
        feature_kinds="auto",
    ):
        self.algorithm = algorithm
        self.alpha = alpha
        self.max_cond_size = max_cond_size
        self.measure = measure
        self.saola_delta = saola_delta
        self.ai_w0 = ai_w0
        self.ai_dw = ai_dw
        self.order = order
        self.random_state = random_state
        self.feature_kinds = feature_kinds

    def fit(self, X, y=None):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        dataset = _as_dataset(X, y, self.feature_kinds)
        stream = make_stream(dataset, order=self.order, seed=self.random_state)
        self.state_ = run_selector(dataset, stream, self.algorithm, self._config())
        self.selected_features_ = list(self.state_.selected)
        self.n_features_in_ = dataset.n_features
        return self


class GroupSAOLASelector(_StreamingSelectorBase):
    """Group-SAOLA over a partition of the columns into groups.

    ``groups`` is a list of index lists or a mapping ``name -> indices``;
    groups arrive in the given order (or shuffled with ``random_state``).
    """

    def __init__(
        self,
        groups=None,
        alpha=0.05,
        measure=None,
        saola_delta=0.0,
        order="natural",
        random_state=None,
        feature_kinds="auto",
    ):
        self.groups = groups
        self.alpha = alpha
        self.measure = measure
        self.saola_delta = saola_delta
        self.order = order
        self.random_state = random_state
        self.feature_kinds = feature_kinds

    def _config(self):
        return SelectorConfig(alpha=self.alpha, measure=self.measure, saola_delta=self.saola_delta)

    def fit(self, X, y=None):
        groups = self.groups
        if isinstance(groups, dict):
            groups = [Group(str(k), tuple(v)) for k, v in groups.items()]
        elif groups is not None:
            groups = [Group(f"g{i}", tuple(v)) for i, v in enumerate(groups)]
        dataset = _as_dataset(X, y, self.feature_kinds, groups)
        if dataset.groups is None:
            raise ValueError("GroupSAOLASelector needs groups")
        stream = make_stream(dataset, mode="group", order=self.order, seed=self.random_state)
        self.state_ = run_group_selector(dataset, stream, self._config())
        self.selected_features_ = self.state_.selected
        self.selected_groups_ = {k: list(v) for k, v in self.state_.selected_groups.items()}
        self.n_features_in_ = dataset.n_features
        return self
