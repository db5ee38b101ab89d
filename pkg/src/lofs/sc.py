"""Performance evaluation and multi-dataset statistical comparison.

``evaluate`` cross-validates a fixed feature subset with a built-in k-NN or
naive Bayes classifier.  ``compare`` ranks algorithms per dataset and runs the
Friedman test (with the Iman-Davenport correction) and the Nemenyi post-hoc
critical difference.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.model_selection import StratifiedKFold
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from .dataset import DISCRETE
from .exceptions import ConfigurationError, IncompleteDesignError, UndefinedMetricError
from .measures import chi2_sf

METRICS = ("accuracy", "auc", "kappa", "compactness")
LOWER_IS_BETTER = ("compactness",)

# Studentized range quantile at infinite dof divided by sqrt(2), k = 2..20.
# Generated with scipy.stats.studentized_range and checked in the test suite
# against direct numerical integration of the range distribution.
NEMENYI_Q = {
    0.05: (
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878,
        3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
        3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
    ),
    0.10: (
        1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884,
        2.854606, 2.919889, 2.977768, 3.029694, 3.076733, 3.119693, 3.159199,
        3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
    ),
}


# ---------------------------------------------------------------------------
# Metrics


def auc_binary(scores, labels) -> float:
    """Mann-Whitney AUC: ``(concordant + 0.5 * tied) / (n_pos * n_neg)``."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both positive and negative instances")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def macro_auc(proba: np.ndarray, y: np.ndarray) -> float:
    """Binary AUC on the positive-class score, or the one-vs-rest macro average.

    Classes absent from ``y`` (or making up all of it) are skipped; 0.5 when
    no class can be scored.
    """
    n_classes = proba.shape[1]
    if n_classes == 2:
        try:
            return auc_binary(proba[:, 1], y == 1)
        except UndefinedMetricError:
            return 0.5
    values = []
    for c in range(n_classes):
        target = y == c
        if 0 < target.sum() < len(y):
            values.append(auc_binary(proba[:, c], target))
    return float(np.mean(values)) if values else 0.5


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    idx = np.asarray(y_true) * n_classes + np.asarray(y_pred)
    return np.bincount(idx, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def kappa(confusion) -> float:
    """Cohen's kappa of a square confusion matrix."""
    cm = np.asarray(confusion, dtype=np.float64)
    total = cm.sum()
    if total <= 0:
        raise ValueError("confusion matrix must have a positive total count")
    p_o = np.trace(cm) / total
    p_e = float(cm.sum(axis=1) @ cm.sum(axis=0)) / total**2
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))


# ---------------------------------------------------------------------------
# Classifiers


class KNNClassifier(ClassifierMixin, BaseEstimator):
    """k-nearest neighbours with a mixed distance.

    Continuous columns contribute the Euclidean distance of their z-scores
    (training statistics); discrete columns, flagged by ``discrete_mask``,
    contribute the number of mismatching coordinates.  The two parts are
    summed.  Neighbour ties are broken by training order, vote ties by the
    lower class code.
    """

    def __init__(self, n_neighbors=3, discrete_mask=None):
        self.n_neighbors = n_neighbors
        self.discrete_mask = discrete_mask

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_features=0)
        self.classes_, self.y_ = np.unique(y, return_inverse=True)
        mask = np.zeros(X.shape[1], bool) if self.discrete_mask is None else np.asarray(self.discrete_mask, bool)
        self.discrete_ = mask
        cont = X[:, ~mask]
        self.mean_ = cont.mean(axis=0)
        std = cont.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        self.X_cont_ = (cont - self.mean_) / self.scale_
        self.X_disc_ = X[:, mask]
        self.n_features_in_ = X.shape[1]
        return self

    def _distances(self, X):
        cont = (X[:, ~self.discrete_] - self.mean_) / self.scale_
        diff = cont[:, None, :] - self.X_cont_[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=2))
        if self.X_disc_.shape[1]:
            dist = dist + np.sum(X[:, self.discrete_][:, None, :] != self.X_disc_[None, :, :], axis=2)
        return dist

    def predict_proba(self, X):
        check_is_fitted(self)
        X = check_array(X, ensure_min_features=0)
        k = min(self.n_neighbors, len(self.y_))
        nearest = np.argsort(self._distances(X), axis=1, kind="stable")[:, :k]
        votes = np.zeros((X.shape[0], len(self.classes_)))
        for c in range(len(self.classes_)):
            votes[:, c] = np.sum(self.y_[nearest] == c, axis=1)
        return votes / k

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


class NaiveBayesClassifier(ClassifierMixin, BaseEstimator):
    """Naive Bayes with Gaussian likelihoods for continuous columns and
    add-one smoothed categorical likelihoods for discrete ones.

    ``cardinalities`` gives the number of categories per discrete column (used
    by the smoothing denominator); it defaults to ``max code + 1`` on the
    training data.
    """

    def __init__(self, discrete_mask=None, cardinalities=None, min_variance=1e-9):
        self.discrete_mask = discrete_mask
        self.cardinalities = cardinalities
        self.min_variance = min_variance

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_features=0)
        self.classes_, yc = np.unique(y, return_inverse=True)
        n_cls = len(self.classes_)
        mask = np.zeros(X.shape[1], bool) if self.discrete_mask is None else np.asarray(self.discrete_mask, bool)
        self.discrete_ = mask
        self.log_prior_ = np.log(np.bincount(yc, minlength=n_cls) / len(yc))
        cont = X[:, ~mask]
        self.theta_ = np.array([cont[yc == c].mean(axis=0) for c in range(n_cls)])
        self.var_ = np.maximum(np.array([cont[yc == c].var(axis=0) for c in range(n_cls)]), self.min_variance)
        disc = X[:, mask].astype(np.int64)
        if self.cardinalities is None:
            cards = disc.max(axis=0) + 1 if disc.size else np.zeros(0, int)
        else:
            cards = np.asarray(self.cardinalities, dtype=np.int64)
        self.log_cat_ = []
        for j, card in enumerate(cards):
            table = np.zeros((n_cls, card))
            np.add.at(table, (yc, disc[:, j]), 1.0)
            table += 1.0
            self.log_cat_.append(np.log(table / table.sum(axis=1, keepdims=True)))
        self.n_features_in_ = X.shape[1]
        return self

    def _joint_log_likelihood(self, X):
        jll = np.tile(self.log_prior_, (X.shape[0], 1))
        cont = X[:, ~self.discrete_]
        for c in range(len(self.classes_)):
            jll[:, c] += -0.5 * np.sum(
                np.log(2.0 * np.pi * self.var_[c]) + (cont - self.theta_[c]) ** 2 / self.var_[c], axis=1
            )
        disc = X[:, self.discrete_].astype(np.int64)
        for j, table in enumerate(self.log_cat_):
            codes = np.clip(disc[:, j], 0, table.shape[1] - 1)
            jll += table[:, codes].T
        return jll

    def predict_proba(self, X):
        check_is_fitted(self)
        X = check_array(X, ensure_min_features=0)
        jll = self._joint_log_likelihood(X)
        jll -= special.logsumexp(jll, axis=1, keepdims=True)
        return np.exp(jll)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


CLASSIFIERS = ("knn", "naive_bayes")


def make_classifier(dataset, selected, classifier="knn", k=3):
    mask = [dataset.feature_kinds[j] == DISCRETE for j in selected]
    if classifier == "knn":
        return KNNClassifier(n_neighbors=k, discrete_mask=mask)
    if classifier == "naive_bayes":
        cards = [dataset.cardinalities[j] for j, m in zip(selected, mask) if m]
        return NaiveBayesClassifier(discrete_mask=mask, cardinalities=cards)
    raise ConfigurationError(f"classifier must be one of {CLASSIFIERS}, got {classifier!r}")


# ---------------------------------------------------------------------------
# Cross-validation


@dataclass
class EvalReport:
    accuracy: float
    auc: float
    kappa: float
    compactness: int
    runtime_ms: float = 0.0
    fold_details: list = field(default_factory=list)

    def metrics(self) -> dict:
        return {"accuracy": self.accuracy, "auc": self.auc, "kappa": self.kappa, "compactness": self.compactness}

    def to_dict(self) -> dict:
        return asdict(self)


def fold_indices(y, folds: int, seed: int):
    """Stratified, seeded fold assignment as a list of (train, test) index arrays."""
    skf = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="The least populated class")
        return list(skf.split(np.zeros(len(y)), y))


def evaluate(dataset, selected, classifier="knn", folds=10, seed=0, k=3, selector=None) -> EvalReport:
    """Cross-validate ``classifier`` on the columns in ``selected``.

    If ``selector`` is given it is called with each training split (a
    :class:`~lofs.dataset.Dataset`) and must return the feature indices to
    use in that fold; otherwise ``selected`` is used in every fold.  An empty
    selection falls back to predicting the training majority class.
    """
    folds = int(folds)
    if folds < 2:
        raise ConfigurationError(f"folds must be at least 2, got {folds}")
    if folds > dataset.n_instances:
        raise ConfigurationError(f"folds ({folds}) exceeds the number of instances ({dataset.n_instances})")
    if classifier not in CLASSIFIERS:
        raise ConfigurationError(f"classifier must be one of {CLASSIFIERS}, got {classifier!r}")
    selected = [int(j) for j in selected]
    for j in selected:
        if not 0 <= j < dataset.n_features:
            raise ConfigurationError(f"selected feature {j} is not in the dataset")
    start = time.perf_counter()
    y = np.asarray(dataset.y)
    n_classes = dataset.n_classes
    details = []
    for fold, (train, test) in enumerate(fold_indices(y, folds, seed)):
        cols = selected if selector is None else [int(j) for j in selector(dataset.subset(train))]
        if cols:
            clf = make_classifier(dataset, cols, classifier, k)
            clf.fit(dataset.X[train][:, cols], y[train])
            proba_known = clf.predict_proba(dataset.X[test][:, cols])
            proba = np.zeros((len(test), n_classes))
            proba[:, clf.classes_] = proba_known
            pred = clf.predict(dataset.X[test][:, cols])
            auc = macro_auc(proba, y[test])
        else:
            majority = int(np.argmax(np.bincount(y[train], minlength=n_classes)))
            pred = np.full(len(test), majority)
            auc = 0.5
        cm = confusion_matrix(y[test], pred, n_classes)
        details.append(
            {
                "fold": fold,
                "accuracy": float(np.mean(pred == y[test])),
                "auc": float(auc),
                "kappa": 0.0 if not cols else kappa(cm),
                "n_selected": len(cols),
            }
        )
    return EvalReport(
        accuracy=float(np.mean([d["accuracy"] for d in details])),
        auc=float(np.mean([d["auc"] for d in details])),
        kappa=float(np.mean([d["kappa"] for d in details])),
        compactness=len(selected),
        runtime_ms=(time.perf_counter() - start) * 1000.0,
        fold_details=details,
    )


# ---------------------------------------------------------------------------
# Friedman / Nemenyi


@dataclass
class FriedmanResult:
    ranks: np.ndarray
    avg_ranks: np.ndarray
    chi2: float
    p_value: float
    iman_davenport_F: float
    iman_davenport_p: float


def rank_rows(scores, higher_is_better=True) -> np.ndarray:
    """Per-row mid-ranks, rank 1 for the best score."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.vstack([rankdata(-row if higher_is_better else row) for row in scores])


def friedman_test(scores, higher_is_better=True) -> FriedmanResult:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 2:
        raise ConfigurationError(f"Friedman test needs N >= 2 datasets and k >= 2 algorithms, got shape {scores.shape}")
    n, k = scores.shape
    ranks = rank_rows(scores, higher_is_better)
    avg = ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * (np.sum(avg**2) - k * (k + 1) ** 2 / 4.0)
    if abs(chi2) < 1e-12:
        chi2 = 0.0
    p = chi2_sf(chi2, k - 1)
    denom = n * (k - 1) - chi2
    if denom <= 0:
        f_id, p_id = math.inf, 0.0
    else:
        f_id = (n - 1) * chi2 / denom
        p_id = 1.0 if f_id <= 0 else float(special.fdtrc(k - 1, (k - 1) * (n - 1), f_id))
    return FriedmanResult(ranks, avg, float(chi2), float(p), float(f_id), float(p_id))


def nemenyi_cd(k: int, n: int, alpha=0.05) -> float:
    """Nemenyi critical difference ``q_alpha(k) * sqrt(k(k+1)/(6N))``."""
    table = NEMENYI_Q.get(round(float(alpha), 10))
    if table is None:
        raise ConfigurationError(f"Nemenyi alpha must be 0.05 or 0.10, got {alpha}")
    if not 2 <= k <= 20:
        raise ConfigurationError(f"Nemenyi table covers 2 <= k <= 20, got k={k}")
    if n < 1:
        raise ConfigurationError(f"need at least one dataset, got N={n}")
    return table[k - 2] * math.sqrt(k * (k + 1) / (6.0 * n))


@dataclass
class ComparisonReport:
    metric: str
    algorithms: list
    datasets: list
    scores: np.ndarray
    ranks: np.ndarray
    avg_ranks: np.ndarray
    friedman_chi2: float
    friedman_p: float
    iman_davenport_F: float
    iman_davenport_p: float
    nemenyi_cd: float
    pairwise_significant: np.ndarray
    alpha: float = 0.05

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "alpha": self.alpha,
            "algorithms": list(self.algorithms),
            "datasets": list(self.datasets),
            "scores": self.scores.tolist(),
            "ranks": self.ranks.tolist(),
            "avg_ranks": self.avg_ranks.tolist(),
            "friedman_chi2": self.friedman_chi2,
            "friedman_p": self.friedman_p,
            "iman_davenport_F": _finite_or_str(self.iman_davenport_F),
            "iman_davenport_p": self.iman_davenport_p,
            "nemenyi_cd": self.nemenyi_cd,
            "pairwise_significant": self.pairwise_significant.tolist(),
        }

    def rank_table(self) -> str:
        width = max(len(a) for a in self.algorithms + ["dataset"]) + 2
        dwidth = max(len(d) for d in self.datasets + ["average"]) + 2
        lines = ["dataset".ljust(dwidth) + "".join(a.rjust(width) for a in self.algorithms)]
        for name, row in zip(self.datasets, self.ranks):
            lines.append(name.ljust(dwidth) + "".join(f"{r:.2f}".rjust(width) for r in row))
        lines.append("average".ljust(dwidth) + "".join(f"{r:.3f}".rjust(width) for r in self.avg_ranks))
        lines.append(
            f"Friedman chi2={self.friedman_chi2:.4f} p={self.friedman_p:.4g}  "
            f"Iman-Davenport F={self.iman_davenport_F:.4f} p={self.iman_davenport_p:.4g}  "
            f"Nemenyi CD={self.nemenyi_cd:.4f} (alpha={self.alpha})"
        )
        return "\n".join(lines)


def _finite_or_str(x):
    return x if math.isfinite(x) else ("Infinity" if x > 0 else "-Infinity")


def _metric_value(cell, metric):
    if isinstance(cell, EvalReport):
        return getattr(cell, metric)
    if isinstance(cell, dict):
        source = cell.get("metrics", cell)
        if metric not in source:
            raise ConfigurationError(f"report has no {metric!r} metric")
        return source[metric]
    return float(cell)


def compare(results, metric="accuracy", alpha=0.05) -> ComparisonReport:
    """Rank algorithms over datasets.

    ``results`` maps dataset name to ``{algorithm: EvalReport | report dict | score}``.
    Every (dataset, algorithm) cell must be present.
    """
    if metric not in METRICS:
        raise ConfigurationError(f"metric must be one of {METRICS}, got {metric!r}")
    datasets = list(results)
    algorithms = []
    for d in datasets:
        for a in results[d]:
            if a not in algorithms:
                algorithms.append(a)
    missing = [(d, a) for d in datasets for a in algorithms if a not in results[d]]
    if missing:
        raise IncompleteDesignError(missing)
    if len(algorithms) < 2:
        raise ConfigurationError(f"need k >= 2 algorithms to compare, got {len(algorithms)}")
    if len(datasets) < 2:
        raise ConfigurationError(f"need N >= 2 datasets to compare, got {len(datasets)}")
    scores = np.array([[_metric_value(results[d][a], metric) for a in algorithms] for d in datasets], dtype=float)
    fr = friedman_test(scores, higher_is_better=metric not in LOWER_IS_BETTER)
    k, n = len(algorithms), len(datasets)
    cd = nemenyi_cd(k, n, alpha)
    gaps = np.abs(fr.avg_ranks[:, None] - fr.avg_ranks[None, :])
    significant = gaps > cd
    np.fill_diagonal(significant, False)
    return ComparisonReport(
        metric=metric,
        algorithms=algorithms,
        datasets=datasets,
        scores=scores,
        ranks=fr.ranks,
        avg_ranks=fr.avg_ranks,
        friedman_chi2=fr.chi2,
        friedman_p=fr.p_value,
        iman_davenport_F=fr.iman_davenport_F,
        iman_davenport_p=fr.iman_davenport_p,
        nemenyi_cd=cd,
        pairwise_significant=significant,
        alpha=alpha,
    )
