"""Selectors for features that arrive one at a time.

Four algorithms share one state object and a per-run test cache:

* ``alpha_investing`` - wealth-controlled sequential regression tests,
* ``osfs`` - relevance test, then a full redundancy re-scan of the selected set,
* ``fast_osfs`` - redundancy test of the arrival first; existing features are
  re-checked only against conditioning sets that contain the arrival,
* ``saola`` - pairwise-only relevance/redundancy comparisons.

Step functions take a *source* (normally the :class:`~lofs.dataset.FeatureStream`)
so that reading an unrevealed column raises immediately.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy import special

from . import measures
from .dataset import CONTINUOUS, DISCRETE
from .exceptions import ConfigurationError
from .measures import CLASS

ALGORITHMS = ("alpha_investing", "osfs", "fast_osfs", "saola")

# Score comparisons in SAOLA treat values within this distance as equal, so
# exact copies compare equal regardless of summation order.
SCORE_TOL = 1e-12


@dataclass(frozen=True)
class SelectorConfig:
    """Parameters shared by every selector.

    ``measure=None`` picks the default for the data: G2 for OSFS/Fast-OSFS and
    MI for SAOLA on discrete data, Fisher's Z on continuous data.
    """

    alpha: float = 0.05
    max_cond_size: int = 3
    measure: str | None = None
    saola_delta: float = 0.0
    ai_w0: float = 0.5
    ai_dw: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.max_cond_size) != self.max_cond_size or self.max_cond_size < 0:
            raise ConfigurationError(f"max_cond_size must be a nonnegative integer, got {self.max_cond_size}")
        if self.measure is not None and self.measure not in measures.MEASURES:
            raise ConfigurationError(f"measure must be one of {measures.MEASURES}, got {self.measure!r}")
        if not self.ai_w0 > 0:
            raise ConfigurationError(f"ai_w0 must be positive, got {self.ai_w0}")
        if self.ai_dw < 0:
            raise ConfigurationError(f"ai_dw must be nonnegative, got {self.ai_dw}")
        if self.saola_delta < 0:
            raise ConfigurationError(f"saola_delta must be nonnegative, got {self.saola_delta}")


@dataclass
class LogEntry:
    step: int
    feature: int
    action: str  # "added" or "discarded"
    removed: tuple[int, ...] = ()
    n_tests: int = 0
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "feature": self.feature,
            "action": self.action,
            "removed_later": list(self.removed),
            "n_tests": self.n_tests,
            "stats": self.stats,
        }


class TestCache:
    """Per-run memo of test results keyed by ``(kind, x, y, sorted z)``.

    ``requested`` counts every test the algorithm asks for; ``computed``
    counts the ones that actually had to be evaluated.
    """

    __test__ = False  # keep pytest from collecting this

    def __init__(self):
        self._store = {}
        self.requested = 0
        self.computed = 0

    def get(self, key, compute):
        self.requested += 1
        try:
            return self._store[key]
        except KeyError:
            self.computed += 1
            value = self._store[key] = compute()
            return value


@dataclass
class SelectionState:
    """Running output of a selector: selected indices in selection order, the
    per-arrival log and algorithm scalars (wealth, relevance scores)."""

    algorithm: str
    measure: str
    selected: list = field(default_factory=list)
    arrival_log: list = field(default_factory=list)
    algo_state: dict = field(default_factory=dict)
    runtime_ms: float = 0.0
    cache: TestCache = field(default_factory=TestCache, repr=False)

    @property
    def n_tests(self) -> int:
        return self.cache.requested

    @property
    def n_tests_computed(self) -> int:
        return self.cache.computed

    @property
    def wealth(self) -> float:
        return float(self.algo_state["wealth"])


def default_measure(source, algorithm: str) -> str:
    if algorithm == "alpha_investing":
        return "regression"
    kinds = set(source.feature_kinds)
    if kinds <= {DISCRETE}:
        return "mi" if algorithm == "saola" else "g2"
    if kinds == {CONTINUOUS}:
        return "fisher_z"
    raise ConfigurationError(
        "dataset mixes discrete and continuous features; pick a kind inference policy "
        "or an explicit measure"
    )


def _check_measure(source, algorithm: str, measure: str) -> None:
    kinds = set(source.feature_kinds)
    if algorithm == "saola" and measure not in ("mi", "fisher_z"):
        raise ConfigurationError(f"saola supports the 'mi' and 'fisher_z' measures, not {measure!r}")
    if algorithm in ("osfs", "fast_osfs") and measure == "mi":
        raise ConfigurationError(f"{algorithm} needs an independence test ('g2', 'chi2' or 'fisher_z'), not 'mi'")
    if measure in ("chi2", "g2", "mi") and CONTINUOUS in kinds:
        raise ConfigurationError(f"measure {measure!r} needs discrete features")
    if measure == "fisher_z":
        if DISCRETE in kinds:
            raise ConfigurationError("measure 'fisher_z' needs continuous features")
        if source.n_classes != 2:
            raise ConfigurationError("measure 'fisher_z' needs a binary class")


def new_state(source, algorithm: str, config: SelectorConfig) -> SelectionState:
    """Empty state for ``algorithm`` with its measure resolved against ``source``."""
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if algorithm == "alpha_investing":
        if source.n_classes != 2:
            raise ConfigurationError("alpha_investing supports binary classes only")
        measure = "regression"
        algo_state = {"wealth": Fraction(config.ai_w0), "thresholds": []}
    else:
        measure = config.measure or default_measure(source, algorithm)
        _check_measure(source, algorithm, measure)
        algo_state = {"rel": {}} if algorithm == "saola" else {}
    return SelectionState(algorithm=algorithm, measure=measure, algo_state=algo_state)


def _independent(state, source, x, z, config) -> bool:
    z = tuple(sorted(z))
    key = ("ci", x, CLASS, z)
    res = state.cache.get(key, lambda: measures.ci_test(source, x, CLASS, z, state.measure, config.alpha))
    return not res.dependent


def _log(state, arrival, action, n_before, removed=(), **stats):
    entry = LogEntry(
        step=len(state.arrival_log) + 1,
        feature=arrival,
        action=action,
        removed=tuple(removed),
        n_tests=state.n_tests - n_before,
        stats=stats,
    )
    state.arrival_log.append(entry)
    return state


# ---------------------------------------------------------------------------
# Alpha-investing


def regression_p_value(y: np.ndarray, base: list[np.ndarray], candidate: np.ndarray) -> float:
    """p-value of adding ``candidate`` to a least-squares fit of ``y`` on
    ``base`` (intercept included), from the F statistic of the RSS change."""
    n = len(y)
    design0 = np.column_stack([np.ones(n)] + base)
    design1 = np.column_stack([design0, candidate])
    dfd = n - design1.shape[1]
    if dfd <= 0:
        return 1.0
    rss0 = _rss(design0, y)
    rss1 = _rss(design1, y)
    scale = max(rss0, 1.0)
    if rss0 - rss1 <= 1e-12 * scale:
        return 1.0
    if rss1 <= 1e-12 * scale:
        return 0.0
    f = (rss0 - rss1) / (rss1 / dfd)
    return float(special.fdtrc(1, dfd, f))


def _rss(design, y):
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(resid @ resid)


def alpha_investing_step(state, source, arrival, config) -> SelectionState:
    n_before = state.n_tests
    i = len(state.arrival_log) + 1
    wealth = state.algo_state["wealth"]
    threshold = wealth / (2 * i)
    y = np.where(np.asarray(source.y) == 1, 1.0, -1.0)

    def compute():
        base = [source.column(f) for f in state.selected]
        return regression_p_value(y, base, source.column(arrival))

    p = state.cache.get(("reg", arrival, tuple(state.selected)), compute)
    accepted = p < threshold
    if accepted:
        state.selected.append(arrival)
        wealth = wealth - threshold + Fraction(config.ai_dw)
    else:
        wealth = wealth - threshold
    state.algo_state["wealth"] = max(wealth, Fraction(0))
    state.algo_state["thresholds"].append(threshold)
    return _log(
        state, arrival, "added" if accepted else "discarded", n_before,
        p_value=p, threshold=float(threshold), wealth=float(state.algo_state["wealth"]),
    )


# ---------------------------------------------------------------------------
# OSFS and Fast-OSFS


def _redundant(state, source, x, others, config, min_size=0) -> bool:
    """True if some ``Z`` drawn from ``others`` with ``min_size <= |Z| <= max_cond_size``
    makes ``x`` independent of the class.  Subsets are visited by increasing size,
    lexicographically in ``others`` order."""
    for k in range(min_size, min(config.max_cond_size, len(others)) + 1):
        for z in combinations(others, k):
            if _independent(state, source, x, z, config):
                return True
    return False


def osfs_step(state, source, arrival, config) -> SelectionState:
    n_before = state.n_tests
    if _independent(state, source, arrival, (), config):
        return _log(state, arrival, "discarded", n_before)
    state.selected.append(arrival)
    removed = []
    # The arrival is examined first so that incumbents win ties.
    for x in [arrival] + state.selected[:-1]:
        others = [f for f in state.selected if f != x]
        if _redundant(state, source, x, others, config):
            state.selected.remove(x)
            removed.append(x)
    if arrival in removed:
        removed.remove(arrival)
        return _log(state, arrival, "discarded", n_before, removed)
    return _log(state, arrival, "added", n_before, removed)


def fast_osfs_step(state, source, arrival, config) -> SelectionState:
    n_before = state.n_tests
    if _independent(state, source, arrival, (), config):
        return _log(state, arrival, "discarded", n_before)
    prior = list(state.selected)
    if _redundant(state, source, arrival, prior, config):
        return _log(state, arrival, "discarded", n_before)
    state.selected.append(arrival)
    removed = []
    if config.max_cond_size >= 1:
        for x in prior:
            rest = [f for f in state.selected if f not in (x, arrival)]
            hit = False
            for k in range(0, min(config.max_cond_size - 1, len(rest)) + 1):
                for zp in combinations(rest, k):
                    if _independent(state, source, x, zp + (arrival,), config):
                        hit = True
                        break
                if hit:
                    break
            if hit:
                state.selected.remove(x)
                removed.append(x)
    return _log(state, arrival, "added", n_before, removed)


# ---------------------------------------------------------------------------
# SAOLA


class SaolaScorer:
    """Relevance scores and the pairwise redundancy predicate used by SAOLA
    and group-SAOLA.  Results are memoised in the run's :class:`TestCache`."""

    def __init__(self, state, source, config):
        self.state = state
        self.source = source
        self.config = config
        self.rel = state.algo_state.setdefault("rel", {})

    def _mi(self, a, b):
        key = ("mi",) + tuple(sorted((a, b), key=str))
        return self.state.cache.get(key, lambda: measures.mutual_information(self.source, a, b).value)

    def _indep(self, x, z):
        return _independent(self.state, self.source, x, (z,), self.config)

    def relevance(self, f) -> float | None:
        """Relevance of ``f`` to the class, or ``None`` if it fails the gate."""
        config = self.config
        if self.state.measure == "mi":
            score = self._mi(f, CLASS)
        else:
            if _independent(self.state, self.source, f, (), config):
                return None
            score = abs(self.state.cache.get(("corr", f), lambda: measures.correlation(self.source, f, CLASS)))
        if score <= config.saola_delta + SCORE_TOL:
            return None
        return score

    def compare(self, new, old) -> str | None:
        """``"discard"`` if ``new`` is redundant given ``old``, ``"remove"`` if
        ``old`` is redundant given ``new``, else ``None``.  Ties keep ``old``."""
        r_new, r_old = self.rel[new], self.rel[old]
        if self.state.measure == "mi":
            mi = self._mi(new, old)
            if mi >= r_new - SCORE_TOL and r_old >= r_new - SCORE_TOL:
                return "discard"
            if mi >= r_old - SCORE_TOL and r_new > r_old + SCORE_TOL:
                return "remove"
            return None
        if r_old >= r_new - SCORE_TOL and self._indep(new, old):
            return "discard"
        if r_new > r_old + SCORE_TOL and self._indep(old, new):
            return "remove"
        return None


def saola_step(state, source, arrival, config) -> SelectionState:
    n_before = state.n_tests
    scorer = SaolaScorer(state, source, config)
    score = scorer.relevance(arrival)
    if score is None:
        return _log(state, arrival, "discarded", n_before)
    scorer.rel[arrival] = score
    removed = []
    for y in list(state.selected):
        verdict = scorer.compare(arrival, y)
        if verdict == "discard":
            del scorer.rel[arrival]
            return _log(state, arrival, "discarded", n_before, removed, relevance=score, redundant_given=y)
        if verdict == "remove":
            state.selected.remove(y)
            del scorer.rel[y]
            removed.append(y)
    state.selected.append(arrival)
    return _log(state, arrival, "added", n_before, removed, relevance=score)


STEPS = {
    "alpha_investing": alpha_investing_step,
    "osfs": osfs_step,
    "fast_osfs": fast_osfs_step,
    "saola": saola_step,
}


def run_selector(dataset, stream, algorithm="fast_osfs", config=None) -> SelectionState:
    """Fold ``algorithm``'s step over every arrival of ``stream``."""
    if config is None:
        config = SelectorConfig()
    if stream.mode != "individual":
        raise ConfigurationError("run_selector needs an individual-mode stream")
    if stream.dataset is not dataset:
        raise ConfigurationError("stream was built over a different dataset")
    state = new_state(stream, algorithm, config)
    step = STEPS[algorithm]
    start = time.perf_counter()
    for arrival in stream:
        step(state, stream, arrival.feature, config)
    state.runtime_ms = (time.perf_counter() - start) * 1000.0
    return state
