"""Conditional independence measures between features and the class.

Variables are addressed by feature index or by :data:`CLASS`.  Every function
takes a *source*, either a :class:`~lofs.dataset.Dataset` or a
:class:`~lofs.dataset.FeatureStream`; reading columns through a stream is what
enforces the streaming contract for the selectors.

All logarithms are natural, so ``G2 == 2 * n * I(X;Y|Z)`` holds exactly up to
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from .dataset import DISCRETE
from .exceptions import ConfigurationError, KindError

CLASS = "class"

_CLAMP = 1.0 - 1e-12
_RIDGE = 1e-8
_COND_LIMIT = 1e10


@dataclass(frozen=True)
class CITestResult:
    """Outcome of one independence test.

    For Fisher's Z, ``dof`` is 0 and ``statistic`` is ``sqrt(n-|z|-3)*|zeta|``.
    """

    statistic: float
    dof: int
    p_value: float
    dependent: bool
    reliable: bool


@dataclass(frozen=True)
class MIResult:
    value: float


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts indexed ``[z-configuration, x-value, y-value]``.

    Only z-configurations that occur in the data are kept.
    """

    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @cached_property
    def config_totals(self) -> np.ndarray:
        return self.counts.sum(axis=(1, 2))

    @cached_property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=2)

    @cached_property
    def col_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @cached_property
    def expected(self) -> np.ndarray:
        tot = self.config_totals[:, None, None]
        return self.row_marginals[:, :, None] * self.col_marginals[:, None, :] / tot

    @cached_property
    def dof(self) -> int:
        # Degenerate (all-zero) rows and columns are dropped per configuration.
        rx = np.count_nonzero(self.row_marginals, axis=1)
        ry = np.count_nonzero(self.col_marginals, axis=1)
        return int(np.sum((np.maximum(rx, 1) - 1) * (np.maximum(ry, 1) - 1)))


def chi2_sf(x: float, dof: float) -> float:
    """Upper tail of the chi-square distribution (regularized upper gamma)."""
    if dof <= 0:
        return 1.0
    if x <= 0:
        return 1.0
    return float(special.gammaincc(dof / 2.0, x / 2.0))


def normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _discrete_codes(source, v):
    if v == CLASS:
        return np.asarray(source.y, dtype=np.int64), source.n_classes
    if source.feature_kinds[v] != DISCRETE:
        raise KindError(f"feature {v} is continuous; this measure needs discrete variables")
    return source.column(v).astype(np.int64), source.cardinalities[v]


def _check_args(x, y, z):
    z = tuple(z)
    if x == y:
        raise ConfigurationError("x and y must be different variables")
    if x in z or y in z:
        raise ConfigurationError("x and y must not be part of the conditioning set")
    if CLASS in z:
        raise ConfigurationError("the class cannot be a conditioning variable")
    return z


def build_table(source, x, y, z=()) -> ContingencyTable:
    """Tally joint counts of discrete ``x`` and ``y`` per configuration of ``z``."""
    z = _check_args(x, y, z)
    xv, rx = _discrete_codes(source, x)
    yv, ry = _discrete_codes(source, y)
    if z:
        key = np.zeros(len(xv), dtype=np.int64)
        radix = 1
        for v in z:
            codes, card = _discrete_codes(source, v)
            if radix * card >= 2**62:
                zs = np.column_stack([_discrete_codes(source, w)[0] for w in z])
                _, cfg = np.unique(zs, axis=0, return_inverse=True)
                break
            key = key * card + codes
            radix *= card
        else:
            _, cfg = np.unique(key, return_inverse=True)
        cfg = cfg.ravel()
        n_cfg = int(cfg.max()) + 1
    else:
        cfg = np.zeros(len(xv), dtype=np.int64)
        n_cfg = 1
    flat = (cfg * rx + xv) * ry + yv
    counts = np.bincount(flat, minlength=n_cfg * rx * ry).reshape(n_cfg, rx, ry)
    return ContingencyTable(counts)


def _as_table(table) -> ContingencyTable:
    if isinstance(table, ContingencyTable):
        return table
    counts = np.asarray(table)
    if counts.ndim == 2:
        counts = counts[None]
    return ContingencyTable(counts)


def _finish(statistic, table: ContingencyTable, alpha) -> CITestResult:
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    dof = table.dof
    statistic = max(float(statistic), 0.0)
    if dof == 0:
        return CITestResult(statistic, 0, 1.0, False, True)
    p = min(max(chi2_sf(statistic, dof), 0.0), 1.0)
    reliable = table.n >= 5 * dof
    return CITestResult(statistic, dof, p, reliable and p < alpha, reliable)


def g2_test(table, alpha=0.05) -> CITestResult:
    """Likelihood-ratio test of independence, ``2 * sum(obs * ln(obs/exp))``.

    Accepts a :class:`ContingencyTable` or a plain 2-D/3-D count array.
    Tests with fewer than ``5 * dof`` instances are unreliable and report
    independence.
    """
    table = _as_table(table)
    obs = table.counts.astype(np.float64)
    mask = obs > 0
    stat = 2.0 * np.sum(obs[mask] * np.log(obs[mask] / table.expected[mask]))
    return _finish(stat, table, alpha)


def chi2_test(table, alpha=0.05) -> CITestResult:
    """Pearson chi-square test; same dof, reliability and p-value rules as G2."""
    table = _as_table(table)
    obs = table.counts.astype(np.float64)
    exp = table.expected
    mask = exp > 0
    stat = np.sum((obs[mask] - exp[mask]) ** 2 / exp[mask])
    return _finish(stat, table, alpha)


def _continuous(source, v):
    if v == CLASS:
        if source.n_classes != 2:
            raise ConfigurationError("Fisher's Z accepts the class only when it is binary")
        return np.asarray(source.y, dtype=np.float64)
    if source.feature_kinds[v] == DISCRETE:
        raise KindError(f"feature {v} is discrete; Fisher's Z needs continuous variables")
    return source.column(v)


def partial_correlation(data: np.ndarray) -> float:
    """Partial correlation of columns 0 and 1 of ``data`` given the remaining
    columns, from the inverse of the correlation matrix.

    Returns ``nan`` when the correlation matrix cannot be inverted even after
    adding a small ridge to its diagonal.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(data, rowvar=False)
    corr = np.atleast_2d(corr)
    if not np.all(np.isfinite(corr)):
        return math.nan
    if data.shape[1] == 2:
        return float(np.clip(corr[0, 1], -_CLAMP, _CLAMP))
    if np.linalg.cond(corr) > _COND_LIMIT:
        corr = corr + _RIDGE * np.eye(corr.shape[0])
        if np.linalg.cond(corr) > 1.0 / np.finfo(float).eps:
            return math.nan
    try:
        prec = np.linalg.inv(corr)
    except np.linalg.LinAlgError:
        return math.nan
    denom = prec[0, 0] * prec[1, 1]
    if not denom > 0:
        return math.nan
    r = -prec[0, 1] / math.sqrt(denom)
    return float(np.clip(r, -_CLAMP, _CLAMP))


def fisher_z_test(source, x, y, z=(), alpha=0.05) -> CITestResult:
    z = _check_args(x, y, z)
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    cols = [_continuous(source, x), _continuous(source, y)] + [_continuous(source, v) for v in z]
    n = len(cols[0])
    if n <= len(z) + 3:
        return CITestResult(0.0, 0, 1.0, False, False)
    r = partial_correlation(np.column_stack(cols))
    if math.isnan(r):
        return CITestResult(0.0, 0, 1.0, False, False)
    stat = math.sqrt(n - len(z) - 3) * abs(math.atanh(r))
    p = min(max(math.erfc(stat / math.sqrt(2.0)), 0.0), 1.0)
    return CITestResult(stat, 0, p, p < alpha, True)


def mutual_information(source, x, y, z=()) -> MIResult:
    """Plug-in (conditional) mutual information in nats."""
    return MIResult(table_mutual_information(build_table(source, x, y, z)))


def table_mutual_information(table) -> float:
    """``sum p(x,y,z) ln[p(x,y|z) / (p(x|z) p(y|z))]`` over nonzero cells."""
    table = _as_table(table)
    obs = table.counts.astype(np.float64)
    n_z = table.config_totals.astype(np.float64)[:, None, None]
    p_xyz = obs / obs.sum()
    p_xy_z = obs / n_z
    p_x_z = table.row_marginals[:, :, None] / n_z
    p_y_z = table.col_marginals[:, None, :] / n_z
    indep = p_x_z * p_y_z
    mask = obs > 0
    value = float(np.sum(p_xyz[mask] * np.log(p_xy_z[mask] / indep[mask])))
    return max(value, 0.0)


def correlation(source, x, y) -> float:
    """Pearson correlation; 0 when either variable is constant."""
    a, b = _continuous(source, x), _continuous(source, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.corrcoef(a, b)[0, 1]
    return float(r) if np.isfinite(r) else 0.0


MEASURES = ("chi2", "g2", "fisher_z", "mi")


def ci_test(source, x, y, z=(), measure="g2", alpha=0.05) -> CITestResult:
    """Run the named independence test of ``x`` and ``y`` given ``z``."""
    if measure == "g2":
        return g2_test(build_table(source, x, y, z), alpha)
    if measure == "chi2":
        return chi2_test(build_table(source, x, y, z), alpha)
    if measure == "fisher_z":
        return fisher_z_test(source, x, y, z, alpha)
    if measure == "mi":
        raise ConfigurationError("'mi' is a relevance score, not an independence test; use 'g2'")
    raise ConfigurationError(f"unknown measure {measure!r}; expected one of {MEASURES}")
