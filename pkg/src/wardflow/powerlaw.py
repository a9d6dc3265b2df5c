"""Degree-tail exponent fitting plus the strength and betweenness regressions.

The tail model is the discrete power law p(x) ~ x^-gamma on integers
x >= xmin, normalized by the Hurwitz zeta function. gamma is the exact
maximum-likelihood estimate (numerical maximization of the zeta
log-likelihood); xmin is chosen by scanning observed values for the
smallest Kolmogorov-Smirnov distance between the empirical tail CDF and
the fitted model. Goodness of fit uses the semi-parametric bootstrap:
synthesize datasets from the fitted model (empirical resampling below
xmin), refit each with the same policy, and report the fraction of
replicates whose KS distance reaches the observed one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from . import metrics as metrics_mod
from .metrics import NodeMetrics
from .network import TransferNetwork

SCAN = "scan"
FIXED = "fixed"

STRENGTH_DEGREE = "strength-degree-powerlaw"
BETWEENNESS_DEGREE = "betweenness-degree-quadratic"
KNN_DEGREE = "knn-degree-linear"

_GAMMA_LO = 1.0 + 1e-6
_GAMMA_HI = 64.0
_GOLDEN_ITERS = 64
_DENSE_CAP = 8192
_CANDIDATE_CHUNK = 256
_TABLE_FLOOR = 1e-6
_TABLE_CAP = 1 << 21


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    xmin: int
    n_tail: int
    ks_stat: float
    xmin_policy: str = SCAN
    p_value: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    n_bootstrap: int = 0
    seed: int | None = None


@dataclass(frozen=True)
class RegressionFit:
    kind: str
    coefficients: tuple[float, ...]
    baseline: float | None
    residual_sd: float
    outliers: tuple[tuple[str, float], ...]
    outlier_threshold: float = 2.0


def _prepare(samples: Iterable[int]) -> np.ndarray:
    x = np.asarray(sorted(samples), dtype=np.int64)
    if len(x) == 0:
        raise ValueError("no samples")
    if x[0] < 1:
        raise ValueError("samples must be positive integers")
    return x


def _mle_gamma(n_tail: np.ndarray, log_sum: np.ndarray, xmin: np.ndarray) -> np.ndarray:
    """Maximize -n*log(zeta(g, xmin)) - g*log_sum per candidate (golden section).

    The log-likelihood is strictly concave in gamma, so the section search
    converges to the unique maximum.
    """
    lo = np.full(len(xmin), _GAMMA_LO)
    hi = np.full(len(xmin), _GAMMA_HI)
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    q = xmin.astype(float)

    def loglik(g: np.ndarray) -> np.ndarray:
        return -n_tail * np.log(hurwitz_zeta(g, q)) - g * log_sum

    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = loglik(c), loglik(d)
    for _ in range(_GOLDEN_ITERS):
        shrink_right = fc > fd
        hi = np.where(shrink_right, d, hi)
        lo = np.where(shrink_right, lo, c)
        c = hi - inv_phi * (hi - lo)
        d = lo + inv_phi * (hi - lo)
        fc, fd = loglik(c), loglik(d)
    return (lo + hi) / 2.0


def _zeta_at(gammas: np.ndarray, values: np.ndarray, csum: np.ndarray, norms: np.ndarray, xmin: np.ndarray) -> np.ndarray:
    """zeta(gamma_j, values_k + 1) for a chunk of candidates, shape (j, k).

    Uses zeta(g, u+1) = zeta(g, xmin) - sum_{i=xmin}^{u} i^-g, with the inner
    sums read from per-row cumulative power tables; values beyond the dense
    table fall back to direct Hurwitz zeta calls. Entries with values below
    a row's xmin are garbage and must be masked by the caller.
    """
    dense_limit = csum.shape[1]  # table covers integers 1..dense_limit
    inside = values <= dense_limit
    rows = np.arange(len(gammas))
    out = np.empty((len(gammas), len(values)))
    if inside.any():
        vi = values[inside].astype(np.int64)
        prefix_hi = csum[:, vi - 1]
        # sum over 1..xmin-1 = sum over 1..xmin minus xmin^-g (works for xmin=1)
        xm_idx = np.minimum(xmin.astype(np.int64), dense_limit) - 1
        prefix_lo = csum[rows, xm_idx] - np.exp(-gammas * np.log(xmin.astype(float)))
        out[:, inside] = norms[:, None] - (prefix_hi - prefix_lo[:, None])
    if (~inside).any():
        vo = values[~inside].astype(float)
        out[:, ~inside] = hurwitz_zeta(gammas[:, None], vo[None, :] + 1.0)
    return out


def _ks_distances(x: np.ndarray, uniq: np.ndarray, counts_le: np.ndarray,
                  xmin: np.ndarray, first_idx: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """KS distance per (xmin, gamma) candidate against the empirical tail CDF."""
    n = len(x)
    n_tail = (n - first_idx).astype(float)
    dense_limit = int(min(uniq[-1], _DENSE_CAP))
    log_ints = np.log(np.arange(1, dense_limit + 1, dtype=float))

    ks = np.empty(len(xmin))
    for start in range(0, len(xmin), _CANDIDATE_CHUNK):
        stop = min(start + _CANDIDATE_CHUNK, len(xmin))
        g = gammas[start:stop]
        xm = xmin[start:stop]
        csum = np.cumsum(np.exp(-g[:, None] * log_ints[None, :]), axis=1)
        norms = hurwitz_zeta(g, xm.astype(float))
        z = _zeta_at(g, uniq, csum, norms, xm)
        model_cdf = 1.0 - z / norms[:, None]
        emp_cdf = (counts_le[None, :] - first_idx[start:stop, None]) / n_tail[start:stop, None]
        diff = np.abs(emp_cdf - model_cdf)
        diff[uniq[None, :] < xm[:, None]] = -np.inf
        ks[start:stop] = diff.max(axis=1)
    return ks


def fit_tail(samples: Iterable[int], xmin: int | None = None) -> PowerLawFit:
    """Fit the discrete power-law tail; xmin=None scans all observed values.

    Under the scan, the chosen xmin minimizes the KS distance, with ties
    broken toward the smaller xmin. Raises ValueError when fewer than two
    distinct values remain at or above the threshold.
    """
    x = _prepare(samples)
    n = len(x)
    log_x = np.log(x.astype(float))
    suffix_log_sum = np.concatenate([np.cumsum(log_x[::-1])[::-1], [0.0]])
    uniq, first_idx = np.unique(x, return_index=True)
    counts_le = np.searchsorted(x, uniq, side="right")

    if xmin is None:
        if len(uniq) < 2:
            raise ValueError("degenerate tail: fewer than 2 distinct values")
        cand = uniq[:-1]
        cand_first = first_idx[:-1]
        policy = SCAN
    else:
        if xmin < 1:
            raise ValueError("xmin must be a positive integer")
        if xmin < int(x[0]):
            raise ValueError(f"xmin {xmin} below smallest observed value {int(x[0])}")
        pos = int(np.searchsorted(x, xmin, side="left"))
        tail_uniq = uniq[uniq >= xmin]
        if n - pos < 2:
            raise ValueError("too few tail samples (n_tail < 2)")
        if len(tail_uniq) < 2:
            raise ValueError("degenerate tail: fewer than 2 distinct values above xmin")
        cand = np.array([xmin], dtype=np.int64)
        cand_first = np.array([pos], dtype=np.int64)
        policy = FIXED

    n_tail = (n - cand_first).astype(float)
    gammas = _mle_gamma(n_tail, suffix_log_sum[cand_first], cand)
    ks = _ks_distances(x, uniq, counts_le, cand, cand_first, gammas)
    best = int(np.argmin(ks))  # argmin keeps the first (smallest) xmin on ties
    return PowerLawFit(
        gamma=float(gammas[best]),
        xmin=int(cand[best]),
        n_tail=int(n_tail[best]),
        ks_stat=float(ks[best]),
        xmin_policy=policy,
    )


def sample_tail(gamma: float, xmin: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF samples from the fitted discrete power law.

    A cumulative table covers the bulk of the distribution; draws deeper in
    the tail fall back to bisection on the Hurwitz-zeta CCDF.
    """
    norm = float(hurwitz_zeta(gamma, xmin))
    length = 1024
    while True:
        ints = np.arange(xmin, xmin + length, dtype=float)
        ccdf = 1.0 - np.cumsum(ints ** -gamma) / norm  # ccdf[i] = P(X >= xmin+i+1)
        if ccdf[-1] <= _TABLE_FLOOR or length >= _TABLE_CAP:
            break
        length *= 2

    w = 1.0 - rng.random(size)  # in (0, 1]
    idx = np.searchsorted(-ccdf, -w, side="left")
    out = xmin + idx
    deep = idx >= length
    if deep.any():
        out[deep] = _bisect_tail(gamma, xmin + length, norm, w[deep])
    return out.astype(np.int64)


def _bisect_tail(gamma: float, start: int, norm: float, w: np.ndarray) -> np.ndarray:
    lo = np.full(len(w), start, dtype=np.int64)
    hi = lo.copy()
    for _ in range(64):
        ccdf = hurwitz_zeta(gamma, hi + 1.0) / norm
        grow = ccdf > w
        if not grow.any():
            break
        hi[grow] = hi[grow] * 2 + 1
    while np.any(hi > lo):
        mid = (lo + hi) // 2
        go_up = hurwitz_zeta(gamma, mid + 1.0) / norm > w
        lo = np.where(go_up, mid + 1, lo)
        hi = np.where(go_up, hi, mid)
    return lo


def _replicate_rng(seed: int, op_tag: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, op_tag, index)))


def _refit(replicate: np.ndarray, fit: PowerLawFit) -> PowerLawFit:
    fixed = fit.xmin if fit.xmin_policy == FIXED else None
    return fit_tail(replicate, xmin=fixed)


def gof_pvalue(fit: PowerLawFit, samples: Iterable[int], n_boot: int, seed: int) -> float:
    """Semi-parametric bootstrap p-value for the fitted tail model.

    p is the fraction of synthetic replicates whose refit KS distance is at
    least the observed one; deterministic given the seed. Replicates that
    fail to refit are excluded; more than 10% failures is an error.
    """
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    x = _prepare(samples)
    below = x[x < fit.xmin]
    n = len(x)
    p_below = len(below) / n

    exceed = 0
    failed = 0
    for i in range(n_boot):
        rng = _replicate_rng(seed, 1, i)
        n_below = rng.binomial(n, p_below) if len(below) else 0
        parts = []
        if n_below:
            parts.append(rng.choice(below, size=n_below, replace=True))
        if n - n_below:
            parts.append(sample_tail(fit.gamma, fit.xmin, n - n_below, rng))
        replicate = np.concatenate(parts)
        try:
            refit = _refit(replicate, fit)
        except ValueError:
            failed += 1
            continue
        if refit.ks_stat >= fit.ks_stat:
            exceed += 1
    if failed > 0.1 * n_boot:
        raise ValueError(f"{failed}/{n_boot} bootstrap replicates failed to refit")
    usable = n_boot - failed
    return exceed / usable


def bootstrap_ci(samples: Iterable[int], n_boot: int, seed: int, level: float = 0.95,
                 xmin: int | None = None) -> tuple[float, float]:
    """Nonparametric percentile interval for gamma under resample-and-refit."""
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    x = _prepare(samples)
    reference = fit_tail(x, xmin=xmin)
    gammas = []
    failed = 0
    for i in range(n_boot):
        rng = _replicate_rng(seed, 2, i)
        replicate = x[rng.integers(0, len(x), size=len(x))]
        try:
            gammas.append(_refit(replicate, reference).gamma)
        except ValueError:
            failed += 1
    if failed > 0.1 * n_boot:
        raise ValueError(f"{failed}/{n_boot} bootstrap replicates failed to refit")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(np.asarray(gammas), [alpha, 1.0 - alpha])
    # the interval always brackets the point estimate
    return min(float(lo), reference.gamma), max(float(hi), reference.gamma)


def analyze_tail(samples: Iterable[int], n_boot: int, seed: int, level: float = 0.95) -> PowerLawFit:
    """Scan-fit the tail and, when n_boot > 0, attach p-value and CI."""
    import dataclasses

    fit = fit_tail(samples)
    if n_boot < 1:
        return dataclasses.replace(fit, seed=seed)
    p = gof_pvalue(fit, samples, n_boot, seed)
    lo, hi = bootstrap_ci(samples, n_boot, seed, level=level)
    return dataclasses.replace(fit, p_value=p, ci_low=lo, ci_high=hi, n_bootstrap=n_boot, seed=seed)


def _ols_outliers(design: np.ndarray, y: np.ndarray, labels: list[str],
                  threshold: float) -> tuple[np.ndarray, float, tuple[tuple[str, float], ...]]:
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = len(y) - design.shape[1]
    if dof <= 0:
        return coef, 0.0, ()
    sigma = math.sqrt(float(resid @ resid) / dof)
    if sigma < 1e-12:
        return coef, sigma, ()
    # hat-matrix diagonal for internally studentized residuals
    gram_inv = np.linalg.pinv(design.T @ design)
    leverage = np.einsum("ij,jk,ik->i", design, gram_inv, design)
    scale = sigma * np.sqrt(np.clip(1.0 - leverage, 1e-12, None))
    studentized = resid / scale
    flagged = [
        (labels[i], float(studentized[i]))
        for i in range(len(labels))
        if abs(studentized[i]) > threshold
    ]
    flagged.sort(key=lambda item: (-abs(item[1]), item[0]))
    return coef, sigma, tuple(flagged)


def fit_strength_degree(net: TransferNetwork, threshold: float = 2.0) -> RegressionFit:
    """OLS of ln(strength) on ln(degree); the slope is the growth exponent.

    The baseline records the mean edge weight, i.e. the strength a node
    would have if weights were uncorrelated with degree (s = w_mean * k).
    """
    degree_map = metrics_mod.degrees(net)
    strength_map = metrics_mod.strengths(net)
    labels = [node for node in net.sorted_nodes() if degree_map[node][0] >= 1]
    if len(labels) < 3:
        raise ValueError("need at least 3 nodes with degree >= 1")
    k = np.array([degree_map[node][0] for node in labels], dtype=float)
    s = np.array([strength_map[node][0] for node in labels], dtype=float)
    design = np.column_stack([np.log(k), np.ones(len(k))])
    coef, sigma, outliers = _ols_outliers(design, np.log(s), labels, threshold)
    baseline = net.total_weight / net.edge_count
    return RegressionFit(STRENGTH_DEGREE, (float(coef[0]), float(coef[1])), baseline,
                         sigma, outliers, threshold)


def fit_betweenness_degree(node_metrics: Mapping[str, NodeMetrics], threshold: float = 2.0) -> RegressionFit:
    """Quadratic fit of betweenness on degree with studentized outlier flags.

    Positive residuals mark nodes with more betweenness than their degree
    predicts (bottleneck-like), negative ones the opposite.
    """
    labels = sorted(node_metrics)
    if len(labels) < 4:
        raise ValueError("need at least 4 nodes")
    k = np.array([node_metrics[label].degree for label in labels], dtype=float)
    b = np.array([node_metrics[label].betweenness for label in labels], dtype=float)
    design = np.column_stack([k**2, k, np.ones(len(k))])
    if np.linalg.matrix_rank(design) < 3:
        raise ValueError("rank-deficient design: degrees span fewer than 3 values")
    coef, sigma, outliers = _ols_outliers(design, b, labels, threshold)
    return RegressionFit(BETWEENNESS_DEGREE, tuple(float(c) for c in coef), None,
                         sigma, outliers, threshold)


def fit_knn_degree(net: TransferNetwork, threshold: float = 2.0) -> RegressionFit:
    """Linear fit through the k_nn(k) curve points."""
    _, curve, _ = metrics_mod.knn(net)
    if len(curve) < 2:
        raise ValueError("need at least 2 distinct degrees in the k_nn curve")
    labels = [f"k={k}" for k in curve]
    k = np.array(list(curve.keys()), dtype=float)
    v = np.array(list(curve.values()), dtype=float)
    design = np.column_stack([k, np.ones(len(k))])
    coef, sigma, outliers = _ols_outliers(design, v, labels, threshold)
    return RegressionFit(KNN_DEGREE, (float(coef[0]), float(coef[1])), None,
                         sigma, outliers, threshold)
