"""Estimation and simulation of AR, SETAR and smooth-transition AR models.

SETAR thresholds come from an exhaustive grid over observed threshold-variable
values (trimmed so every regime keeps a minimum fraction of rows), with
regime-wise OLS per candidate.  Smooth-transition models are estimated in two
stages: a (gamma, c) grid where the remaining coefficients solve by OLS,
followed by a damped Gauss-Newton refinement of all parameters jointly.  Both
grids share batched segment/Gram machinery so a full search stays fast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ExplosivePath,
    NoFeasibleThreshold,
    OrderTooLarge,
    RankDeficient,
    SeriesTooShort,
    SingularJacobian,
    NonFiniteResidual,
    TooShort,
)
from .regression import nls_fit, ols_fit
from .selection import aic, bic
from .series import lag_design, series_values

TIME = "time"
LAGGED_VALUE = "lagged_value"

LOGISTIC = "logistic"
EXPONENTIAL = "exponential"

_EXPLOSION_LIMIT = 1e8
_EIG_RATIO = 1e-12
_GRID_CHUNK = 8192


def logistic_transition(z, gamma: float, c: float):
    """G(z; gamma, c) = 1 / (1 + exp(-gamma (z - c))), stable for large |arg|."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    arg = gamma * (np.asarray(z, dtype=float) - c)
    out = np.empty_like(arg)
    pos = arg >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arg[pos]))
    expa = np.exp(arg[~pos])
    out[~pos] = expa / (1.0 + expa)
    if out.ndim == 0 or np.isscalar(z):
        return float(out)
    return out


def exponential_transition(z, gamma: float, c: float):
    """G(z; gamma, c) = 1 - exp(-gamma (z - c)^2)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    arg = np.asarray(z, dtype=float) - c
    out = 1.0 - np.exp(-gamma * arg * arg)
    if out.ndim == 0 or np.isscalar(z):
        return float(out)
    return out


@dataclass(frozen=True)
class TransitionSpec:
    """One smooth transition: kind, steepness gamma and location c."""

    kind: str
    gamma: float
    c: float

    def __post_init__(self):
        if self.kind not in (LOGISTIC, EXPONENTIAL):
            raise ValueError(f"unknown transition kind {self.kind!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def weights(self, z):
        if self.kind == LOGISTIC:
            return logistic_transition(z, self.gamma, self.c)
        return exponential_transition(z, self.gamma, self.c)


@dataclass(frozen=True)
class ThresholdVariable:
    """What the regimes switch on: calendar time or a lagged series value."""

    kind: str = TIME
    delay: int = 1

    def __post_init__(self):
        if self.kind not in (TIME, LAGGED_VALUE):
            raise ValueError(f"unknown threshold variable kind {self.kind!r}")
        if self.kind == LAGGED_VALUE and self.delay < 1:
            raise ValueError("delay must be >= 1")


def _threshold_row_values(tv: ThresholdVariable, x: np.ndarray, order: int) -> np.ndarray:
    """Threshold-variable value for each design row (response at t = order+1..n)."""
    n = len(x)
    if tv.kind == TIME:
        return np.arange(order + 1, n + 1, dtype=float)
    if tv.delay > order:
        raise ValueError(f"delay {tv.delay} exceeds order {order}")
    return x[order - tv.delay : n - tv.delay]


@dataclass(frozen=True)
class RegimeModel:
    """Fitted AR / SETAR / LSTAR / ESTAR record.

    For hard-threshold kinds ``regimes`` holds the per-regime coefficient
    vectors low to high.  For smooth kinds the first entry is the base block
    and later entries the additive transition blocks of the model equation.
    Each vector is (intercept, lag1, ..., lag_order).
    """

    kind: str
    order: int
    regimes: tuple[np.ndarray, ...]
    thresholds: np.ndarray
    transitions: tuple[TransitionSpec, ...]
    threshold_variable: ThresholdVariable
    rss: float
    fitted: np.ndarray
    residuals: np.ndarray
    regime_proportions: np.ndarray
    standard_errors: np.ndarray | None = None
    parameter_names: tuple[str, ...] | None = None
    converged: bool = True

    def __post_init__(self):
        thresholds = np.asarray(self.thresholds, dtype=float)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "regimes", tuple(np.asarray(r, float) for r in self.regimes))
        props = np.asarray(self.regime_proportions, dtype=float)
        object.__setattr__(self, "regime_proportions", props)
        if np.any(np.diff(thresholds) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if len(props) and abs(props.sum() - 1.0) > 1e-12:
            raise ValueError("regime proportions must sum to 1")

    @property
    def n_parameters(self) -> int:
        """Coefficients plus thresholds plus transition steepness parameters."""
        return sum(len(r) for r in self.regimes) + len(self.thresholds) + len(self.transitions)

    @property
    def label(self) -> str:
        if self.kind == "ar":
            return f"ar({self.order})"
        return f"{self.kind}-{len(self.regimes)}regime({self.order})"

    def one_step(self, series) -> tuple[np.ndarray, np.ndarray]:
        return one_step_fitted(self, series)


def _regime_assignment(thresholds: np.ndarray, z: np.ndarray) -> np.ndarray:
    # value exactly at a threshold goes to the upper regime
    return np.searchsorted(thresholds, z, side="right")


def _predict_rows(model: RegimeModel, design: np.ndarray, z: np.ndarray) -> np.ndarray:
    if model.kind == "ar":
        return design @ model.regimes[0]
    if model.kind == "setar":
        coefs = np.vstack(model.regimes)
        idx = _regime_assignment(model.thresholds, z)
        return np.einsum("ij,ij->i", design, coefs[idx])
    fitted = design @ model.regimes[0]
    for block, spec in zip(model.regimes[1:], model.transitions):
        fitted = fitted + spec.weights(z) * (design @ block)
    return fitted


def one_step_fitted(model: RegimeModel, series) -> tuple[np.ndarray, np.ndarray]:
    """In-sample one-step-ahead predictions of ``model`` on ``series``."""
    x = series_values(series)
    if len(x) <= model.order:
        raise SeriesTooShort(f"need more than {model.order} observations")
    design, y = lag_design(x, model.order)
    z = _threshold_row_values(model.threshold_variable, x, model.order)
    fitted = _predict_rows(model, design, z)
    return fitted, y - fitted


def _finish_model(
    kind: str,
    order: int,
    regimes: Sequence[np.ndarray],
    thresholds,
    transitions: Sequence[TransitionSpec],
    tv: ThresholdVariable,
    series_vals: np.ndarray,
    standard_errors=None,
    parameter_names=None,
    converged: bool = True,
) -> RegimeModel:
    """Assemble the record, computing fitted/residuals through the shared path."""
    thresholds = np.asarray(thresholds, dtype=float)
    z = _threshold_row_values(tv, series_vals, order)
    if len(thresholds):
        counts = np.bincount(
            _regime_assignment(thresholds, z), minlength=len(thresholds) + 1
        )
        proportions = counts / counts.sum()
    else:
        proportions = np.array([1.0])
    probe = RegimeModel(
        kind=kind,
        order=order,
        regimes=tuple(regimes),
        thresholds=thresholds,
        transitions=tuple(transitions),
        threshold_variable=tv,
        rss=0.0,
        fitted=np.empty(0),
        residuals=np.empty(0),
        regime_proportions=proportions,
        standard_errors=standard_errors,
        parameter_names=parameter_names,
        converged=converged,
    )
    fitted, residuals = one_step_fitted(probe, series_vals)
    return RegimeModel(
        kind=kind,
        order=order,
        regimes=tuple(regimes),
        thresholds=thresholds,
        transitions=tuple(transitions),
        threshold_variable=tv,
        rss=float(residuals @ residuals),
        fitted=fitted,
        residuals=residuals,
        regime_proportions=proportions,
        standard_errors=standard_errors,
        parameter_names=parameter_names,
        converged=converged,
    )


def _ar_names(order: int, prefix: str = "") -> list[str]:
    return [f"{prefix}intercept"] + [f"{prefix}lag{i}" for i in range(1, order + 1)]


def fit_ar(series, order: int) -> RegimeModel:
    """Single-regime linear autoregression of the given order."""
    x = series_values(series)
    design, y = lag_design(x, order)
    fit = ols_fit(design, y)
    return _finish_model(
        kind="ar",
        order=order,
        regimes=(fit.coefficients,),
        thresholds=np.empty(0),
        transitions=(),
        tv=ThresholdVariable(TIME),
        series_vals=x,
        standard_errors=fit.standard_errors,
        parameter_names=tuple(_ar_names(order)),
    )


@dataclass(frozen=True)
class OrderSelection:
    """AIC/BIC per candidate order, scored on the shared trimmed sample."""

    rows: tuple[tuple[int, float, float], ...]
    best_aic: int
    best_bic: int


def select_ar_order(series, max_order: int = 20) -> OrderSelection:
    """Score AR(0..max_order) on the common sample and pick the argmins."""
    x = series_values(series)
    n = len(x)
    if n <= max_order + 1:
        raise OrderTooLarge(f"max_order {max_order} too large for {n} observations")
    rows = []
    for order in range(max_order + 1):
        design, y = lag_design(x, order)
        trim = max_order - order
        fit = ols_fit(design[trim:], y[trim:])
        k = order + 1
        rows.append((order, aic(fit.rss, len(y) - trim, k), bic(fit.rss, len(y) - trim, k)))
    best_aic = min(rows, key=lambda r: r[1])[0]
    best_bic = min(rows, key=lambda r: r[2])[0]
    return OrderSelection(rows=tuple(rows), best_aic=best_aic, best_bic=best_bic)


# ---------------------------------------------------------------------------
# batched segment OLS for threshold grids
# ---------------------------------------------------------------------------


def _prefix_stats(design: np.ndarray, y: np.ndarray):
    rows, k = design.shape
    prods = design[:, :, None] * design[:, None, :]
    sxx = np.vstack([np.zeros((1, k, k)), np.cumsum(prods, axis=0)])
    sxy = np.vstack([np.zeros((1, k)), np.cumsum(design * y[:, None], axis=0)])
    syy = np.concatenate([[0.0], np.cumsum(y * y)])
    return sxx, sxy, syy


def _segment_rss(sxx, sxy, syy, starts: np.ndarray, stops: np.ndarray) -> np.ndarray:
    """RSS of an OLS fit on each half-open sorted-row segment; inf if infeasible."""
    xx = sxx[stops] - sxx[starts]
    xy = sxy[stops] - sxy[starts]
    yy = syy[stops] - syy[starts]
    k = xx.shape[-1]
    counts = stops - starts
    eigs = np.linalg.eigvalsh(xx)
    feasible = (counts > k) & (eigs[:, 0] > eigs[:, -1] * _EIG_RATIO) & (eigs[:, -1] > 0)
    rss = np.full(len(starts), np.inf)
    if np.any(feasible):
        beta = np.linalg.solve(xx[feasible], xy[feasible][..., None])[..., 0]
        vals = yy[feasible] - np.einsum("mk,mk->m", xy[feasible], beta)
        vals = np.where(np.isfinite(vals), np.maximum(vals, 0.0), np.inf)
        rss[feasible] = vals
    return rss


def _split_positions(z_sorted: np.ndarray, min_count: int) -> np.ndarray:
    """Sorted-row indices a where a threshold c = z_sorted[a] is feasible."""
    rows = len(z_sorted)
    boundaries = np.flatnonzero(z_sorted[1:] > z_sorted[:-1]) + 1
    return boundaries[(boundaries >= min_count) & (boundaries <= rows - min_count)]


def _min_count(rows: int, min_fraction: float, order: int) -> int:
    return max(int(np.ceil(min_fraction * rows)), order + 2)


def fit_setar(
    series,
    order: int,
    n_regimes: int = 2,
    threshold_variable: ThresholdVariable | None = None,
    min_fraction: float | None = None,
) -> RegimeModel:
    """Hard-threshold autoregression with 2 or 3 regimes.

    Candidate thresholds are observed threshold-variable values trimmed so
    each regime keeps at least ``min_fraction`` of the rows (default 0.15 for
    2 regimes, 0.10 for 3).  Every candidate (or ordered candidate pair) is
    scored by regime-wise OLS; the global RSS minimum wins and ties break
    toward the smallest threshold(s).
    """
    if n_regimes not in (2, 3):
        raise ValueError("n_regimes must be 2 or 3")
    tv = threshold_variable or ThresholdVariable(TIME)
    if min_fraction is None:
        min_fraction = 0.15 if n_regimes == 2 else 0.10
    x = series_values(series)
    design, y = lag_design(x, order)
    rows = len(y)
    z = _threshold_row_values(tv, x, order)
    min_count = _min_count(rows, min_fraction, order)
    if rows < n_regimes * min_count:
        raise SeriesTooShort(
            f"{rows} rows cannot hold {n_regimes} regimes of at least {min_count}"
        )

    sort_idx = np.argsort(z, kind="stable")
    z_sorted = z[sort_idx]
    sxx, sxy, syy = _prefix_stats(design[sort_idx], y[sort_idx])
    positions = _split_positions(z_sorted, min_count)
    if len(positions) == 0:
        raise NoFeasibleThreshold("no candidate threshold satisfies the minimum fraction")

    if n_regimes == 2:
        zeros = np.zeros(len(positions), dtype=int)
        ends = np.full(len(positions), rows, dtype=int)
        total = _segment_rss(sxx, sxy, syy, zeros, positions) + _segment_rss(
            sxx, sxy, syy, positions, ends
        )
        if not np.any(np.isfinite(total)):
            raise NoFeasibleThreshold("every candidate split is rank deficient")
        best = int(np.argmin(total))
        cut_positions = [int(positions[best])]
    else:
        low = _segment_rss(sxx, sxy, syy, np.zeros(len(positions), dtype=int), positions)
        high = _segment_rss(sxx, sxy, syy, positions, np.full(len(positions), rows, dtype=int))
        pa, pb = np.meshgrid(positions, positions, indexing="ij")
        ia, ib = np.meshgrid(np.arange(len(positions)), np.arange(len(positions)), indexing="ij")
        mask = (pb - pa) >= min_count
        starts, stops = pa[mask], pb[mask]
        mid = _segment_rss(sxx, sxy, syy, starts, stops)
        total = low[ia[mask]] + mid + high[ib[mask]]
        if not np.any(np.isfinite(total)):
            raise NoFeasibleThreshold("every candidate split pair is rank deficient")
        best = int(np.argmin(total))
        cut_positions = [int(starts[best]), int(stops[best])]

    thresholds = z_sorted[cut_positions]
    assignment = _regime_assignment(thresholds, z)
    regimes, errors, names = [], [], []
    for regime in range(n_regimes):
        rows_mask = assignment == regime
        fit = ols_fit(design[rows_mask], y[rows_mask])
        regimes.append(fit.coefficients)
        errors.append(fit.standard_errors)
        names.extend(_ar_names(order, prefix=f"regime{regime + 1}."))
    names.extend(f"threshold{i + 1}" for i in range(n_regimes - 1))

    return _finish_model(
        kind="setar",
        order=order,
        regimes=regimes,
        thresholds=thresholds,
        transitions=(),
        tv=tv,
        series_vals=x,
        standard_errors=np.concatenate(errors + [np.full(n_regimes - 1, np.nan)]),
        parameter_names=tuple(names),
    )


# ---------------------------------------------------------------------------
# smooth-transition estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaGrid:
    """Steepness grid for stage-1 profiling.

    ``step=None`` (default) uses ``points`` log-spaced values between lo and
    hi; a step restores an exact arithmetic grid such as 1..200 by 0.002.
    """

    lo: float = 1.0
    hi: float = 200.0
    step: float | None = None
    points: int = 200

    def __post_init__(self):
        if self.lo <= 0 or self.hi <= self.lo:
            raise ValueError("need 0 < lo < hi")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")

    def values(self) -> np.ndarray:
        if self.step is not None:
            count = int(np.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
            return self.lo + self.step * np.arange(count)
        return np.geomspace(self.lo, self.hi, self.points)


def _transition_weights(kind: str, z, gamma, c):
    # branchless logistic: exp overflow saturates to inf and the ratio to 0,
    # which is the correct limit, so only the warning needs silencing
    if kind == LOGISTIC:
        with np.errstate(over="ignore"):
            return 1.0 / (1.0 + np.exp(-gamma * (z - c)))
    diff = z - c
    return 1.0 - np.exp(-gamma * diff * diff)


def _profiled_grid(base, block, y, z, gammas, c_values, kind):
    """Best (gamma, c) over the grid, profiling out the linear coefficients.

    For each candidate the design is [base, G*block] and the coefficients
    solve by OLS through batched Gram assembly.  Returns (gamma, c, rss) of
    the winner; candidates whose design is rank deficient are skipped.
    Candidates are scanned gamma-major, c-minor, and ties keep the first.
    """
    rows, kb = base.shape
    ka = block.shape[1]
    k = kb + ka
    btb = base.T @ base
    bty = base.T @ y
    yy = float(y @ y)
    cross = (base[:, :, None] * block[:, None, :]).reshape(rows, kb * ka)
    tri = np.triu_indices(ka)
    auto = (block[:, :, None] * block[:, None, :])[:, tri[0], tri[1]]
    block_y = block * y[:, None]

    n_c = len(c_values)
    best_rss, best_gamma, best_c = np.inf, None, None
    order_gamma = np.repeat(gammas, n_c)
    order_c = np.tile(c_values, len(gammas))

    for start in range(0, len(order_gamma), _GRID_CHUNK):
        g_par = order_gamma[start : start + _GRID_CHUNK, None]
        c_par = order_c[start : start + _GRID_CHUNK, None]
        weights = _transition_weights(kind, z[None, :], g_par, c_par)
        m = weights.shape[0]

        gram = np.empty((m, k, k))
        gram[:, :kb, :kb] = btb
        upper = (weights @ cross).reshape(m, kb, ka)
        gram[:, :kb, kb:] = upper
        gram[:, kb:, :kb] = upper.transpose(0, 2, 1)
        lower_entries = (weights * weights) @ auto
        lower = np.zeros((m, ka, ka))
        lower[:, tri[0], tri[1]] = lower_entries
        lower[:, tri[1], tri[0]] = lower_entries
        gram[:, kb:, kb:] = lower

        rhs = np.empty((m, k))
        rhs[:, :kb] = bty
        rhs[:, kb:] = weights @ block_y

        eigs = np.linalg.eigvalsh(gram)
        feasible = (eigs[:, 0] > eigs[:, -1] * _EIG_RATIO) & (eigs[:, -1] > 0)
        if not np.any(feasible):
            continue
        beta = np.linalg.solve(gram[feasible], rhs[feasible][..., None])[..., 0]
        rss = yy - np.einsum("mk,mk->m", rhs[feasible], beta)
        rss = np.where(np.isfinite(rss), np.maximum(rss, 0.0), np.inf)

        local = np.flatnonzero(feasible)
        pick = int(np.argmin(rss))
        if rss[pick] < best_rss:
            best_rss = float(rss[pick])
            best_gamma = float(order_gamma[start + local[pick]])
            best_c = float(order_c[start + local[pick]])

    if best_gamma is None:
        raise NoFeasibleThreshold("every (gamma, c) candidate is rank deficient")
    return best_gamma, best_c, best_rss


def _pack_star(theta, k1, n_transitions):
    a = theta[:k1]
    blocks = theta[k1 : k1 * (n_transitions + 1)].reshape(n_transitions, k1)
    gammas = theta[k1 * (n_transitions + 1) : k1 * (n_transitions + 1) + n_transitions]
    cs = theta[k1 * (n_transitions + 1) + n_transitions :]
    return a, blocks, gammas, cs


def fit_lstar(
    series,
    order: int,
    n_transitions: int = 1,
    threshold_variable: ThresholdVariable | None = None,
    gamma_grid: GammaGrid | None = None,
    gamma_init: float = 3.0,
    min_fraction: float | None = None,
    transition: str = LOGISTIC,
    refine: bool = True,
) -> RegimeModel:
    """Smooth-transition autoregression with one or two additive transitions.

    Stage 1 grids over (gamma, c) - c taken from the trimmed observed
    threshold values, gamma from ``gamma_grid`` plus ``gamma_init`` - solving
    the remaining coefficients by OLS.  Stage 2 refines everything jointly by
    damped Gauss-Newton started at the grid winner; if refinement fails the
    grid model is returned with ``converged=False``.  With two transitions
    the second is grid-fit greedily given the first, and the refined pair is
    reported with thresholds in increasing order.
    """
    if n_transitions not in (1, 2):
        raise ValueError("n_transitions must be 1 or 2")
    if transition not in (LOGISTIC, EXPONENTIAL):
        raise ValueError(f"unknown transition kind {transition!r}")
    tv = threshold_variable or ThresholdVariable(TIME)
    grid = gamma_grid or GammaGrid()
    if min_fraction is None:
        min_fraction = 0.15 if n_transitions == 1 else 0.10

    x = series_values(series)
    design, y = lag_design(x, order)
    rows = len(y)
    k1 = order + 1
    z = _threshold_row_values(tv, x, order)
    min_count = _min_count(rows, min_fraction, order)
    if rows < (n_transitions + 1) * min_count:
        raise SeriesTooShort(
            f"{rows} rows cannot hold {n_transitions + 1} regimes of at least {min_count}"
        )

    sort_idx = np.argsort(z, kind="stable")
    z_sorted = z[sort_idx]
    positions = _split_positions(z_sorted, min_count)
    if len(positions) == 0:
        raise NoFeasibleThreshold("no candidate threshold satisfies the minimum fraction")
    c_candidates = z_sorted[positions]
    gammas = np.unique(np.append(grid.values(), gamma_init))

    gamma1, c1, _ = _profiled_grid(design, design, y, z, gammas, c_candidates, transition)
    grid_gammas = [gamma1]
    grid_cs = [c1]

    if n_transitions == 2:
        w1 = _transition_weights(transition, z, gamma1, c1)
        base2 = np.hstack([design, w1[:, None] * design])
        a1 = int(np.searchsorted(z_sorted, c1, side="left"))
        feasible_c2 = []
        for pos in positions:
            segs = sorted([a1, int(pos)])
            counts = (segs[0], segs[1] - segs[0], rows - segs[1])
            if min(counts) >= min_count:
                feasible_c2.append(z_sorted[pos])
        if not feasible_c2:
            raise NoFeasibleThreshold("no feasible second threshold given the first")
        gamma2, c2, _ = _profiled_grid(
            base2, design, y, z, gammas, np.asarray(feasible_c2), transition
        )
        grid_gammas.append(gamma2)
        grid_cs.append(c2)

    # stage-1 coefficients by a plain OLS refit at the winning grid point
    weight_cols = [_transition_weights(transition, z, g, c) for g, c in zip(grid_gammas, grid_cs)]
    stage1_design = np.hstack([design] + [w[:, None] * design for w in weight_cols])
    stage1 = ols_fit(stage1_design, y)

    # the refinement stays inside the searched region: gamma within the grid
    # bounds, c within the trimmed span of observed threshold values
    theta0 = np.concatenate([stage1.coefficients, grid_gammas, grid_cs])
    c_lo = z_sorted[positions[0]]
    c_hi = z_sorted[positions[-1]]
    n_par = len(theta0)
    lower = np.full(n_par, -np.inf)
    upper = np.full(n_par, np.inf)
    lower[k1 * (n_transitions + 1) : k1 * (n_transitions + 1) + n_transitions] = min(
        grid.lo, gamma_init
    )
    upper[k1 * (n_transitions + 1) : k1 * (n_transitions + 1) + n_transitions] = grid.hi
    lower[k1 * (n_transitions + 1) + n_transitions :] = c_lo
    upper[k1 * (n_transitions + 1) + n_transitions :] = c_hi

    def residual(theta):
        a, blocks, gs, cs = _pack_star(theta, k1, n_transitions)
        mean = design @ a
        for j in range(n_transitions):
            gamma_j = max(gs[j], 1e-12)
            mean = mean + _transition_weights(transition, z, gamma_j, cs[j]) * (design @ blocks[j])
        return y - mean

    converged = False
    theta = theta0
    errors = None
    if refine:
        try:
            nls = nls_fit(residual, theta0, bounds=(lower, upper))
            theta = nls.coefficients
            errors = nls.standard_errors
            converged = nls.converged
        except (SingularJacobian, NonFiniteResidual, TooShort, RankDeficient):
            theta = theta0
            errors = None
            converged = False

    a, blocks, gs, cs = _pack_star(theta, k1, n_transitions)
    sort_order = np.argsort(cs, kind="stable")
    if len(cs) > 1 and cs[sort_order][0] == cs[sort_order][1]:
        # refinement collapsed the thresholds; keep the grid solution
        theta = theta0
        a, blocks, gs, cs = _pack_star(theta, k1, n_transitions)
        sort_order = np.argsort(cs, kind="stable")
        errors = None
        converged = False
    blocks = blocks[sort_order]
    gs = gs[sort_order]
    cs = cs[sort_order]
    if errors is not None:
        _, err_blocks, err_gs, err_cs = _pack_star(errors, k1, n_transitions)
        errors = np.concatenate(
            [errors[:k1], err_blocks[sort_order].ravel(), err_gs[sort_order], err_cs[sort_order]]
        )

    kind = "lstar" if transition == LOGISTIC else "estar"
    specs = tuple(TransitionSpec(kind=transition, gamma=float(g), c=float(c)) for g, c in zip(gs, cs))
    names = _ar_names(order, "base.")
    for j in range(n_transitions):
        names.extend(_ar_names(order, f"block{j + 1}."))
    names.extend(f"gamma{j + 1}" for j in range(n_transitions))
    names.extend(f"c{j + 1}" for j in range(n_transitions))

    return _finish_model(
        kind=kind,
        order=order,
        regimes=[a] + [blocks[j] for j in range(n_transitions)],
        thresholds=cs,
        transitions=specs,
        tv=tv,
        series_vals=x,
        standard_errors=errors,
        parameter_names=tuple(names),
        converged=converged,
    )


def simulate(
    model: RegimeModel,
    length: int,
    noise_sd: float,
    seed: int | None = 0,
    burn_in: int = 100,
) -> np.ndarray:
    """Iterate the model equations with seeded Gaussian innovations.

    The first ``burn_in`` draws are discarded; for time-threshold models the
    time variable is 1..length over the returned stretch (burn-in steps sit
    at t <= 0).  Raises ExplosivePath when |X_t| exceeds 1e8.
    """
    if length < 1:
        raise ValueError("length must be positive")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    order = model.order
    tv = model.threshold_variable
    if tv.kind == LAGGED_VALUE and tv.delay > max(order, 1):
        raise ValueError(f"threshold delay {tv.delay} exceeds the model order")
    history = [0.0] * max(order, 1)
    path = np.empty(burn_in + length)
    for i in range(burn_in + length):
        t_value = float(i - burn_in + 1)
        lags = np.array(history[-order:][::-1]) if order else np.empty(0)
        row = np.concatenate([[1.0], lags])
        if model.threshold_variable.kind == TIME:
            z = t_value
        else:
            z = history[-model.threshold_variable.delay]
        value = float(_predict_rows(model, row[None, :], np.array([z]))[0])
        if noise_sd > 0:
            value += rng.normal(0.0, noise_sd)
        if abs(value) > _EXPLOSION_LIMIT:
            raise ExplosivePath(f"|X_t| exceeded {_EXPLOSION_LIMIT:g} at step {i}")
        path[i] = value
        history.append(value)
    return path[burn_in:]
