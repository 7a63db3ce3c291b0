"""Ordinary and nonlinear least squares plus F/t tail probabilities.

Every estimator and statistical test in the package sits on this module.
The OLS path standardizes columns internally (the auxiliary regressions mix
scales up to ~1e8, e.g. cubic time trends) and maps coefficients back, so
callers never see the scaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import (
    InvalidDf,
    NonFiniteResidual,
    RankDeficient,
    SingularJacobian,
    TooShort,
)

CONDITION_LIMIT = 1e12
_TINY = 1e-300


@dataclass(frozen=True)
class OlsFit:
    """Ordinary least squares result."""

    coefficients: np.ndarray
    standard_errors: np.ndarray
    residuals: np.ndarray
    rss: float
    n_obs: int
    n_params: int

    @property
    def df_resid(self) -> int:
        return self.n_obs - self.n_params

    def t_statistics(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coefficients / self.standard_errors


@dataclass(frozen=True)
class FTestResult:
    statistic: float
    p_value: float
    df_num: int
    df_den: int


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    df: int


@dataclass(frozen=True)
class NlsFit:
    """Damped Gauss-Newton result."""

    coefficients: np.ndarray
    standard_errors: np.ndarray
    rss: float
    converged: bool
    iterations: int


def _standardizer(design: np.ndarray) -> np.ndarray:
    """Square matrix T such that design @ T is well scaled.

    Non-constant columns are scaled to unit spread; when an exact constant
    column is present they are also mean-centered, with the means absorbed
    into that column so that coefficients map back as ``beta = T @ b``.
    """
    n, k = design.shape
    spans = design.max(axis=0) - design.min(axis=0)
    constant = spans == 0
    const_idx = None
    if np.any(constant):
        for j in np.flatnonzero(constant):
            if design[0, j] != 0:
                const_idx = j
                break
    scales = design.std(axis=0)
    scales[scales == 0] = 1.0
    transform = np.zeros((k, k))
    for j in range(k):
        if constant[j]:
            transform[j, j] = 1.0
            continue
        transform[j, j] = 1.0 / scales[j]
        if const_idx is not None:
            mean_j = design[:, j].mean()
            transform[const_idx, j] = -mean_j / (scales[j] * design[0, const_idx])
    return transform


def ols_fit(design: np.ndarray, response: np.ndarray) -> OlsFit:
    """Least-squares fit of ``response`` on the columns of ``design``.

    Standard errors come from the classical sigma^2 (X'X)^-1 diagonal with
    sigma^2 = rss / (n - k).  Raises RankDeficient when the (internally
    standardized) design has condition number above 1e12.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError(f"response of length {y.shape} does not match {n} design rows")
    if n <= k:
        raise TooShort(f"need more observations ({n}) than parameters ({k})")

    transform = _standardizer(X)
    Z = X @ transform
    cond = np.linalg.cond(Z)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise RankDeficient(f"design condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")

    q_mat, r_mat = np.linalg.qr(Z)
    b = np.linalg.solve(r_mat, q_mat.T @ y)
    coefficients = transform @ b

    residuals = y - X @ coefficients
    rss = float(residuals @ residuals)
    sigma2 = rss / (n - k)
    r_inv = np.linalg.solve(r_mat, np.eye(k))
    cov = transform @ (sigma2 * (r_inv @ r_inv.T)) @ transform.T
    standard_errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    return OlsFit(
        coefficients=coefficients,
        standard_errors=standard_errors,
        residuals=residuals,
        rss=rss,
        n_obs=n,
        n_params=k,
    )


def f_sf(statistic: float, df_num: int, df_den: int) -> float:
    """Upper-tail probability of the F(df_num, df_den) distribution."""
    if statistic <= 0:
        return 1.0
    if np.isinf(statistic):
        return 0.0
    x = df_den / (df_den + df_num * statistic)
    return float(special.betainc(df_den / 2.0, df_num / 2.0, x))


def f_test(
    rss_restricted: float,
    rss_unrestricted: float,
    n_restrictions: int,
    df_denominator: int,
) -> FTestResult:
    """F statistic for ``n_restrictions`` restrictions and its p-value.

    ``F = ((rss_r - rss_u) / q) / (rss_u / df)`` with the p-value from the
    F(q, df) upper tail.
    """
    if n_restrictions < 1 or df_denominator < 1:
        raise InvalidDf("numerator and denominator degrees of freedom must be >= 1")
    if rss_unrestricted < 0:
        raise ValueError("residual sums of squares must be non-negative")
    diff = rss_restricted - rss_unrestricted
    if diff < -1e-9 * max(rss_unrestricted, 1.0):
        raise ValueError("restricted RSS must be >= unrestricted RSS")
    diff = max(diff, 0.0)
    if diff == 0.0:
        stat = 0.0
    elif rss_unrestricted == 0.0:
        stat = np.inf
    else:
        stat = (diff / n_restrictions) / (rss_unrestricted / df_denominator)
    return FTestResult(
        statistic=float(stat),
        p_value=f_sf(stat, n_restrictions, df_denominator),
        df_num=n_restrictions,
        df_den=df_denominator,
    )


def t_pvalue(statistic: float, df: int) -> float:
    """Two-sided Student-t p-value via the regularized incomplete beta."""
    if df < 1:
        raise InvalidDf("degrees of freedom must be >= 1")
    if not np.isfinite(statistic):
        return 0.0
    x = df / (df + statistic * statistic)
    return float(special.betainc(df / 2.0, 0.5, x))


def t_test(statistic: float, df: int) -> TTestResult:
    return TTestResult(statistic=float(statistic), p_value=t_pvalue(statistic, df), df=df)


def _jacobian(model: Callable[[np.ndarray], np.ndarray], theta: np.ndarray, n_resid: int) -> np.ndarray:
    """Central finite-difference Jacobian with step 1e-6 * (1 + |theta|)."""
    k = theta.size
    jac = np.empty((n_resid, k))
    for j in range(k):
        step = 1e-6 * (1.0 + abs(theta[j]))
        up = theta.copy()
        up[j] += step
        down = theta.copy()
        down[j] -= step
        jac[:, j] = (model(up) - model(down)) / (2.0 * step)
    return jac


def _clip_to_bounds(theta: np.ndarray, bounds) -> np.ndarray:
    if bounds is None:
        return theta
    lo, hi = bounds
    return np.clip(theta, lo, hi)


def nls_fit(
    model: Callable[[np.ndarray], np.ndarray],
    init: Sequence[float],
    bounds=None,
    tol: float = 1e-8,
    max_iterations: int = 500,
    trace: list | None = None,
) -> NlsFit:
    """Minimize the squared norm of ``model(theta)`` by damped Gauss-Newton.

    Parameters
    ----------
    model : callable
        Maps a parameter vector to the residual vector.
    init : sequence of float
        Starting parameters.
    bounds : (lo, hi) arrays or None
        Optional box; candidate steps are clipped into it.

    Notes
    -----
    The damping factor multiplies/divides by 10 on rejected/accepted steps.
    Iteration stops when the relative RSS change drops below ``tol`` (the
    ``converged`` flag is then True) or after ``max_iterations`` steps
    (``converged`` False).  Standard errors are sigma^2 (J'J)^-1 at the
    final point.  When ``trace`` is a list it receives the starting RSS and
    the RSS of every accepted step.
    """
    theta = _clip_to_bounds(np.asarray(init, dtype=float).copy(), bounds)
    resid = np.asarray(model(theta), dtype=float)
    if not np.all(np.isfinite(resid)):
        raise NonFiniteResidual("residual function is not finite at the starting point")
    n = resid.size
    if theta.size >= n:
        raise TooShort(f"{theta.size} parameters but only {n} residuals")

    rss = float(resid @ resid)
    if trace is not None:
        trace.append(rss)
    lam = 1e-3
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        jac = _jacobian(model, theta, n)
        if not np.all(np.isfinite(jac)):
            raise SingularJacobian("Jacobian is not finite")
        jtj = jac.T @ jac
        gradient = jac.T @ resid
        damping = np.diag(jtj).copy()
        damping[damping <= 0] = 1.0

        accepted = False
        while lam < 1e13:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(damping), -gradient)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            candidate = _clip_to_bounds(theta + delta, bounds)
            cand_resid = np.asarray(model(candidate), dtype=float)
            if np.all(np.isfinite(cand_resid)):
                cand_rss = float(cand_resid @ cand_resid)
                if cand_rss < rss:
                    accepted = True
                    break
                if cand_rss - rss <= tol * max(rss, _TINY):
                    # no meaningful movement possible: already at the optimum
                    converged = True
                    break
            lam *= 10.0
        if converged:
            break
        if not accepted:
            if iterations == 1:
                raise SingularJacobian("damping exhausted without an acceptable step")
            converged = True
            break

        relative_drop = (rss - cand_rss) / max(rss, _TINY)
        theta, resid, rss = candidate, cand_resid, cand_rss
        if trace is not None:
            trace.append(rss)
        lam = max(lam / 10.0, 1e-12)
        if relative_drop < tol:
            converged = True
            break

    jac = _jacobian(model, theta, n)
    jtj = jac.T @ jac
    sigma2 = rss / (n - theta.size)
    cov = sigma2 * np.linalg.pinv(jtj)
    standard_errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    return NlsFit(
        coefficients=theta,
        standard_errors=standard_errors,
        rss=rss,
        converged=converged,
        iterations=iterations,
    )
