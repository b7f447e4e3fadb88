"""Elastic-net regression on sentiment measures with data-driven calibration.

The solver is cyclic coordinate descent with covariance updates on
standardized predictors, minimizing

    (1/N) * RSS + lambda * (alpha * ||b||_1 + (1 - alpha) * ||b||_2^2)

over the penalized coefficients (external regressors can be exempted from
the penalty). Standardization uses population (1/N) variance and the
intercept is handled by centering; coefficients are rescaled to original
units after the fit. lambda = 0 reduces to OLS, solved directly by
least squares (least-norm on singular designs, with a warning).

Calibration picks (alpha, lambda) by BIC/AIC/Cp with elastic-net degrees
of freedom, or by rolling-origin cross-validation. One-shot and iterative
(rolling window, one-step-ahead out-of-sample) estimation are supported.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from .aggregation import MeasureSet
from .errors import ConfigError, DataError, NumericalError

MAX_SWEEPS = 100_000
SWEEP_TOL = 1e-7
LAMBDA_PATH_SIZE = 100
LAMBDA_PATH_RATIO = 1e-3
ALPHA_FLOOR = 1e-3  # lambda_max guard as alpha -> 0

CALIBRATIONS = ("BIC", "AIC", "Cp", "cv")


@dataclass(frozen=True)
class ModelConfig:
    """Model family, calibration strategy, and sample handling."""

    model: str = "gaussian"
    calibration: str = "BIC"
    alphas: tuple[float, ...] = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
    lambdas: tuple[float, ...] | None = None
    h: int = 0
    do_difference: bool = False
    do_iter: bool = False
    n_sample: int | None = None
    start: int = 1
    oos: int = 0
    train_window: int | None = None
    test_window: int | None = None
    do_intercept: bool = True
    do_shrinkage_x: bool | tuple[bool, ...] = False
    n_jobs: int = 1

    def __post_init__(self):
        if self.model != "gaussian":
            raise ConfigError("only the gaussian (linear) model is supported")
        if self.calibration not in CALIBRATIONS:
            raise ConfigError(f"unknown calibration type {self.calibration!r}")
        for a in self.alphas:
            if not 0.0 <= a <= 1.0:
                raise ConfigError(f"alpha {a} outside [0, 1]")
        if not self.alphas:
            raise ConfigError("at least one alpha candidate is required")
        if self.lambdas is not None:
            for lam in self.lambdas:
                if lam < 0:
                    raise ConfigError(f"lambda {lam} must be nonnegative")
        if self.do_iter and self.n_sample is None:
            raise ConfigError("iterative estimation needs n_sample (the window size M)")
        if self.calibration == "cv" and (self.train_window is None or self.test_window is None):
            raise ConfigError("cv calibration needs train_window and test_window")
        if self.oos < 0:
            raise ConfigError("oos gap must be nonnegative")
        if self.start < 1:
            raise ConfigError("start must be at least 1")


# ---------------------------------------------------------------------------
# sample alignment and degenerate-column handling


def align_target(
    y: Sequence[float],
    X: np.ndarray,
    h: int,
    do_difference: bool = False,
    dates: Sequence | None = None,
):
    """Shift/difference the target against the regressor block.

    h > 0 pairs X_t with y_{t+h} (or y_{t+h} - y_t when differencing);
    h < 0 pairs X_{t+|h|} with y_t (or y_{t+|h|} - y_t when differencing).
    Returns (X_aligned, y_aligned, dates_aligned).
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n = len(y)
    if X.shape[0] != n:
        raise DataError(f"X has {X.shape[0]} rows but y has {n}")
    if dates is None:
        dates = list(range(n))
    if h == 0:
        return X, y, list(dates)
    a = abs(h)
    if a >= n:
        raise DataError(f"|h|={a} leaves no observations out of {n}")
    if do_difference:
        ya = y[a:] - y[:-a]
    else:
        ya = y[a:] if h > 0 else y[: n - a]
    if h > 0:
        Xa, da = X[: n - a], list(dates)[: n - a]
    else:
        Xa, da = X[a:], list(dates)[a:]
    return Xa, ya, da


def discard_degenerate(X: pd.DataFrame) -> tuple[pd.DataFrame, list[str]]:
    """Drop duplicate columns (keep first) and columns at least half zero."""
    discarded: list[str] = []
    kept: list[str] = []
    for col in X.columns:
        values = X[col].to_numpy(dtype=float)
        if (values == 0.0).mean() >= 0.5:
            discarded.append(col)
            continue
        if any(np.array_equal(values, X[prev].to_numpy(dtype=float)) for prev in kept):
            discarded.append(col)
            continue
        kept.append(col)
    return X[kept], discarded


# ---------------------------------------------------------------------------
# elastic-net solver


class _Design:
    """Standardized design with the covariance pieces coordinate descent needs."""

    def __init__(self, X: np.ndarray, y: np.ndarray, do_intercept: bool):
        self.n, self.p = X.shape
        self.do_intercept = do_intercept
        self.x_mean = X.mean(axis=0) if do_intercept else np.zeros(self.p)
        scale = X.std(axis=0)  # population (1/N) convention
        scale[scale == 0.0] = 1.0
        self.x_scale = scale
        self.y_mean = y.mean() if do_intercept else 0.0
        self.Xs = (X - self.x_mean) / self.x_scale
        self.yc = y - self.y_mean
        self.G = self.Xs.T @ self.Xs / self.n
        self.c = self.Xs.T @ self.yc / self.n
        self.v = np.diag(self.G).copy()
        self.y_sq = float(self.yc @ self.yc) / self.n


@dataclass
class ElasticNetFit:
    """One solved elastic-net problem, in original units."""

    intercept: float
    coef: np.ndarray
    coef_std: np.ndarray
    alpha: float
    lam: float
    penalized: np.ndarray
    n_obs: int
    n_sweeps: int
    converged: bool
    objective_path: np.ndarray
    kkt_residual: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float

    def predict_std(self, Xs: np.ndarray) -> np.ndarray:
        return self.y_mean + Xs @ self.coef_std

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(X, dtype=float) @ self.coef


def _soft_threshold(z: float, gamma: float) -> float:
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def _objective(design: _Design, beta: np.ndarray, lam: float, alpha: float, penalized) -> float:
    rss_n = design.y_sq - 2.0 * design.c @ beta + beta @ design.G @ beta
    pen = beta[penalized]
    return float(rss_n + lam * (alpha * np.abs(pen).sum() + (1.0 - alpha) * pen @ pen))


def _kkt_residual(design: _Design, beta: np.ndarray, lam: float, alpha: float, penalized) -> float:
    """Worst stationarity violation: gradient residual on active coordinates,
    subgradient-bound excess on inactive ones."""
    r = design.c - design.G @ beta
    res = np.zeros(design.p)
    active = penalized & (beta != 0.0)
    inactive = penalized & (beta == 0.0)
    free = ~penalized
    res[active] = np.abs(
        -2.0 * r[active]
        + lam * alpha * np.sign(beta[active])
        + 2.0 * lam * (1.0 - alpha) * beta[active]
    )
    res[inactive] = np.maximum(0.0, 2.0 * np.abs(r[inactive]) - lam * alpha)
    res[free] = np.where(design.v[free] > 0, 2.0 * np.abs(r[free]), 0.0)
    return float(res.max(initial=0.0))


def _solve_ols(design: _Design) -> np.ndarray:
    beta, _, rank, _ = np.linalg.lstsq(design.Xs, design.yc, rcond=None)
    if rank < design.p:
        warnings.warn(
            "singular design at lambda=0; using the least-norm solution", stacklevel=3
        )
    return beta


def _coordinate_descent(
    design: _Design,
    lam: float,
    alpha: float,
    penalized: np.ndarray,
    warm: np.ndarray | None,
) -> tuple[np.ndarray, int, bool, list[float]]:
    beta = np.zeros(design.p) if warm is None else warm.copy()
    G, c, v = design.G, design.c, design.v
    gamma = lam * alpha / 2.0
    ridge = lam * (1.0 - alpha)
    objective = [_objective(design, beta, lam, alpha, penalized)]
    converged = False
    sweeps = 0
    for sweeps in range(1, MAX_SWEEPS + 1):
        max_delta = 0.0
        for j in range(design.p):
            z = c[j] - G[j] @ beta + v[j] * beta[j]
            if penalized[j]:
                denom = v[j] + ridge
                new = _soft_threshold(z, gamma) / denom if denom > 0 else 0.0
            else:
                new = z / v[j] if v[j] > 0 else 0.0
            delta = new - beta[j]
            if delta != 0.0:
                beta[j] = new
                max_delta = max(max_delta, abs(delta))
        objective.append(_objective(design, beta, lam, alpha, penalized))
        if max_delta < SWEEP_TOL:
            converged = True
            break
    if not converged:
        raise NumericalError(
            f"coordinate descent did not converge in {MAX_SWEEPS} sweeps "
            f"(alpha={alpha}, lambda={lam})"
        )
    return beta, sweeps, converged, objective


def elastic_net_fit(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float,
    lam: float,
    do_intercept: bool = True,
    penalized: np.ndarray | None = None,
    design: _Design | None = None,
    warm: np.ndarray | None = None,
) -> ElasticNetFit:
    """Fit one elastic-net problem at fixed (alpha, lambda)."""
    if design is None:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or X.shape[0] != len(y):
            raise DataError("X must be 2-D with one row per observation")
        if X.shape[0] < 2:
            raise DataError("at least two observations are required")
        design = _Design(X, y, do_intercept)
    if penalized is None:
        penalized = np.ones(design.p, dtype=bool)
    penalized = np.asarray(penalized, dtype=bool)
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError("alpha must lie in [0, 1]")

    if lam == 0.0:
        beta = _solve_ols(design)
        sweeps, converged = 0, True
        objective = [_objective(design, beta, 0.0, alpha, penalized)]
    else:
        beta, sweeps, converged, objective = _coordinate_descent(
            design, lam, alpha, penalized, warm
        )
    kkt = _kkt_residual(design, beta, lam, alpha, penalized)
    coef = beta / design.x_scale
    intercept = design.y_mean - float(coef @ design.x_mean) if design.do_intercept else 0.0
    return ElasticNetFit(
        intercept=intercept,
        coef=coef,
        coef_std=beta,
        alpha=alpha,
        lam=lam,
        penalized=penalized,
        n_obs=design.n,
        n_sweeps=sweeps,
        converged=converged,
        objective_path=np.asarray(objective),
        kkt_residual=kkt,
        x_mean=design.x_mean,
        x_scale=design.x_scale,
        y_mean=design.y_mean,
    )


def lambda_path(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float,
    do_intercept: bool = True,
    penalized: np.ndarray | None = None,
    design: _Design | None = None,
) -> np.ndarray:
    """Geometric grid of 100 lambdas from lambda_max down to lambda_max/1000.

    lambda_max is the smallest lambda that zeroes every penalized
    coefficient; unpenalized regressors are partialled out first. As alpha
    approaches 0 the grid is anchored at alpha = 0.001.
    """
    if design is None:
        design = _Design(np.asarray(X, dtype=float), np.asarray(y, dtype=float), do_intercept)
    if penalized is None:
        penalized = np.ones(design.p, dtype=bool)
    penalized = np.asarray(penalized, dtype=bool)
    resid = design.yc
    free = ~penalized
    if free.any():
        Xf = design.Xs[:, free]
        beta_f, *_ = np.linalg.lstsq(Xf, design.yc, rcond=None)
        resid = design.yc - Xf @ beta_f
    inner = np.abs(design.Xs[:, penalized].T @ resid) / design.n
    alpha_eff = max(alpha, ALPHA_FLOOR)
    lam_max = 2.0 * float(inner.max(initial=0.0)) / alpha_eff
    if lam_max <= 0.0:
        lam_max = 1.0  # no signal at all: any lambda gives the zero fit
    return np.geomspace(lam_max, lam_max * LAMBDA_PATH_RATIO, LAMBDA_PATH_SIZE)


# ---------------------------------------------------------------------------
# calibration


def _df_trace(design: _Design, fit: ElasticNetFit) -> float:
    """Elastic-net degrees of freedom: trace of the ridge-regularized hat map.

    df = tr(X_A (X_A' X_A + N * lambda * (1 - alpha) * D)^-1 X_A') over the
    active set A, where D flags the penalized members of A (the
    Tibshirani-Taylor estimator under the (1/N) loss convention), plus one
    for the intercept.
    """
    active = fit.coef_std != 0.0
    if fit.lam == 0.0:
        active = np.ones(design.p, dtype=bool)
    df = 0.0
    if active.any():
        Xa = design.Xs[:, active]
        gram = Xa.T @ Xa
        ridge = design.n * fit.lam * (1.0 - fit.alpha) * fit.penalized[active].astype(float)
        m = gram + np.diag(ridge)
        try:
            inv_gram = np.linalg.solve(m, gram)
        except np.linalg.LinAlgError:
            inv_gram = np.linalg.pinv(m) @ gram
        df = float(np.trace(inv_gram))
    if design.do_intercept:
        df += 1.0
    return df


def _rss(design: _Design, fit: ElasticNetFit) -> float:
    resid = design.yc - design.Xs @ fit.coef_std
    return float(resid @ resid)


def _information_criterion(name: str, n: int, rss: float, df: float, sigma2: float | None) -> float:
    rss = max(rss, 1e-300)
    if name == "BIC":
        return n * np.log(rss / n) + df * np.log(n)
    if name == "AIC":
        return n * np.log(rss / n) + 2.0 * df
    if name == "Cp":
        return rss / n + 2.0 * df * sigma2 / n
    raise ConfigError(f"unknown information criterion {name!r}")


def calibrate_ic(
    X: np.ndarray,
    y: np.ndarray,
    alphas: Sequence[float],
    lambdas: Sequence[float] | None,
    criterion: str,
    do_intercept: bool = True,
    penalized: np.ndarray | None = None,
) -> tuple[float, float, ElasticNetFit, pd.DataFrame]:
    """Pick (alpha, lambda) minimizing an information criterion on the full sample."""
    if len(alphas) == 0:
        raise ConfigError("empty alpha grid")
    design = _Design(np.asarray(X, dtype=float), np.asarray(y, dtype=float), do_intercept)
    records = []
    best = None
    for alpha in alphas:
        lams = (
            np.asarray(sorted(lambdas, reverse=True), dtype=float)
            if lambdas is not None
            else lambda_path(X, y, alpha, design=design, penalized=penalized)
        )
        if lams.size == 0:
            raise ConfigError("empty lambda grid")
        warm = None
        fits = []
        for lam in lams:
            fit = elastic_net_fit(
                X, y, alpha, float(lam), design=design, penalized=penalized, warm=warm
            )
            warm = fit.coef_std
            fits.append(fit)
        sigma2 = None
        if criterion == "Cp":
            ls_fit = fits[-1]  # least-penalized fit of this alpha's grid
            rss_ls, df_ls = _rss(design, ls_fit), _df_trace(design, ls_fit)
            denom = max(design.n - df_ls, 1.0)
            sigma2 = rss_ls / denom
        for fit in fits:
            rss = _rss(design, fit)
            df = _df_trace(design, fit)
            value = _information_criterion(criterion, design.n, rss, df, sigma2)
            records.append(
                {"alpha": fit.alpha, "lambda": fit.lam, "df": df, "rss": rss, criterion: value}
            )
            if best is None or value < best[0]:
                best = (value, fit)
    trace = pd.DataFrame(records)
    fit = best[1]
    return fit.alpha, fit.lam, fit, trace


def rolling_origin_folds(n: int, train_window: int, test_window: int, oos: int):
    """Index splits for rolling-forecasting-origin cross-validation.

    Fold k trains on rows [k, k + train), skips ``oos`` rows, and tests on
    the following ``test`` rows; folds advance one row at a time until the
    test window would run past the sample.
    """
    if train_window < 1 or test_window < 1:
        raise ConfigError("train and test windows must be positive")
    folds = []
    origin = 0
    while origin + train_window + oos + test_window <= n:
        train_idx = np.arange(origin, origin + train_window)
        test_start = origin + train_window + oos
        test_idx = np.arange(test_start, test_start + test_window)
        folds.append((train_idx, test_idx))
        origin += 1
    if not folds:
        raise DataError(
            f"cv windows (train={train_window}, oos={oos}, test={test_window}) "
            f"exceed the sample of {n}"
        )
    return folds


def calibrate_cv(
    X: np.ndarray,
    y: np.ndarray,
    alphas: Sequence[float],
    lambdas: Sequence[float] | None,
    train_window: int,
    test_window: int,
    oos: int,
    do_intercept: bool = True,
    penalized: np.ndarray | None = None,
) -> tuple[float, float, ElasticNetFit, pd.DataFrame]:
    """Pick (alpha, lambda) minimizing average rolling-origin test RMSE."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = rolling_origin_folds(len(y), train_window, test_window, oos)
    full_design = _Design(X, y, do_intercept)
    lam_grids = {}
    for alpha in alphas:
        lam_grids[alpha] = (
            np.asarray(sorted(lambdas, reverse=True), dtype=float)
            if lambdas is not None
            else lambda_path(X, y, alpha, design=full_design, penalized=penalized)
        )
        if lam_grids[alpha].size == 0:
            raise ConfigError("empty lambda grid")
    errors: dict[tuple[float, float], list[float]] = {
        (a, float(lam)): [] for a in alphas for lam in lam_grids[a]
    }
    for train_idx, test_idx in folds:
        fold_design = _Design(X[train_idx], y[train_idx], do_intercept)
        for alpha in alphas:
            warm = None
            for lam in lam_grids[alpha]:
                fit = elastic_net_fit(
                    X[train_idx], y[train_idx], alpha, float(lam),
                    design=fold_design, penalized=penalized, warm=warm,
                )
                warm = fit.coef_std
                pred = fit.predict(X[test_idx])
                rmse = float(np.sqrt(np.mean((y[test_idx] - pred) ** 2)))
                errors[(alpha, float(lam))].append(rmse)
    records = []
    best = None
    for alpha in alphas:
        for lam in lam_grids[alpha]:
            score = float(np.mean(errors[(alpha, float(lam))]))
            records.append({"alpha": alpha, "lambda": float(lam), "cv_rmse": score})
            if best is None or score < best[0]:
                best = (score, alpha, float(lam))
    _, alpha_star, lam_star = best
    fit = elastic_net_fit(
        X, y, alpha_star, lam_star, design=full_design, penalized=penalized
    )
    return alpha_star, lam_star, fit, pd.DataFrame(records)


# ---------------------------------------------------------------------------
# model-level API


@dataclass
class FittedModel:
    """A calibrated elastic-net fit with its provenance."""

    intercept: float
    coef: pd.Series
    alpha: float
    lam: float
    calibration: str
    trace: pd.DataFrame
    discarded: list[str]
    dates: list
    fit: ElasticNetFit
    n_measures: int  # leading coef entries that are sentiment measures

    @property
    def coefficients(self) -> pd.Series:
        full = pd.Series(0.0, index=list(self.coef.index) + list(self.discarded))
        full[self.coef.index] = self.coef
        return full

    def predict(self, newX) -> np.ndarray:
        return predict(self, newX)


def predict(model: FittedModel, newX) -> np.ndarray:
    """delta + X @ coefficients, aligning DataFrame columns by name."""
    if isinstance(newX, pd.DataFrame):
        missing = [c for c in model.coef.index if c not in newX.columns]
        if missing:
            raise DataError(f"prediction input lacks columns {missing}")
        X = newX[list(model.coef.index)].to_numpy(dtype=float)
    else:
        X = np.asarray(newX, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != len(model.coef):
            raise DataError(
                f"prediction input has {X.shape[1]} columns, expected {len(model.coef)}"
            )
    return model.intercept + X @ model.coef.to_numpy()


def _prepare_design_frame(measures, x_external) -> tuple[pd.DataFrame, list, int]:
    if isinstance(measures, MeasureSet):
        X = measures.data[measures.series_columns].copy()
        dates = measures.dates
    elif isinstance(measures, pd.DataFrame):
        X = measures.copy()
        if "date" in X.columns:
            dates = list(X["date"])
            X = X.drop(columns=["date"])
        else:
            dates = list(range(len(X)))
    else:
        raise DataError("measures must be a MeasureSet or DataFrame")
    n_meas = X.shape[1]
    if x_external is not None:
        ext = pd.DataFrame(x_external).reset_index(drop=True)
        if len(ext) != len(X):
            raise DataError("external regressors must align with the measure rows")
        overlap = [c for c in ext.columns if c in X.columns]
        if overlap:
            raise DataError(f"external regressor names collide with measures: {overlap}")
        X = pd.concat([X.reset_index(drop=True), ext], axis=1)
    return X, dates, n_meas


def _penalized_mask(n_meas: int, n_total: int, do_shrinkage_x) -> np.ndarray:
    mask = np.ones(n_total, dtype=bool)
    n_ext = n_total - n_meas
    if n_ext == 0:
        return mask
    if isinstance(do_shrinkage_x, bool):
        mask[n_meas:] = do_shrinkage_x
    else:
        flags = list(do_shrinkage_x)
        if len(flags) != n_ext:
            raise ConfigError(
                f"do_shrinkage_x has {len(flags)} flags for {n_ext} external regressors"
            )
        mask[n_meas:] = flags
    return mask


def _calibrate_and_fit(
    X: np.ndarray,
    y: np.ndarray,
    config: ModelConfig,
    penalized: np.ndarray,
) -> tuple[float, float, ElasticNetFit, pd.DataFrame]:
    if config.calibration == "cv":
        return calibrate_cv(
            X, y, config.alphas, config.lambdas,
            config.train_window, config.test_window, config.oos,
            do_intercept=config.do_intercept, penalized=penalized,
        )
    return calibrate_ic(
        X, y, config.alphas, config.lambdas, config.calibration,
        do_intercept=config.do_intercept, penalized=penalized,
    )


def fit_model(
    measures,
    y: Sequence[float],
    x: pd.DataFrame | None = None,
    config: ModelConfig = ModelConfig(),
) -> FittedModel:
    """Align, discard degenerate measures, calibrate, and fit on the full sample."""
    frame, dates, n_meas = _prepare_design_frame(measures, x)
    Xa_full, ya, da = align_target(
        y, frame.to_numpy(dtype=float), config.h, config.do_difference, dates
    )
    aligned = pd.DataFrame(Xa_full, columns=frame.columns)
    meas_block, discarded = discard_degenerate(aligned.iloc[:, :n_meas])
    if meas_block.shape[1] == 0:
        raise DataError("all measure columns were discarded as degenerate")
    aligned = pd.concat([meas_block, aligned.iloc[:, n_meas:]], axis=1)
    n_meas_kept = meas_block.shape[1]
    Xa = aligned.to_numpy(dtype=float)
    penalized = _penalized_mask(n_meas_kept, aligned.shape[1], config.do_shrinkage_x)
    alpha, lam, fit, trace = _calibrate_and_fit(Xa, ya, config, penalized)
    coef = pd.Series(fit.coef, index=list(aligned.columns))
    return FittedModel(
        intercept=fit.intercept,
        coef=coef,
        alpha=alpha,
        lam=lam,
        calibration=config.calibration,
        trace=trace,
        discarded=discarded,
        dates=da,
        fit=fit,
        n_measures=n_meas_kept,
    )


@dataclass
class IterResults:
    """Rolling-window fits with their one-step-ahead out-of-sample record."""

    models: list[FittedModel]
    predictions: pd.DataFrame  # date, prediction, realized, error
    performance: dict[str, float]
    config: ModelConfig

    @property
    def n_iterations(self) -> int:
        return len(self.predictions)


def iteration_count(n_obs: int, n_sample: int, h: int, oos: int) -> int:
    return n_obs - n_sample - abs(h) - oos


def performance_measures(predictions: np.ndarray, realized: np.ndarray) -> dict[str, float]:
    """RMSE, mean absolute deviation, and mean directional accuracy (percent).

    Directional accuracy compares the sign of the predicted change against
    the realized change, both relative to the previous realized value; the
    first prediction has no direction and is skipped.
    """
    errors = realized - predictions
    out = {
        "rmse": float(np.sqrt(np.mean(errors**2))),
        "mad": float(np.mean(np.abs(errors))),
    }
    if len(predictions) > 1:
        pred_change = np.sign(predictions[1:] - realized[:-1])
        real_change = np.sign(realized[1:] - realized[:-1])
        out["mda"] = float(100.0 * np.mean(pred_change == real_change))
    else:
        out["mda"] = float("nan")
    return out


def fit_model_iter(
    measures,
    y: Sequence[float],
    x: pd.DataFrame | None = None,
    config: ModelConfig = ModelConfig(do_iter=True, n_sample=2),
) -> IterResults:
    """Rolling M-sized window estimation with one-step-ahead predictions.

    The window ending at aligned index j predicts the target at
    j + oos + 1; the total number of iterations is
    len(y) - n_sample - |h| - oos.
    """
    if not config.do_iter:
        raise ConfigError("fit_model_iter needs a config with do_iter=True")
    frame, dates, n_meas = _prepare_design_frame(measures, x)
    y_arr = np.asarray(y, dtype=float)
    m = config.n_sample
    total = iteration_count(len(y_arr), m, config.h, config.oos)
    if total < 1:
        raise DataError(
            f"fewer than one iteration: N={len(y_arr)}, M={m}, |h|={abs(config.h)}, "
            f"oos={config.oos}"
        )
    if config.start > total:
        raise ConfigError(f"start={config.start} exceeds the {total} iterations")
    Xa_frame = frame
    ya_dates = dates
    Xa, ya, da = align_target(
        y_arr, Xa_frame.to_numpy(dtype=float), config.h, config.do_difference, ya_dates
    )
    models = []
    rows = []
    one_shot = ModelConfig(
        model=config.model,
        calibration=config.calibration,
        alphas=config.alphas,
        lambdas=config.lambdas,
        h=0,  # alignment already applied
        do_intercept=config.do_intercept,
        do_shrinkage_x=config.do_shrinkage_x,
        train_window=config.train_window,
        test_window=config.test_window,
        oos=config.oos if config.calibration == "cv" else 0,
    )
    for i in range(config.start - 1, total):
        window = slice(i, i + m)
        target_idx = i + m + config.oos
        frame_win = pd.DataFrame(Xa[window], columns=Xa_frame.columns)
        meas_win = frame_win.iloc[:, :n_meas]
        ext_win = frame_win.iloc[:, n_meas:] if frame_win.shape[1] > n_meas else None
        fitted = fit_model(meas_win, ya[window], x=ext_win, config=one_shot)
        fitted.dates = list(da[window])
        models.append(fitted)
        row_values = pd.DataFrame(
            [Xa[target_idx]], columns=Xa_frame.columns
        )[list(fitted.coef.index)]
        prediction = float(predict(fitted, row_values)[0])
        rows.append(
            {
                "date": da[target_idx],
                "prediction": prediction,
                "realized": float(ya[target_idx]),
            }
        )
    predictions = pd.DataFrame(rows)
    predictions["error"] = predictions["realized"] - predictions["prediction"]
    perf = performance_measures(
        predictions["prediction"].to_numpy(), predictions["realized"].to_numpy()
    )
    return IterResults(models=models, predictions=predictions, performance=perf, config=config)


LOSS_METRICS = ("squared", "absolute", "directional")


def loss_data(results: Sequence[IterResults], metric: str = "squared") -> pd.DataFrame:
    """Loss matrix across models: rows are shared out-of-sample dates.

    The directional metric scores 1 for a missed direction and 0 otherwise;
    its first date drops since the first prediction has no direction.
    """
    if metric not in LOSS_METRICS:
        raise ConfigError(f"unknown loss metric {metric!r}")
    if not results:
        raise DataError("no iteration results supplied")
    base_dates = list(results[0].predictions["date"])
    for res in results[1:]:
        if list(res.predictions["date"]) != base_dates:
            raise DataError("out-of-sample dates differ across models")
    out = {}
    for k, res in enumerate(results):
        err = res.predictions["error"].to_numpy(dtype=float)
        if metric == "squared":
            values, dates = err**2, base_dates
        elif metric == "absolute":
            values, dates = np.abs(err), base_dates
        else:
            pred = res.predictions["prediction"].to_numpy()
            real = res.predictions["realized"].to_numpy()
            miss = np.sign(pred[1:] - real[:-1]) != np.sign(real[1:] - real[:-1])
            values, dates = miss.astype(float), base_dates[1:]
        out[f"model_{k + 1}"] = values
    return pd.DataFrame(out, index=pd.Index(dates, name="date"))
