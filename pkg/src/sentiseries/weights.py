"""Weight-vector generators for all three aggregation levels.

Three families live here: position weights within a document or sentence
(``within_weights``), document weights within a date bucket
(``across_doc_weights``), and lag weights across time (``time_weights``).
Shaped schemes carry a normalization constant that makes the weights sum
to one; the simple count-style schemes are used unnormalized.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

WITHIN_SCHEMES = (
    "counts",
    "proportional",
    "proportionalPol",
    "proportionalSquareRoot",
    "UShaped",
    "inverseUShaped",
    "exponential",
    "inverseExponential",
    "TFIDF",
)

ACROSS_DOC_SCHEMES = (
    "equal_weight",
    "proportional",
    "inverseProportional",
    "exponential",
    "inverseExponential",
)

TIME_SCHEMES = ("equal_weight", "linear", "exponential", "almon", "beta", "user")


def _normalize(raw: np.ndarray) -> np.ndarray:
    """Scale to unit sum; an all-zero vector degrades to equal weights."""
    total = raw.sum()
    if total == 0.0:
        return np.full(raw.shape, 1.0 / len(raw))
    return raw / total


def idf_weight(n_docs: int, doc_freq: int) -> float:
    """Inverse document frequency: log10(N / (1 + q))."""
    return math.log10(n_docs / (1.0 + doc_freq))


def within_weights(
    scheme: str,
    q_d: int,
    n_pol: int | None = None,
    idf: Sequence[float] | None = None,
) -> np.ndarray:
    """Per-position weights for a document or sentence of q_d tokens.

    ``n_pol`` (count of lexicon-matched tokens) is required for
    proportionalPol; ``idf`` (per-position idf values, see ``idf_weight``)
    is required for TFIDF.
    """
    if q_d < 1:
        raise DataError("within_weights requires at least one token")
    i = np.arange(1, q_d + 1, dtype=float)
    if scheme == "counts":
        return np.ones(q_d)
    if scheme == "proportional":
        return np.full(q_d, 1.0 / q_d)
    if scheme == "proportionalPol":
        if n_pol is None:
            raise ConfigError("proportionalPol weights need the polarized-token count")
        return np.full(q_d, 1.0 / max(n_pol, 1))
    if scheme == "proportionalSquareRoot":
        return np.full(q_d, 1.0 / math.sqrt(q_d))
    if scheme == "UShaped":
        return _normalize((i - (q_d + 1) / 2.0) ** 2)
    if scheme == "inverseUShaped":
        return _normalize(0.25 - ((i - (q_d + 1) / 2.0) ** 2) / q_d**2)
    if scheme == "exponential":
        return _normalize(np.exp(5.0 * (i / q_d - 1.0)))
    if scheme == "inverseExponential":
        return _normalize(np.exp(5.0 * (1.0 - i / q_d)))
    if scheme == "TFIDF":
        if idf is None:
            raise ConfigError("TFIDF weights need per-token idf statistics")
        idf_arr = np.asarray(idf, dtype=float)
        if idf_arr.shape != (q_d,):
            raise ConfigError("idf statistics length must equal the token count")
        return idf_arr
    raise ConfigError(f"unknown within-document weighting scheme {scheme!r}")


def across_doc_weights(
    scheme: str,
    token_counts: Sequence[int],
    alpha_exp_docs: float = 0.1,
) -> np.ndarray:
    """Per-document (or per-sentence) weights inside one aggregation window."""
    q = np.asarray(token_counts, dtype=float)
    if q.size == 0:
        raise DataError("across-document weights need at least one document")
    n = q.size
    if scheme == "equal_weight":
        return np.full(n, 1.0 / n)
    z = q.sum()
    if z == 0.0:
        raise DataError(f"across-document scheme {scheme!r} on a zero-token window")
    if scheme == "proportional":
        return q / z
    if scheme == "inverseProportional":
        if np.any(q == 0.0):
            raise DataError("inverseProportional weights undefined for zero-token documents")
        return _normalize(1.0 / q)
    alpha = 10.0 * alpha_exp_docs
    if scheme == "exponential":
        return _normalize(np.exp(alpha * (q / z - 1.0)))
    if scheme == "inverseExponential":
        return _normalize(np.exp(alpha * (1.0 - q / z)))
    raise ConfigError(f"unknown across-document weighting scheme {scheme!r}")


def combine_weights(
    values: np.ndarray,
    token_counts: np.ndarray,
    scheme: str,
    ignore_zeros: bool,
    alpha_exp_docs: float = 0.1,
) -> np.ndarray:
    """Across-unit weights aligned with ``values``; excluded units get 0.

    With ``ignore_zeros`` the zero-valued units are left out of the weight
    normalization entirely, so the weighted sum of a window equals
    ``combine_weights(...) @ values``. An all-zero window yields all-zero
    weights.
    """
    theta = np.zeros(len(values))
    if ignore_zeros:
        mask = values != 0.0
        if not mask.any():
            return theta
        theta[mask] = across_doc_weights(scheme, token_counts[mask], alpha_exp_docs)
    else:
        theta[:] = across_doc_weights(scheme, token_counts, alpha_exp_docs)
    return theta


def format_param(value: float) -> str:
    """Compact parameter rendering used in generated scheme names."""
    return format(float(value), "g")


def _almon_curve(x: np.ndarray, r: int, r_max: int) -> np.ndarray:
    return (1.0 - x) ** (r_max - r) * (1.0 - (1.0 - x) ** r)


def _beta_density(x: np.ndarray, a: float, b: float) -> np.ndarray:
    # a, b >= 1 keeps the density finite on (0, 1]; the x = 1 endpoint is 0
    # for b > 1 and the finite limit value for b = 1.
    coef = math.gamma(a + b) / (math.gamma(a) * math.gamma(b))
    out = np.zeros_like(x)
    interior = x < 1.0
    out[interior] = coef * x[interior] ** (a - 1.0) * (1.0 - x[interior]) ** (b - 1.0)
    if b == 1.0:
        out[~interior] = coef * x[~interior] ** (a - 1.0)
    return out


def time_weights(
    schemes: str | Iterable[str],
    lag: int,
    alphas_exp: Sequence[float] = (0.1,),
    do_inverse_exp: bool = False,
    orders_alm: Sequence[int] = (1, 2, 3),
    do_inverse_alm: bool = True,
    a_beta: Sequence[float] = (1.0,),
    b_beta: Sequence[float] = (1.0,),
    user: Mapping[str, Sequence[float]] | None = None,
) -> dict[str, np.ndarray]:
    """Lag-weight vectors, one entry per generated scheme name.

    Positions run 1..lag with position ``lag`` the most recent date.
    Parameter vectors fan out into one scheme per value (exponential per
    alpha, almon per order, beta per (a, b) pair); inverse flags add the
    mirrored curves. All generated schemes sum to one. A lag of 1 means no
    smoothing, so every scheme collapses to the single weight 1.
    """
    if lag < 1:
        raise ConfigError("time aggregation lag must be at least 1")
    if isinstance(schemes, str):
        schemes = [schemes]
    t = np.arange(1, lag + 1, dtype=float)
    x = t / lag
    out: dict[str, np.ndarray] = {}

    def emit(name: str, raw: np.ndarray) -> None:
        if name in out:
            raise ConfigError(f"duplicate time weighting scheme name {name!r}")
        out[name] = np.array([1.0]) if lag == 1 else _normalize(raw)

    for scheme in schemes:
        if scheme == "equal_weight":
            emit("equal_weight", np.full(lag, 1.0 / lag))
        elif scheme == "linear":
            emit("linear", x.copy())
        elif scheme == "exponential":
            for a in alphas_exp:
                alpha = 10.0 * a
                emit(f"exponential{format_param(a)}", np.exp(alpha * (x - 1.0)))
                if do_inverse_exp:
                    emit(f"inverseExponential{format_param(a)}", np.exp(alpha * (1.0 - x)))
        elif scheme == "almon":
            if len(orders_alm) == 0:
                raise ConfigError("almon weighting needs at least one order")
            r_max = max(orders_alm)
            for r in orders_alm:
                if r < 1:
                    raise ConfigError("almon orders must be positive integers")
                emit(f"almon{r}", _almon_curve(x, r, r_max))
                if do_inverse_alm:
                    # evaluate the base curve at reversed positions t -> lag+1-t,
                    # so the inverse is the exact mirror of the base scheme
                    emit(f"almon{r}inv", _almon_curve(x[::-1], r, r_max))
        elif scheme == "beta":
            for a in a_beta:
                for b in b_beta:
                    if a < 1.0 or b < 1.0:
                        raise ConfigError("beta weighting parameters must be >= 1")
                    name = f"beta{format_param(a)}x{format_param(b)}"
                    emit(name, _beta_density(x, float(a), float(b)))
        elif scheme == "user":
            if not user:
                raise ConfigError("user time weighting selected without weight table")
            for name, values in user.items():
                arr = np.asarray(values, dtype=float)
                if arr.shape != (lag,):
                    raise ConfigError(
                        f"user weight table {name!r} has length {arr.size}, expected {lag}"
                    )
                if not np.all(np.isfinite(arr)):
                    raise ConfigError(f"user weight table {name!r} has non-finite values")
                if name in out:
                    raise ConfigError(f"duplicate time weighting scheme name {name!r}")
                out[name] = arr.copy()
        else:
            raise ConfigError(f"unknown time weighting scheme {scheme!r}")
    if not out:
        raise ConfigError("at least one time weighting scheme is required")
    return out
