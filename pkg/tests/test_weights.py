import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sentiseries.errors import ConfigError, DataError
from sentiseries.weights import (
    across_doc_weights,
    combine_weights,
    idf_weight,
    time_weights,
    within_weights,
)

SHAPED_WITHIN = ("UShaped", "inverseUShaped", "exponential", "inverseExponential")


# -- within-document -------------------------------------------------------


def test_counts_all_ones():
    assert np.array_equal(within_weights("counts", 7), np.ones(7))


def test_proportional():
    assert np.allclose(within_weights("proportional", 4), 0.25)


def test_proportional_pol_guard():
    # zero polarized tokens: the max{n_pol, 1} guard keeps weights at 1
    assert np.allclose(within_weights("proportionalPol", 3, n_pol=0), 1.0)
    assert np.allclose(within_weights("proportionalPol", 3, n_pol=4), 0.25)


def test_proportional_square_root():
    assert np.allclose(within_weights("proportionalSquareRoot", 9), 1.0 / 3.0)


def test_exponential_matches_direct_formula():
    # independent evaluation: exp(5 (i/Q - 1)) normalized to unit sum
    q = 4
    raw = [math.exp(5.0 * (i / q - 1.0)) for i in range(1, q + 1)]
    expected = np.array(raw) / sum(raw)
    assert np.allclose(within_weights("exponential", q), expected, atol=1e-15)


def test_inverse_exponential_is_reversed_exponential():
    q = 6
    base = within_weights("exponential", q)
    inverse = within_weights("inverseExponential", q)
    assert np.allclose(inverse, base[::-1], atol=1e-12)


def test_ushaped_matches_direct_formula():
    q = 5
    raw = [(i - (q + 1) / 2.0) ** 2 for i in range(1, q + 1)]
    expected = np.array(raw) / sum(raw)
    assert np.allclose(within_weights("UShaped", q), expected)


def test_ushaped_single_token_degrades_to_equal():
    assert np.allclose(within_weights("UShaped", 1), [1.0])


def test_tfidf_log_of_one_is_zero():
    assert idf_weight(10, 9) == pytest.approx(0.0)
    w = within_weights("TFIDF", 2, idf=[idf_weight(10, 9), idf_weight(10, 4)])
    assert w[0] == pytest.approx(0.0)
    assert w[1] == pytest.approx(math.log10(2.0))


def test_tfidf_requires_stats():
    with pytest.raises(ConfigError):
        within_weights("TFIDF", 3)


def test_unknown_scheme():
    with pytest.raises(ConfigError):
        within_weights("nope", 3)


@pytest.mark.parametrize("scheme", SHAPED_WITHIN)
@pytest.mark.parametrize("q", [1, 2, 5, 30, 270])
def test_shaped_within_sum_to_one(scheme, q):
    w = within_weights(scheme, q)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert (w >= 0).all()


# -- across-document -------------------------------------------------------


def test_equal_weight():
    assert np.allclose(across_doc_weights("equal_weight", [5, 50, 500, 5]), 0.25)


def test_across_proportional_hand_normalized():
    assert np.allclose(across_doc_weights("proportional", [10, 30]), [0.25, 0.75])


def test_across_inverse_proportional_hand_normalized():
    assert np.allclose(across_doc_weights("inverseProportional", [10, 30]), [0.75, 0.25])


def test_across_exponential_matches_direct_formula():
    counts = [10, 20, 30]
    z = 60.0
    alpha = 10.0 * 0.2
    raw = [math.exp(alpha * (q / z - 1.0)) for q in counts]
    expected = np.array(raw) / sum(raw)
    got = across_doc_weights("exponential", counts, alpha_exp_docs=0.2)
    assert np.allclose(got, expected, atol=1e-15)


def test_zero_token_window_rejected():
    with pytest.raises(DataError):
        across_doc_weights("proportional", [0, 0])
    with pytest.raises(DataError):
        across_doc_weights("inverseProportional", [0, 5])


@pytest.mark.parametrize(
    "scheme", ["equal_weight", "proportional", "inverseProportional", "exponential", "inverseExponential"]
)
def test_across_doc_sum_to_one(scheme):
    w = across_doc_weights(scheme, [3, 14, 159, 2, 65], alpha_exp_docs=0.3)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert (w >= 0).all()


def test_combine_weights_ignore_zeros_renormalizes():
    values = np.array([0.0, 4.0])
    counts = np.array([10.0, 10.0])
    theta = combine_weights(values, counts, "equal_weight", ignore_zeros=True)
    assert np.allclose(theta, [0.0, 1.0])
    assert theta @ values == pytest.approx(4.0)


def test_combine_weights_all_zero_window():
    theta = combine_weights(np.zeros(3), np.ones(3), "equal_weight", ignore_zeros=True)
    assert np.allclose(theta, 0.0)


# -- across-time -----------------------------------------------------------


def test_equal_weight_lag30():
    w = time_weights("equal_weight", 30)["equal_weight"]
    assert np.allclose(w, 1.0 / 30.0)


def test_lag_one_means_no_aggregation():
    for scheme in ("equal_weight", "linear", "exponential", "almon", "beta"):
        out = time_weights(scheme, 1, a_beta=[2], b_beta=[3])
        for w in out.values():
            assert np.array_equal(w, [1.0])


def test_linear_lag2_hand_values():
    assert np.allclose(time_weights("linear", 2)["linear"], [1 / 3, 2 / 3])


def test_beta_uniform_at_one_one():
    # Beta(1, 1) is the flat density
    w = time_weights("beta", 5, a_beta=[1], b_beta=[1])["beta1x1"]
    assert np.allclose(w, 0.2)


def test_beta_matches_direct_density():
    a, b = 2.0, 3.0
    tau = 7
    coef = math.gamma(a + b) / (math.gamma(a) * math.gamma(b))
    raw = []
    for t in range(1, tau + 1):
        x = t / tau
        raw.append(coef * x ** (a - 1) * (1 - x) ** (b - 1) if x < 1 else 0.0)
    expected = np.array(raw) / sum(raw)
    got = time_weights("beta", tau, a_beta=[a], b_beta=[b])[f"beta2x3"]
    assert np.allclose(got, expected, atol=1e-14)


def test_beta_parameters_below_one_rejected():
    with pytest.raises(ConfigError):
        time_weights("beta", 5, a_beta=[0.5], b_beta=[1])


def test_almon_order_one_is_linear():
    # r = R = 1 collapses the polynomial to t/tau before normalization
    got = time_weights("almon", 4, orders_alm=[1], do_inverse_alm=False)["almon1"]
    assert np.allclose(got, np.array([1, 2, 3, 4]) / 10.0)


def test_almon_matches_direct_polynomial():
    tau, orders = 6, [1, 2, 3]
    r_max = max(orders)
    out = time_weights("almon", tau, orders_alm=orders, do_inverse_alm=False)
    for r in orders:
        raw = []
        for t in range(1, tau + 1):
            x = t / tau
            raw.append((1 - x) ** (r_max - r) * (1 - (1 - x) ** r))
        expected = np.array(raw) / sum(raw)
        assert np.allclose(out[f"almon{r}"], expected, atol=1e-14)


def test_inverse_variants_reverse_base():
    tau = 9
    out = time_weights(
        ["exponential", "almon"],
        tau,
        alphas_exp=[0.3],
        do_inverse_exp=True,
        orders_alm=[1, 2],
        do_inverse_alm=True,
    )
    assert np.allclose(out["inverseExponential0.3"], out["exponential0.3"][::-1], atol=1e-12)
    assert np.allclose(out["almon1inv"], out["almon1"][::-1], atol=1e-12)
    assert np.allclose(out["almon2inv"], out["almon2"][::-1], atol=1e-12)


def test_exponential_scheme_names_carry_alpha():
    out = time_weights("exponential", 4, alphas_exp=[0.1, 0.5])
    assert set(out) == {"exponential0.1", "exponential0.5"}


def test_beta_cross_product_counts_every_scheme():
    out = time_weights("beta", 10, a_beta=[1, 2, 3], b_beta=[1, 2])
    assert len(out) == 6


def test_user_weights_validated_and_passed_through():
    table = {"mine": [0.5, 0.25, 0.25]}
    out = time_weights("user", 3, user=table)
    assert np.allclose(out["mine"], [0.5, 0.25, 0.25])
    with pytest.raises(ConfigError):
        time_weights("user", 4, user=table)
    with pytest.raises(ConfigError):
        time_weights("user", 3, user=None)


def test_lag_below_one_rejected():
    with pytest.raises(ConfigError):
        time_weights("linear", 0)


@pytest.mark.parametrize("tau", [1, 5, 30, 270])
@pytest.mark.parametrize(
    "scheme,params",
    [
        ("equal_weight", {}),
        ("linear", {}),
        ("exponential", {"alphas_exp": [0.1, 1.0, 3.0], "do_inverse_exp": True}),
        ("almon", {"orders_alm": [1, 2, 3], "do_inverse_alm": True}),
        ("beta", {"a_beta": [1, 2, 3], "b_beta": [1, 2, 3]}),
    ],
)
def test_time_schemes_sum_to_one_and_nonnegative(tau, scheme, params):
    for name, w in time_weights(scheme, tau, **params).items():
        assert w.sum() == pytest.approx(1.0, abs=1e-12), name
        assert (w >= 0).all(), name
        assert len(w) == tau


@given(
    tau=st.integers(min_value=1, max_value=80),
    alpha=st.floats(min_value=0.05, max_value=3.0),
    a=st.floats(min_value=1.0, max_value=5.0),
    b=st.floats(min_value=1.0, max_value=5.0),
)
def test_time_weight_normalization_property(tau, alpha, a, b):
    out = time_weights(
        ["equal_weight", "linear", "exponential", "beta"],
        tau,
        alphas_exp=[alpha],
        do_inverse_exp=True,
        a_beta=[a],
        b_beta=[b],
    )
    for name, w in out.items():
        assert w.sum() == pytest.approx(1.0, abs=1e-12), name
        assert (w >= -1e-15).all(), name
