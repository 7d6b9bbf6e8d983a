import itertools

import numpy as np
import pytest

import regsim as rs
from conftest import random_distribution, random_family
from oracles import counts_of

TOL = 1e-10
EXACT = 1e-12


def disjoint_pair():
    return rs.Distribution(np.array([1.0, 0.0])), rs.Distribution(np.array([0.0, 1.0]))


def two_member_family():
    return rs.explicit_family([[1.0, 1.0], [0.0, 1.0]], name="const1+ind1")


# -- mixtures ----------------------------------------------------------------


def test_build_mixture_disjoint():
    d0, d1 = disjoint_pair()
    inst = rs.build_mixture(d0, d1, 0.5)
    assert list(inst.d_x.weights) == [0.5, 0.5]
    assert list(inst.g.values) == [0.0, 1.0]


def test_build_mixture_equal_sources_gives_constant_prior():
    d = rs.Distribution(np.array([0.3, 0.7]))
    inst = rs.build_mixture(d, d, 0.25)
    assert np.allclose(inst.g.values, 0.25, atol=EXACT)


def test_build_mixture_tilted_hand_value():
    d0 = rs.Distribution(np.array([0.5, 0.5]))
    d1 = rs.Distribution(np.array([0.0, 1.0]))
    inst = rs.build_mixture(d0, d1, 0.1)
    assert np.allclose(inst.d_x.weights, [0.45, 0.55], atol=EXACT)
    assert inst.g.values[0] == 0.0
    assert inst.g.values[1] == pytest.approx(2.0 / 11.0, abs=EXACT)


def test_mixture_views_agree_pointwise():
    rng = np.random.default_rng(40)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        d0, d1 = random_distribution(rng, n), random_distribution(rng, n)
        prior = float(rng.uniform(0.05, 0.95))
        inst = rs.build_mixture(d0, d1, prior)
        assert np.max(np.abs(inst.g.values * inst.d_x.weights - prior * d1.weights)) <= EXACT


def test_mixture_zero_mass_convention():
    d0 = rs.Distribution(np.array([1.0, 0.0, 0.0]))
    d1 = rs.Distribution(np.array([0.0, 1.0, 0.0]))
    inst = rs.build_mixture(d0, d1, 0.3)
    assert inst.g.values[2] == 0.3  # zero-mass point pinned to the prior


# -- proxies ------------------------------------------------------------------


def test_proxies_of_exact_simulator_reproduce_sources():
    rng = np.random.default_rng(41)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        d0, d1 = random_distribution(rng, n), random_distribution(rng, n)
        prior = float(rng.uniform(0.2, 0.8))
        inst = rs.build_mixture(d0, d1, prior)
        proxies = rs.build_proxies(inst, inst.g)
        assert proxies.p == pytest.approx(prior, abs=1e-12)
        assert np.allclose(proxies.tilde1.weights, d1.weights, atol=1e-12)
        assert np.allclose(proxies.tilde0.weights, d0.weights, atol=1e-12)


def test_proxies_bayes_by_hand():
    d0 = rs.Distribution(np.array([0.75, 0.25]))
    d1 = rs.Distribution(np.array([0.25, 0.75]))
    inst = rs.build_mixture(d0, d1, 0.5)  # mixture is uniform
    h = rs.BoundedFn(np.array([0.25, 0.75]))
    proxies = rs.build_proxies(inst, h)
    assert proxies.p == pytest.approx(0.5, abs=EXACT)
    assert np.allclose(proxies.tilde1.weights, [0.25, 0.75], atol=EXACT)
    assert np.allclose(proxies.tilde0.weights, [0.75, 0.25], atol=EXACT)


def test_proxies_uninformative_simulator():
    d0, d1 = disjoint_pair()
    inst = rs.build_mixture(d0, d1, 0.5)
    h = rs.BoundedFn(np.array([0.5, 0.5]))
    proxies = rs.build_proxies(inst, h)
    assert np.allclose(proxies.tilde0.weights, inst.d_x.weights, atol=EXACT)
    assert np.allclose(proxies.tilde1.weights, inst.d_x.weights, atol=EXACT)


def test_proxies_remix_to_mixture():
    rng = np.random.default_rng(42)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        inst = rs.build_mixture(
            random_distribution(rng, n), random_distribution(rng, n), float(rng.uniform(0.1, 0.9))
        )
        h = rs.BoundedFn(rng.uniform(0.05, 0.95, size=n))
        proxies = rs.build_proxies(inst, h)
        remixed = proxies.p * proxies.tilde1.weights + (1 - proxies.p) * proxies.tilde0.weights
        assert np.max(np.abs(remixed - inst.d_x.weights)) <= EXACT


def test_proxies_degenerate_simulator_rejected():
    d0, d1 = disjoint_pair()
    inst = rs.build_mixture(d0, d1, 0.5)
    with pytest.raises(rs.ValidationError, match="proxy undefined"):
        rs.build_proxies(inst, rs.BoundedFn(np.array([0.0, 0.0])))


# -- product tests -------------------------------------------------------------


def test_product_test_k1_is_half_threshold():
    h = rs.BoundedFn(np.array([0.3, 0.5, 0.8]))
    test = rs.product_distinguisher(h, 1, "balanced")
    vals = test.on_counts(np.eye(3, dtype=np.int64))
    assert list(vals) == [0.0, 0.0, 1.0]  # ties at h = 1/2 resolve to 0


def test_product_test_tie_example():
    h = rs.BoundedFn(np.array([0.25, 0.75]))
    test = rs.product_distinguisher(h, 2, "balanced")
    counts = np.array([[0, 2], [2, 0], [1, 1]], dtype=np.int64)
    assert list(test.on_counts(counts)) == [1.0, 0.0, 0.0]
    assert list(test.tie_on_counts(counts)) == [0.0, 0.0, 1.0]


def test_product_test_tilted_example():
    h = rs.BoundedFn(np.array([0.0, 2.0 / 11.0]))
    test = rs.product_distinguisher(h, 1, "tilted", epsilon=0.1)
    vals = test.on_counts(np.eye(2, dtype=np.int64))
    assert list(vals) == [0.0, 1.0]


def test_product_test_extreme_values():
    h = rs.BoundedFn(np.array([0.0, 1.0]))
    test = rs.product_distinguisher(h, 2, "balanced")
    counts = np.array([[2, 0], [0, 2], [1, 1]], dtype=np.int64)
    # all-zero h: lhs -inf vs rhs 0 -> 0; all-one: lhs 0 vs -inf -> 1; mixed: tie of -inf
    assert list(test.on_counts(counts)) == [0.0, 1.0, 0.0]


def test_optimal_test_for_hat_pair_brute_force():
    rng = np.random.default_rng(43)
    for _ in range(12):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, 5))
        inst = rs.build_mixture(
            random_distribution(rng, n), random_distribution(rng, n), 0.5
        )
        h = rs.BoundedFn(rng.uniform(0.05, 0.95, size=n))
        proxies = rs.build_proxies(inst, h)
        test = rs.product_distinguisher(h, k, "balanced")
        adv = rs.test_advantage(test, proxies.hat0, proxies.hat1, k)
        tv_raw = rs.kfold_tv(proxies.hat0, proxies.hat1, k)
        mass1 = float(proxies.hat1.sum()) ** k
        mass0 = float(proxies.hat0.sum()) ** k
        # exact: advantage of the strict test is the positive-part sum
        brute = 0.0
        for tup in itertools.product(range(n), repeat=k):
            a = np.prod([proxies.hat1[z] for z in tup])
            b = np.prod([proxies.hat0[z] for z in tup])
            val = float(test.on_counts(counts_of(tup, n)[None, :])[0])
            brute += (a - b) * val
        assert adv == pytest.approx(abs(brute), abs=1e-12)
        assert abs(adv - tv_raw) <= 0.5 * abs(mass1 - mass0) + 1e-12


# -- two-proxy verification -----------------------------------------------------


def run_two_proxy(rng, n, eps, k, prior_family=None):
    d0, d1 = random_distribution(rng, n), random_distribution(rng, n)
    family = prior_family or random_family(rng, n, 6)
    gamma = eps * eps / 20.0
    inst = rs.build_mixture(d0, d1, 0.5)
    h, _ = rs.calibrated_multiaccuracy(
        inst.g, inst.d_x, family, rs.BoostParams(epsilon=eps, gamma=gamma)
    )
    return rs.verify_two_proxy(inst, h, family, eps, gamma, k)


def test_two_proxy_exact_simulator_collapses_everything():
    d0 = rs.Distribution(np.array([0.6, 0.4]))
    d1 = rs.Distribution(np.array([0.2, 0.8]))
    inst = rs.build_mixture(d0, d1, 0.5)
    k = 3
    report = rs.verify_two_proxy(inst, inst.g, two_member_family(), 1e-9, 1e-9, k)
    assert report.passed
    assert report.inequality("indistinguishability-proxy0").lhs <= EXACT
    assert report.inequality("indistinguishability-proxy1").lhs <= EXACT
    assert report.audits["p"] == pytest.approx(0.5, abs=EXACT)
    assert report.audits["advantage"] == pytest.approx(
        rs.kfold_tv(d0, d1, k), abs=EXACT
    )
    assert report.inequality("hybrid-step-0").lhs <= EXACT
    assert report.inequality("hybrid-step-1").lhs <= EXACT


def test_two_proxy_identical_sources():
    d = rs.Distribution(np.array([0.4, 0.6]))
    inst = rs.build_mixture(d, d, 0.5)
    fam = two_member_family()
    h, _ = rs.calibrated_multiaccuracy(
        inst.g, inst.d_x, fam, rs.BoostParams(epsilon=0.05, gamma=0.001)
    )
    report = rs.verify_two_proxy(inst, h, fam, 0.05, 0.001, 2)
    assert report.passed
    assert report.audits["advantage"] <= TOL
    assert report.audits["tv_kfold_proxies"] <= 0.05


def test_two_proxy_disjoint_end_to_end():
    d0, d1 = disjoint_pair()
    inst = rs.build_mixture(d0, d1, 0.5)
    fam = two_member_family()
    h, _ = rs.calibrated_multiaccuracy(
        inst.g, inst.d_x, fam, rs.BoostParams(epsilon=0.05, gamma=0.05)
    )
    report = rs.verify_two_proxy(inst, h, fam, 0.05, 0.05, 3)
    assert report.passed, report.failed_names()


def test_two_proxy_random_instances():
    rng = np.random.default_rng(44)
    for _ in range(10):
        report = run_two_proxy(
            rng, int(rng.integers(2, 5)), float(rng.choice([0.1, 0.2])), int(rng.integers(1, 5))
        )
        assert report.passed, report.failed_names()


def test_two_proxy_hypothesis_gate():
    d0, d1 = disjoint_pair()
    inst = rs.build_mixture(d0, d1, 0.5)
    bad_h = rs.BoundedFn(np.array([0.9, 0.1]))  # anti-correlated with g
    with pytest.raises(rs.ValidationError, match="regularity"):
        rs.verify_two_proxy(inst, bad_h, two_member_family(), 0.05, 0.05, 2)
    with pytest.raises(rs.ValidationError, match="prior 1/2"):
        rs.verify_two_proxy(rs.build_mixture(d0, d1, 0.3), inst.g, two_member_family(), 0.05, 0.05, 2)


def test_hybrid_bound_check_examples():
    d0 = rs.Distribution(np.array([0.6, 0.4]))
    d1 = rs.Distribution(np.array([0.2, 0.8]))
    inst = rs.build_mixture(d0, d1, 0.5)
    # exact simulator: hats equal the sources, every swap is free
    proxies = rs.build_proxies(inst, inst.g)
    assert rs.hybrid_bound_check(inst.g, d0, proxies.hat0, 3, 0.0) <= EXACT
    # k = 1 is the plain expectation gap
    h = rs.BoundedFn(np.array([0.4, 0.7]))
    proxies_h = rs.build_proxies(inst, h)
    test = rs.product_distinguisher(h, 1, "balanced")
    gap = rs.hybrid_bound_check(h, d1, proxies_h.hat1, 1, 0.1, test=test)
    direct = abs(
        rs.expectation(rs.BoundedFn(test.on_counts(np.eye(2, dtype=np.int64))), d1)
        - float(np.dot(proxies_h.hat1, test.on_counts(np.eye(2, dtype=np.int64))))
    )
    assert gap == pytest.approx(direct, abs=EXACT)
    # k = 3 with a calibrated simulator (the hypothesis the bound needs):
    # every swap is controlled by twice the calibration target
    gamma = 0.02
    fam = two_member_family()
    hc, _ = rs.calibrated_multiaccuracy(
        inst.g, inst.d_x, fam, rs.BoostParams(epsilon=0.1, gamma=gamma)
    )
    proxies_c = rs.build_proxies(inst, hc)
    test3 = rs.product_distinguisher(hc, 3, "balanced")
    for b, hat in ((d0, proxies_c.hat0), (d1, proxies_c.hat1)):
        assert rs.hybrid_bound_check(hc, b, hat, 3, gamma, test=test3) <= 2 * gamma + TOL


# -- single-proxy verification ---------------------------------------------------


def test_single_proxy_exact_simulator():
    d0 = rs.Distribution(np.array([0.5, 0.5]))
    d1 = rs.Distribution(np.array([0.0, 1.0]))
    eps = 0.2
    inst = rs.build_mixture(d0, d1, eps)
    report = rs.verify_single_proxy(inst, inst.g, two_member_family(), eps, 1e-9, 2)
    assert report.passed, report.failed_names()
    assert report.inequality("indistinguishability-proxy1").lhs <= eps + EXACT
    assert report.audits["p"] == pytest.approx(eps, abs=EXACT)


def test_single_proxy_identical_sources():
    d = rs.Distribution(np.array([0.4, 0.6]))
    eps = 0.2
    inst = rs.build_mixture(d, d, eps)
    fam = two_member_family()
    h, _ = rs.calibrated_multiaccuracy(
        inst.g, inst.d_x, fam, rs.BoostParams(epsilon=eps * eps, gamma=eps ** 3 / 20)
    )
    report = rs.verify_single_proxy(inst, h, fam, eps, eps ** 3 / 20, 2)
    assert report.passed
    assert report.audits["advantage"] <= 2 * eps


def test_single_proxy_end_to_end():
    d0 = rs.Distribution(np.array([0.5, 0.5]))
    d1 = rs.Distribution(np.array([0.0, 1.0]))
    eps, gamma, k = 0.2, 0.01, 2
    inst = rs.build_mixture(d0, d1, eps)
    fam = two_member_family()
    h, _ = rs.calibrated_multiaccuracy(
        inst.g, inst.d_x, fam, rs.BoostParams(epsilon=eps * eps, gamma=gamma)
    )
    report = rs.verify_single_proxy(inst, h, fam, eps, gamma, k)
    assert report.passed, report.failed_names()
    assert "tilde0" in report.witnesses


def test_single_proxy_gamma_gate():
    d0, d1 = disjoint_pair()
    inst = rs.build_mixture(d0, d1, 0.2)
    with pytest.raises(rs.ValidationError, match="gamma"):
        rs.verify_single_proxy(inst, inst.g, two_member_family(), 0.2, 0.15, 2)


# -- characterize ------------------------------------------------------------------


def test_characterize_identical_sources():
    d = rs.Distribution(np.array([0.35, 0.65]))
    report = rs.characterize(d, d, two_member_family(), 0.1, 2)
    assert report.passed, report.failed_names()
    chain = report.extras["chain"]
    keps = chain["k_epsilon"]
    assert chain["family_distance_lower"] <= keps + TOL
    assert chain["proxy_tv"] <= keps + TOL
    assert chain["family_distance_upper"] <= keps + TOL


def test_characterize_disjoint_sources_saturate():
    d0, d1 = disjoint_pair()
    report = rs.characterize(d0, d1, two_member_family(), 0.1, 3)
    assert report.passed, report.failed_names()
    assert report.extras["chain"]["proxy_tv"] >= 1.0 - 3 * 0.1
    assert report.extras["chain"]["distinct_families"] is True


def test_characterize_single_proxy_marks_tilde0():
    d0 = rs.Distribution(np.array([0.5, 0.5]))
    d1 = rs.Distribution(np.array([0.0, 1.0]))
    report = rs.characterize(d0, d1, two_member_family(), 0.2, 2, mode="single-proxy")
    assert report.passed, report.failed_names()
    assert "d0" in report.witnesses["tilde0"]


def test_characterize_super_single_level_chain():
    d0, d1 = disjoint_pair()
    levels = [
        rs.explicit_family([[1.0, 1.0]], name="L0"),
        two_member_family(),
        rs.explicit_family([[1.0, 1.0], [0.0, 1.0], [1.0, 0.0]], name="L2"),
    ]
    ladder = rs.GradedLadder(levels, name="chain").padded(40)
    growth = rs.GrowthMap.shift(ladder, 1)
    report = rs.characterize_super(d0, d1, ladder, growth, 0.1, 2)
    assert report.passed, report.failed_names()
    chain = report.extras["chain"]
    assert chain["distinct_families"] is False
    assert chain["lower_family"] == chain["upper_family"]
    assert chain["chain_level"] == chain["simulator_level"] + 1


def test_characterize_super_identity_growth_flags_degenerate():
    d0, d1 = disjoint_pair()
    fam = rs.explicit_family([[1.0, 1.0], [0.0, 1.0], [1.0, 0.0]], name="rich")
    ladder = rs.GradedLadder([fam, fam], name="flat")
    growth = rs.GrowthMap.identity(ladder)
    report = rs.characterize_super(d0, d1, ladder, growth, 0.1, 2)
    assert "degenerate_growth" in report.extras["chain"]


def test_advantage_never_exceeds_true_tv():
    rng = np.random.default_rng(45)
    for _ in range(10):
        report = run_two_proxy(rng, int(rng.integers(2, 5)), 0.2, int(rng.integers(1, 4)))
        assert report.audits["advantage"] <= report.audits["tv_kfold_true"] + TOL


def test_report_json_schema():
    d0, d1 = disjoint_pair()
    report = rs.characterize(d0, d1, two_member_family(), 0.1, 2)
    payload = report.to_json()
    assert set(payload) == {
        "mode", "instance", "params", "audits", "inequalities", "witnesses", "extras",
    }
    for iq in payload["inequalities"]:
        assert set(iq) == {"name", "lhs", "rhs", "slack", "pass"}
