import warnings

import numpy as np
import pytest
from scipy.stats import norm

from ntunet.core import PairwiseTransform
from ntunet.dgp import (
    ConfigError,
    DegenerateNetworkWarning,
    DgpConfig,
    baseline_config,
    draw_population,
    expected_clamp,
    form_network,
    idset_config,
    index_matrix,
    link_probability_exact,
    rho_exact,
    rho_matrix,
)


def test_continuous_moments():
    pop = draw_population(DgpConfig(n=100_000, seed=1))
    X = pop.covariates
    assert np.all(np.abs(X.mean(axis=0)) < 0.01)
    assert X.min() >= -0.5 and X.max() <= 0.5


def test_binary_frequency():
    pop = draw_population(idset_config("Binary1", n=10_000, seed=2))
    assert set(np.unique(pop.covariates[:, 0])) == {0.0, 1.0}
    assert abs(pop.covariates[:, 0].mean() - 0.5) < 0.02


@pytest.mark.parametrize("support,points", [("AllDiscrete11", 11), ("AllDiscrete101", 101)])
def test_discrete_grids(support, points):
    pop = draw_population(idset_config(support, n=20_000, seed=3))
    grid = np.round(np.linspace(-0.5, 0.5, points), 10)
    for h in range(3):
        vals = np.unique(pop.covariates[:, h])
        assert np.all(np.isin(vals, grid))
        assert vals.size == points


def test_heterogeneity_correlation():
    # Var(X1) = Var(xi) = 1/12 and c1 = c2 give corr(A, X1) = 1/sqrt(2)
    pop = draw_population(idset_config("AllContinuous", n=10_000, seed=4))
    r = np.corrcoef(pop.heterogeneity, pop.covariates[:, 0])[0, 1]
    assert 0.5 <= r <= 0.9
    assert abs(r - 1 / np.sqrt(2)) < 0.03


def test_determinism():
    cfg = baseline_config(n=50, seed=9)
    a = form_network(draw_population(cfg), cfg)
    b = form_network(draw_population(cfg), cfg)
    assert np.array_equal(a.adjacency, b.adjacency)


def test_complete_and_empty_graphs():
    with pytest.warns(DegenerateNetworkWarning):
        cfg = DgpConfig(n=30, beta0=(1.0, 1.0, 1.0), heterogeneity=(0.0, 0.0), seed=1)
        pop = draw_population(cfg)
        # index >= 0 always; push heterogeneity above 1 for a complete graph
        pop2 = type(pop)(pop.covariates, np.full(30, 1.0), pop.xi, pop.seed)
        net = form_network(pop2, cfg)
    assert net.adjacency.sum() == 30 * 29
    with pytest.warns(DegenerateNetworkWarning):
        cfg = DgpConfig(n=30, beta0=(-1.0, -1.0, -1.0), heterogeneity=(0.0, 0.0), seed=1)
        net = form_network(draw_population(cfg), cfg)
    assert net.adjacency.sum() == 0


def test_network_structure(baseline_net):
    _, _, net = baseline_net
    D = net.adjacency
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)


def test_idset_density_matches_oracle():
    cfg = idset_config("AllContinuous", n=1000, seed=7)
    pop = draw_population(cfg)
    net = form_network(pop, cfg)
    rng = np.random.default_rng(123)
    # oracle: average exact link probability over fresh random pairs
    m = 100_000
    X1 = rng.uniform(-0.5, 0.5, size=(m, 3))
    X2 = rng.uniform(-0.5, 0.5, size=(m, 3))
    A1 = 0.25 * X1[:, 0] + 0.25 * rng.uniform(-0.5, 0.5, m)
    A2 = 0.25 * X2[:, 0] + 0.25 * rng.uniform(-0.5, 0.5, m)
    delta = np.abs(X1 - X2) @ np.array(cfg.beta0)
    oracle = link_probability_exact(delta, delta, A1, A2).mean()
    assert abs(net.density - oracle) < 0.02


def test_link_probability_examples():
    assert link_probability_exact(0.5, 0.5, 0.2, 0.1) == pytest.approx(0.42)
    rng = np.random.default_rng(0)
    e = rng.uniform(size=(1_000_000, 2))
    mc = np.mean((0.7 > e[:, 0]) & (0.6 > e[:, 1]))
    assert abs(mc - 0.42) < 0.002
    assert link_probability_exact(-1, -1, 0, 0) == 0
    assert link_probability_exact(2, 2, 0, 0) == 1


def test_link_probability_monotone_grid():
    g = np.linspace(-1.2, 1.2, 20)
    P = link_probability_exact(*np.meshgrid(g, g, g, g, indexing="ij"))
    for ax in range(4):
        assert np.all(np.diff(P, axis=ax) >= 0)


def test_form_network_pair_frequencies():
    cfg = baseline_config(n=12, seed=2)
    pop = draw_population(cfg)
    delta = index_matrix(pop.covariates, cfg)
    A = pop.heterogeneity
    exact = link_probability_exact(delta, delta.T, A[:, None], A[None, :])
    counts = np.zeros((12, 12))
    rng = np.random.default_rng(77)
    reps = 10_000
    for _ in range(reps):
        counts += form_network(pop, cfg, rng=rng).adjacency
    iu, ju = np.triu_indices(12, 1)
    freq = counts[iu, ju] / reps
    assert iu.size >= 50
    assert np.max(np.abs(freq - exact[iu, ju])) < 0.02


def test_shared_shock_is_single_threshold():
    cfg = DgpConfig(n=40, heterogeneity=(0.0, 0.0), seed=3)
    pop = draw_population(cfg)
    net = form_network(pop, cfg, rng=np.random.default_rng(5), shared_shock=True)
    rng = np.random.default_rng(5)
    iu, ju = np.triu_indices(40, 1)
    e = rng.uniform(size=(iu.size, 2))[:, 0]
    delta = index_matrix(pop.covariates, cfg)
    # symmetric w and equal heterogeneity: one threshold decides the link
    assert np.array_equal(net.adjacency[iu, ju], (delta[iu, ju] > e).astype(np.int8))


def test_expected_clamp_oracle():
    rng = np.random.default_rng(1)
    xi = rng.uniform(-0.5, 0.5, size=1_000_000)
    for _ in range(20):
        u, s = rng.uniform(-0.6, 1.4), rng.uniform(0, 1.5)
        mc = np.clip(u + s * xi, 0, 1).mean()
        assert abs(expected_clamp(u, s) - mc) < 0.002


def test_rho_exact_examples():
    cfg = DgpConfig(n=10, beta0=(1.0, 0.0, 0.0), heterogeneity=(0.0, 1.0))
    # delta = |0.5 - 0| = 0.5, a_i = 0.2: 0.7 * E[clamp(0.5 + xi)] = 0.35
    assert rho_exact([0.5, 0, 0], 0.2, [0.0, 0, 0], cfg) == pytest.approx(0.35)
    cfg1 = DgpConfig(n=10, beta0=(3.0, 0.0, 0.0), heterogeneity=(0.0, 0.1))
    assert rho_exact([0.5, 0, 0], 1.0, [-0.5, 0, 0], cfg1) == pytest.approx(1.0)


def test_rho_exact_monte_carlo_configs():
    rng = np.random.default_rng(8)
    xi = rng.uniform(-0.5, 0.5, size=1_000_000)
    for t in range(100):
        b = rng.uniform(-1, 1, size=3)
        c1, c2 = rng.uniform(-0.5, 1.0), rng.uniform(0, 1.0)
        w = PairwiseTransform("asymmetric_last_coord" if t % 2 else "symmetric_abs_diff")
        cfg = DgpConfig(n=10, beta0=b, heterogeneity=(c1, c2), w=w)
        xi_, x = rng.uniform(-0.5, 0.5, 3), rng.uniform(-0.5, 0.5, 3)
        a = rng.uniform(-0.5, 0.5)
        own = np.clip(w(xi_, x) @ b + a, 0, 1)
        partner = np.clip(w(x, xi_) @ b + c1 * x[0] + c2 * xi, 0, 1)
        assert abs(rho_exact(xi_, a, x, cfg) - own * partner.mean()) < 0.002


def test_rho_exact_monotone():
    cfg = baseline_config(n=10)
    x_i, x = np.array([0.1, -0.2, 0.3]), np.array([-0.1, 0.2, 0.0])
    a = np.linspace(-0.3, 0.3, 50)
    r = np.array([rho_exact(x_i, ai, x, cfg) for ai in a])
    assert np.all(np.diff(r) > 0)  # interior: no clamp binds here


def test_rho_matrix_matches_scalar(idset_world):
    cfg, pop = idset_world
    R = rho_matrix(pop, cfg)
    for i, k in [(0, 1), (5, 9), (30, 2)]:
        assert R[i, k] == pytest.approx(rho_exact(pop.covariates[i], pop.heterogeneity[i], pop.covariates[k], cfg), abs=1e-14)


def test_callable_heterogeneity_rejected():
    cfg = DgpConfig(n=10, heterogeneity=lambda X, xi: X[:, 0] ** 2 + xi)
    pop = draw_population(cfg)
    assert pop.heterogeneity.shape == (10,)
    with pytest.raises(ConfigError):
        rho_exact(pop.covariates[0], 0.0, pop.covariates[1], cfg)


def test_config_validation():
    with pytest.raises(ConfigError):
        DgpConfig(n=10, support="Nope")
    with pytest.raises(ConfigError):
        DgpConfig(n=10, d=3, beta0=(1.0, 0.0))
    with pytest.raises(ConfigError):
        DgpConfig(n=10, beta0=(0.0, 0.0, 0.0))
