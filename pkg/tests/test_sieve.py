import numpy as np
import pytest

from ntunet.core import InputError, NetworkData
from ntunet.dgp import baseline_config, draw_population, form_network, rho_matrix
from ntunet.sieve import build_basis, fit_all, fit_rho, lower_median, predict_rho, rho_hat_matrix


def test_basis_size_and_knots():
    X = np.random.default_rng(0).uniform(-0.5, 0.5, size=(10_000, 3))
    basis = build_basis(X)
    assert basis.size == 10
    assert np.all(np.abs(basis.knots) < 0.02)
    assert lower_median([0, 0, 1, 1]) == 0.0


def test_too_few_rows():
    with pytest.raises(InputError):
        build_basis(np.zeros((19, 3)))


def _net_from(D, X):
    return NetworkData(adjacency=D, covariates=X)


def test_constant_links_fit_one():
    n = 30
    X = np.random.default_rng(1).uniform(-0.5, 0.5, size=(n, 2))
    D = np.ones((n, n), dtype=int) - np.eye(n, dtype=int)
    net = _net_from(D, X)
    est = fit_rho(0, net, build_basis(X))
    np.testing.assert_allclose(predict_rho(est, X), 1.0, atol=1e-10)
    assert predict_rho(est, X[3]) == pytest.approx(1.0)


def test_exact_recovery_in_span():
    # rows of a least-squares fit reproduce a response lying in the basis span
    rng = np.random.default_rng(2)
    n = 40
    X = rng.uniform(-0.5, 0.5, size=(n, 2))
    basis = build_basis(X)
    Z = basis(X)
    coef = rng.normal(scale=0.1, size=basis.size)
    truth = Z @ coef
    # node 0 has "links" equal to the spline itself; build the fit directly
    from ntunet.sieve import RhoEstimate
    keep = np.arange(n) != 0
    sol, *_ = np.linalg.lstsq(Z[keep], truth[keep], rcond=None)
    est = RhoEstimate(0, sol, basis, 0.0, basis.size)
    assert np.max(np.abs(est.raw(X) - truth)) < 1e-8


def test_fit_rho_uses_links_of_node():
    cfg = baseline_config(n=80, seed=3)
    net = form_network(draw_population(cfg), cfg)
    est = fit_all(net)
    i = 4
    keep = np.arange(80) != i
    raw = est[i].raw(net.covariates[keep])
    # intercept orthogonality: mean fitted value equals the degree share
    assert abs(raw.mean() - net.adjacency[i, keep].mean()) < 1e-10


def test_clamping():
    from ntunet.sieve import RhoEstimate, SplineBasis
    basis = SplineBasis(knots=np.array([0.0]))
    est = RhoEstimate(0, np.array([-0.03, 0, 0, 0]), basis, 0.0, 4)
    assert predict_rho(est, [0.2]) == 0.0


def test_rank_deficiency_flagged():
    cfg = baseline_config(n=60, seed=1)
    pop = draw_population(cfg)
    X = pop.covariates.copy()
    X[:, 0] = (X[:, 0] > 0).astype(float)  # binary column: x and x^2 coincide
    net = NetworkData(form_network(pop, cfg).adjacency, X)
    est = fit_rho(0, net, build_basis(X))
    assert est.rank_deficient


def l2_error(n, seed):
    cfg = baseline_config(n=n, seed=seed)
    pop = draw_population(cfg)
    net = form_network(pop, cfg)
    R_hat = rho_hat_matrix(fit_all(net), net.covariates)
    R = rho_matrix(pop, cfg)
    off = ~np.eye(n, dtype=bool)
    return float(np.sqrt(np.mean((R_hat - R)[off] ** 2)))


def test_error_shrinks_with_n():
    errs = [np.mean([l2_error(n, s) for s in range(3)]) for n in (100, 400, 1600)]
    assert errs[0] > errs[1] > errs[2]
