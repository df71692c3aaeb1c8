import numpy as np
import pytest

from ntunet.dgp import baseline_config, draw_population, form_network, idset_config


@pytest.fixture(scope="session")
def baseline_net():
    cfg = baseline_config(n=60, d=3, corr=0.2, seed=11)
    pop = draw_population(cfg)
    return cfg, pop, form_network(pop, cfg)


@pytest.fixture(scope="session")
def idset_world():
    cfg = idset_config("AllContinuous", n=80, seed=5)
    return cfg, draw_population(cfg)


def random_directions(rng, m, d):
    b = rng.normal(size=(m, d))
    return b / np.linalg.norm(b, axis=1)[:, None]
