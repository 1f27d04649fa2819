import pytest

from gibbsdim import BasicSetModel, MapFamily, thermo

C = 0.1
P0 = 0.1127016653792583          # (1 - sqrt(1 - 4c))/2 at c = 0.1
LOG_2P0 = -1.489863900384858     # log|2 p0|, exact stable exponent


@pytest.fixture(scope="session")
def product_map():
    return MapFamily.product(C)


@pytest.fixture(scope="session")
def perturbed_map():
    return MapFamily.perturbed(C, b=1.0, eps=1e-3)


@pytest.fixture(scope="session")
def product_set(product_map):
    return BasicSetModel(product_map)


@pytest.fixture(scope="session")
def perturbed_set(perturbed_map):
    return BasicSetModel(perturbed_map)


@pytest.fixture(scope="session")
def haar_model(product_map, product_set):
    # zero potential on the expanding branch: Haar measure on the circle
    return thermo.build_gibbs_model(product_map, thermo.ZeroPotential(),
                                    2, basic_set=product_set)


@pytest.fixture(scope="session")
def graph_model(perturbed_map, perturbed_set):
    return thermo.build_gibbs_model(perturbed_map, thermo.ZeroPotential(),
                                    1, basic_set=perturbed_set)
