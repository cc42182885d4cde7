import numpy as np
import pytest

from anosov_lab import constructions as cons
from anosov_lab import representation as rmod


@pytest.fixture(scope="session")
def schottky3():
    rep = cons.schottky_fuchsian(3.0, np.pi / 4)
    rmod.certify_anosov(rep, 1, 8)
    return rep


@pytest.fixture(scope="session")
def veronese3():
    rep = cons.compose_irreducible(3, cons.schottky_fuchsian(3.0, np.pi / 4))
    for p in (1, 2):
        rmod.certify_anosov(rep, p, 8)
    return rep


@pytest.fixture(scope="session")
def veronese4():
    rep = cons.compose_irreducible(4, cons.schottky_fuchsian(3.0, np.pi / 4))
    for p in (1, 2):
        rmod.certify_anosov(rep, p, 8)
    return rep


@pytest.fixture(scope="session")
def veronese5():
    rep = cons.compose_irreducible(5, cons.schottky_fuchsian(3.0, np.pi / 4))
    for p in (1, 2, 3):
        rmod.certify_anosov(rep, p, 8)
    return rep


@pytest.fixture(scope="session")
def block_counterexample():
    """rho4 + rho2 block sum: projective Anosov by domination, but the level-2
    flag needs override constants since Schottky(2, .) is not Anosov."""
    rep = cons.direct_sum(
        cons.schottky_fuchsian(4.0, np.pi / 4, label="s4"),
        cons.schottky_fuchsian(2.0, np.pi / 4, label="s2"),
        label="block-4-2",
    )
    rmod.certify_anosov(rep, 1, 8)
    return rep


@pytest.fixture(scope="session")
def repeated_block():
    """rho + rho with the same rho: sigma_1 = sigma_2 identically."""
    rho = cons.schottky_fuchsian(3.0, np.pi / 4)
    return cons.direct_sum(rho, rho, label="repeated")
