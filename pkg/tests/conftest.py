import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rosqc.numberfield import NumberField, split_embeddings  # noqa: E402
from rosqc.geometry import hyperelliptic_fixture  # noqa: E402


@pytest.fixture(scope="session")
def rationals():
    return NumberField([0, 1])


@pytest.fixture(scope="session")
def zeta3_field():
    return NumberField([1, 1, 1])


@pytest.fixture(scope="session")
def embeddings13(zeta3_field):
    return split_embeddings(zeta3_field, 13, 30)


@pytest.fixture(scope="session")
def fixture_g1(rationals):
    # y^2 = x^3 + x + 1, good at 7, 11, 13
    return hyperelliptic_fixture(rationals, [1, 1, 0, 1], (0, 1), order=44)


@pytest.fixture(scope="session")
def fixture_g2(rationals):
    # y^2 = x^5 - x + 1, disc 2869 = 19 * 151
    return hyperelliptic_fixture(rationals, [1, -1, 0, 0, 0, 1], (0, 1),
                                 order=56)


@pytest.fixture(scope="session")
def engine_g2_p7(fixture_g2, rationals):
    from rosqc.frobstructure import FrameEngine
    emb = split_embeddings(rationals, 7, 30)[0]
    return FrameEngine(fixture_g2, emb, n1=6, order=14)


@pytest.fixture(scope="session")
def hecke_z_g2_p7(engine_g2_p7, fixture_g2):
    from rosqc.geometry import frobenius_action, hecke_to_correspondences
    H = frobenius_action(engine_g2_p7.frobdata.frob, 7)
    cup = engine_g2_p7.embed_matrix(fixture_g2.cup)
    return hecke_to_correspondences(H, cup, 2)[0].matrix
