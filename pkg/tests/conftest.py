import pytest

from morselink.algebra import CoefficientRing, Generator, make_complex


@pytest.fixture
def circle_a_complex():
    """CIRCLE-A：dM1 = m1 - m2，dM2 = m2 - m1"""
    gens = [
        Generator("M1", 1, 4.0),
        Generator("M2", 1, 3.0),
        Generator("m1", 0, 0.0),
        Generator("m2", 0, 1.0),
    ]
    return make_complex(1, CoefficientRing.integers(), gens, {1: [[1, -1], [-1, 1]]})


@pytest.fixture(scope="session")
def circle_md():
    from morselink.flow import build_morse_data
    from morselink.geometry import builtin_model

    return build_morse_data(builtin_model("CIRCLE-A"))


@pytest.fixture(scope="session")
def torus_md():
    from morselink.flow import build_morse_data
    from morselink.geometry import builtin_model

    return build_morse_data(builtin_model("TORUS-C"))


@pytest.fixture(scope="session")
def sphere_b_md():
    from morselink.flow import build_morse_data
    from morselink.geometry import builtin_model

    return build_morse_data(builtin_model("SPHERE-B"))
