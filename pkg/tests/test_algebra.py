import math
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from morselink.algebra import (
    CoefficientRing,
    Generator,
    beta_alg_depth,
    beta_alg_sup,
    dual_complex,
    dump_complex,
    lambda_pairing,
    level,
    load_complex,
    make_complex,
    morse_inequality_decomposition,
    pi_pairing,
)
from morselink.core.errors import ErrorCode, MorseLinkError

from .strategies import filtered_complexes

Q = CoefficientRing.rationals()
Z5 = CoefficientRing.mod(5)


class TestRing:
    def test_parse(self):
        assert CoefficientRing.parse("Z").label == "Z"
        assert CoefficientRing.parse("Q").is_field
        assert CoefficientRing.parse("Zp:7").p == 7
        assert CoefficientRing.parse("Z2").p == 2

    def test_non_prime_rejected(self):
        with pytest.raises(MorseLinkError) as exc:
            CoefficientRing.parse("Zp:6")
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_mod_p_inverse(self):
        assert Z5.normalize(Fraction(1, 2)) == 3
        assert Z5.normalize(-1) == 4


class TestMakeComplex:
    def test_circle_a_valid(self, circle_a_complex):
        assert circle_a_complex.count(1) == 2
        assert circle_a_complex.entry("M1", "m1") == 1
        assert circle_a_complex.entry("M1", "m2") == -1

    def test_zero_boundary_valid(self):
        gens = [Generator("a", 0, 0.0), Generator("b", 1, 1.0)]
        cx = make_complex(1, CoefficientRing.integers(), gens, {})
        assert cx.d(cx.chain(1, {"b": 1})).is_zero()

    def test_filtration_violation(self):
        gens = [Generator("M1", 1, 0.0), Generator("m1", 0, 0.0)]
        with pytest.raises(MorseLinkError) as exc:
            make_complex(1, CoefficientRing.integers(), gens, {1: [[1]]})
        assert exc.value.code is ErrorCode.FILTRATION_VIOLATION

    def test_d_squared_nonzero(self):
        gens = [Generator("a", 2, 3.0), Generator("b", 1, 2.0), Generator("c", 0, 1.0)]
        with pytest.raises(MorseLinkError) as exc:
            make_complex(2, CoefficientRing.integers(), gens, {2: [[1]], 1: [[1]]})
        assert exc.value.code is ErrorCode.D_SQUARED_NONZERO

    def test_shape_mismatch(self):
        gens = [Generator("a", 1, 3.0), Generator("b", 0, 2.0)]
        with pytest.raises(MorseLinkError) as exc:
            make_complex(1, CoefficientRing.integers(), gens, {1: [[1, 0]]})
        assert exc.value.code is ErrorCode.DEGREE_MISMATCH


class TestLevel:
    def test_zero_chain(self, circle_a_complex):
        assert level(circle_a_complex, circle_a_complex.chain(0)) == -math.inf

    def test_difference_of_minima(self, circle_a_complex):
        assert level(circle_a_complex, circle_a_complex.chain(0, {"m1": 1, "m2": -1})) == 1.0

    def test_multiple(self, circle_a_complex):
        assert level(circle_a_complex, circle_a_complex.chain(1, {"M1": 5})) == 4.0


class TestMorseInequalities:
    def test_circle_a(self, circle_a_complex):
        result = morse_inequality_decomposition(circle_a_complex, Q)
        assert result.poincare == [1, 1]
        assert result.q == [1, 0]

    def test_zero_boundary(self):
        gens = [Generator("a", 0, 0.0), Generator("b", 1, 1.0), Generator("c", 1, 2.0)]
        cx = make_complex(1, CoefficientRing.integers(), gens, {})
        result = morse_inequality_decomposition(cx, Q)
        assert result.q == [0, 0]
        assert result.poincare == result.morse

    def test_integers_rejected(self, circle_a_complex):
        with pytest.raises(MorseLinkError) as exc:
            morse_inequality_decomposition(circle_a_complex, CoefficientRing.integers())
        assert exc.value.code is ErrorCode.NOT_A_FIELD


class TestDualAndPairings:
    def test_circle_a_dual_boundary(self, circle_a_complex):
        dual = dual_complex(circle_a_complex)
        image = dual.d(dual.chain(1, {"m1": 1}))
        assert image.coefficients == {"M1": -1, "M2": 1}
        assert dual.generator("M1").level == -4.0

    def test_dual_is_involution(self, circle_a_complex):
        twice = dual_complex(dual_complex(circle_a_complex))
        assert twice.orientation == 1
        assert twice.matrix(1) == circle_a_complex.matrix(1)

    def test_dual_sign_in_dimension_two(self):
        gens = [Generator("P", 1, 1.0), Generator("q", 0, 0.0)]
        cx = make_complex(2, CoefficientRing.integers(), gens, {1: [[1]]})
        dual = dual_complex(cx)
        # |q| = 0，n = 2：m_{-f}(q, P) = m_f(P, q)
        assert dual.entry("q", "P") == 1

    def test_pi_pairing(self, circle_a_complex):
        ring = circle_a_complex.ring
        dual = dual_complex(circle_a_complex)
        x = dual.chain(0, {"M1": 1, "M2": -1})
        y = circle_a_complex.chain(1, {"M1": 1})
        assert pi_pairing(x, y, 1) == 1
        assert pi_pairing(dual.chain(0, {"M1": 2}), circle_a_complex.chain(1, {"M1": 3}), 1) == 6
        assert pi_pairing(dual.chain(0, {"M2": 2}), y, 1) == 0
        assert ring.is_zero(pi_pairing(dual.chain(0), y, 1))

    def test_pi_degree_mismatch(self, circle_a_complex):
        dual = dual_complex(circle_a_complex)
        with pytest.raises(MorseLinkError) as exc:
            pi_pairing(dual.chain(1, {"m1": 1}), circle_a_complex.chain(1, {"M1": 1}), 1)
        assert exc.value.code is ErrorCode.DEGREE_MISMATCH

    def test_lambda_circle_a(self, circle_a_complex):
        dual = dual_complex(circle_a_complex)
        x = dual.chain(0, {"M1": 1, "M2": -1})
        y = circle_a_complex.chain(0, {"m1": 1, "m2": -1})
        assert lambda_pairing(circle_a_complex, x, y, cross_check=True) == 1

    def test_lambda_zero(self, circle_a_complex):
        dual = dual_complex(circle_a_complex)
        y = circle_a_complex.chain(0, {"m1": 1, "m2": -1})
        assert lambda_pairing(circle_a_complex, dual.chain(0), y) == 0

    def test_lambda_not_a_boundary(self, circle_a_complex):
        dual = dual_complex(circle_a_complex)
        x = dual.chain(0, {"M1": 1, "M2": -1})
        with pytest.raises(MorseLinkError) as exc:
            lambda_pairing(circle_a_complex, x, circle_a_complex.chain(0, {"m1": 1}))
        assert exc.value.code is ErrorCode.NOT_A_BOUNDARY

    def test_unsolvable_over_integers(self):
        gens = [Generator("P", 1, 2.0), Generator("q", 0, 0.0)]
        cx = make_complex(1, CoefficientRing.integers(), gens, {1: [[2]]})
        dual = dual_complex(cx)
        with pytest.raises(MorseLinkError) as exc:
            lambda_pairing(cx, dual.chain(0, {"P": 2}), cx.chain(0, {"q": 1}))
        assert exc.value.code is ErrorCode.UNSOLVABLE_OVER_RING


class TestBeta:
    def test_circle_a_sup(self, circle_a_complex):
        result = beta_alg_sup(circle_a_complex, 0)
        assert result.beta == 2.0
        assert result.witness.x_level == 3.0
        assert result.witness.y_level == 1.0

    def test_circle_a_depth(self, circle_a_complex):
        assert beta_alg_depth(circle_a_complex, 0, Q) == 2.0

    def test_zero_differential(self):
        gens = [Generator("a", 0, 0.0), Generator("b", 1, 1.0)]
        cx = make_complex(1, CoefficientRing.integers(), gens, {})
        assert beta_alg_sup(cx, 0).beta == 0.0
        assert beta_alg_depth(cx, 0, Q) == 0.0

    def test_sphere_like(self):
        gens = [
            Generator("A", 2, 2.0),
            Generator("B", 2, 1.2),
            Generator("s", 1, 1.0),
            Generator("m", 0, 0.0),
        ]
        cx = make_complex(2, CoefficientRing.integers(), gens, {2: [[1, -1]], 1: [[0]]})
        assert beta_alg_sup(cx, 1).beta == pytest.approx(0.2)
        assert beta_alg_depth(cx, 1, Q) == pytest.approx(0.2)
        decomposition = morse_inequality_decomposition(cx, Q)
        assert decomposition.poincare == [1, 0, 1]
        assert decomposition.q == [0, 1, 0]

    def test_depth_requires_field(self, circle_a_complex):
        with pytest.raises(MorseLinkError) as exc:
            beta_alg_depth(circle_a_complex, 0, CoefficientRing.integers())
        assert exc.value.code is ErrorCode.NOT_A_FIELD


class TestSerialization:
    def test_round_trip(self, circle_a_complex):
        restored = load_complex(dump_complex(circle_a_complex))
        assert restored.matrix(1) == circle_a_complex.matrix(1)
        assert [g.to_dict() for g in restored.generators] == [g.to_dict() for g in circle_a_complex.generators]

    def test_rational_round_trip(self):
        gens = [Generator("P", 1, 2.0), Generator("q", 0, 0.5)]
        cx = make_complex(1, Q, gens, {1: [[Fraction(3, 7)]]})
        assert load_complex(dump_complex(cx)).entry("P", "q") == Fraction(3, 7)


PROPERTY_SETTINGS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


class TestProperties:
    @PROPERTY_SETTINGS
    @given(cx=filtered_complexes(), data=st.data())
    def test_sup_equals_depth_over_q(self, cx, data):
        k = data.draw(st.integers(min_value=0, max_value=cx.dimension - 1))
        assert beta_alg_sup(cx, k, Q).beta == beta_alg_depth(cx, k, Q)

    @PROPERTY_SETTINGS
    @given(cx=filtered_complexes(), data=st.data())
    def test_sup_equals_depth_over_z5(self, cx, data):
        k = data.draw(st.integers(min_value=0, max_value=cx.dimension - 1))
        assert beta_alg_sup(cx, k, Z5).beta == beta_alg_depth(cx, k, Z5)

    @PROPERTY_SETTINGS
    @given(cx=filtered_complexes(), data=st.data())
    def test_positive_iff_rank(self, cx, data):
        k = data.draw(st.integers(min_value=0, max_value=cx.dimension - 1))
        assert (beta_alg_sup(cx, k, Q).beta > 0) == (cx.rank(k + 1, Q) > 0)

    @PROPERTY_SETTINGS
    @given(cx=filtered_complexes())
    def test_morse_identity(self, cx):
        result = morse_inequality_decomposition(cx, Q)
        n = cx.dimension
        for k in range(n + 1):
            previous = result.q[k - 1] if k >= 1 else 0
            assert result.q[k] >= 0
            assert result.morse[k] - result.poincare[k] == result.q[k] + previous

    @PROPERTY_SETTINGS
    @given(cx=filtered_complexes())
    def test_adjoint_identity(self, cx):
        dual = dual_complex(cx)
        n = cx.dimension
        for k in range(1, n + 1):
            sign = -1 if (n - k + 1) % 2 else 1
            for q in cx.ids(k - 1):
                x = dual.chain(n - k + 1, {q: 1})
                for p in cx.ids(k):
                    y = cx.chain(k, {p: 1})
                    assert pi_pairing(dual.d(x), y, n) == sign * pi_pairing(x, cx.d(y), n)

    @PROPERTY_SETTINGS
    @given(cx=filtered_complexes(), data=st.data())
    def test_lambda_cross_check(self, cx, data):
        n = cx.dimension
        k = data.draw(st.integers(min_value=0, max_value=n - 1))
        dual = dual_complex(cx)
        sources = cx.ids(k + 1)
        dual_sources = cx.ids(k)
        if not sources or not dual_sources:
            return
        p = data.draw(st.sampled_from(sources))
        q = data.draw(st.sampled_from(dual_sources))
        y = cx.d(cx.chain(k + 1, {p: 1}))
        x = dual.d(dual.chain(n - k, {q: 1}))
        lambda_pairing(cx, x, y, cross_check=True)


@pytest.mark.slow
class TestLargeSamples:
    @settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(cx=filtered_complexes(), data=st.data())
    def test_sup_equals_depth_on_1000_complexes(self, cx, data):
        k = data.draw(st.integers(min_value=0, max_value=cx.dimension - 1))
        ring = data.draw(st.sampled_from([Q, Z5]))
        assert beta_alg_sup(cx, k, ring).beta == beta_alg_depth(cx, k, ring)
