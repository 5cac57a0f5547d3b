"""
Tests for classification predicates and the normal-form searches.
"""

from __future__ import annotations

import random
import time

import pytest
import sympy
from sympy import Matrix, Rational

from projflow.algebra.expr import symbols
from projflow.analyzers.classify import (
    Level1ZeroSecond,
    QuadPair,
    classify_field,
    classify_flow,
    i0_symmetric,
    i0_symmetric_vf,
    i_symmetric,
    i_symmetric_vf,
    is_solenoidal,
    level1_zero_second,
    level_of,
    linear_witness,
    orthogonal_orbits,
    shared_orbits,
    solenoidal_conjugator,
    solenoidal_search,
    symmetric_level0,
    transport_symmetry,
)
from projflow.errors import DomainError
from projflow.flows.catalog import catalog
from projflow.flows.conjugation import BirMap1H, LinMap, conjugate_vf_linear
from projflow.flows.core import FlowMap, VectorField, vector_field, verify_translation
from projflow.models import Verdict, VerdictResult, VerificationMode

x, y = symbols("xy")


def _form(rng: random.Random, degree: int) -> object:
    return sum(rng.randint(-2, 2) * x ** (degree - k) * y**k for k in range(degree + 1))


def _quadratic_field(rng: random.Random) -> VectorField:
    while True:
        field_ = VectorField.of((_form(rng, 2), _form(rng, 2)), (x, y))
        if not field_.is_zero:
            return field_


def _unimodular(rng: random.Random, det: int) -> LinMap:
    matrix = Matrix.eye(2)
    for _ in range(3):
        k = rng.randint(-3, 3)
        matrix = matrix * Matrix([[1, k], [0, 1]]) * Matrix([[1, 0], [rng.randint(-3, 3), 1]])
    if det == -1:
        matrix = matrix * Matrix([[0, 1], [1, 0]])
    return LinMap.of(matrix.tolist())


class TestLevelAndDivergence:
    """Tests for level_of and is_solenoidal."""

    @pytest.mark.parametrize("N", [1, 2, 3, 5])
    def test_phi_N_level(self, N):
        assert level_of(vector_field(catalog("phi_N", N=N))) == N

    def test_level0(self):
        assert level_of(VectorField.of((x * (x - y), y * (x - y)))) == 0

    def test_examples_are_solenoidal(self):
        assert is_solenoidal(vector_field(catalog("phi_sph_inf")))
        assert is_solenoidal(VectorField.of((2 * x * y, -(y**2))))

    def test_phi_2_is_not_solenoidal(self):
        assert not is_solenoidal(vector_field(catalog("phi_N", N=2)))

    def test_solenoidal_invariant_under_unimodular_maps(self):
        rng = random.Random(7)
        for k in range(10):
            if k % 2 == 0:
                H = sympy.sympify(0)
                while H == 0:
                    H = sympy.sympify(_form(rng, 3))
                field_ = VectorField.of((sympy.diff(H, y), -sympy.diff(H, x)), (x, y))
                assert is_solenoidal(field_)
            else:
                field_ = _quadratic_field(rng)
            L = _unimodular(rng, 1 if k < 5 else -1)
            assert L.determinant == (1 if k < 5 else -1)
            moved = conjugate_vf_linear(field_, L)
            assert is_solenoidal(moved) == is_solenoidal(field_), (field_.exprs, L.matrix)


class TestSymmetry:
    """Tests for i0- and i-symmetry of flows and fields."""

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_psi_N_is_i_symmetric(self, N):
        flow = catalog("psi_N", N=N)
        assert i_symmetric(flow).passed
        assert i_symmetric_vf(vector_field(flow))

    @pytest.mark.parametrize("name", ["phi_1", "psi_1", "psi_prime_1", "phi_prime_1"])
    def test_level1_flows_are_i_symmetric(self, name):
        flow = catalog(name)
        assert i_symmetric(flow).passed
        assert i_symmetric_vf(vector_field(flow))

    @pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
    def test_phi_N_is_not_i_symmetric(self, N):
        flow = catalog("phi_N", N=N)
        report = i_symmetric(flow)
        assert not report.passed
        assert report.mode is VerificationMode.EXACT
        assert not i_symmetric_vf(vector_field(flow))

    @pytest.mark.parametrize("N", [1, 2])
    def test_sym0_N_is_i0_symmetric(self, N):
        flow = catalog("sym0_N", N=N)
        assert i0_symmetric(flow).passed
        assert i0_symmetric_vf(vector_field(flow))

    def test_sph_inf_is_i0_symmetric(self):
        assert i0_symmetric(catalog("phi_sph_inf")).passed

    def test_phi_N_is_not_i0_symmetric(self):
        assert not i0_symmetric(catalog("phi_N", N=3)).passed
        assert not i0_symmetric_vf(vector_field(catalog("phi_N", N=3)))

    def test_radical_flow_checked_numerically(self):
        flow = FlowMap.of(
            (
                ((x + y) ** Rational(1, 2) * x) / (x + y + 1),
                ((x + y) ** Rational(1, 2) * y) / (x + y + 1),
            )
        )
        report = i0_symmetric(flow, samples=16)
        assert report.mode is VerificationMode.NUMERIC
        assert report.passed

    def test_transport_symmetry(self):
        """l0 carries i0-symmetric flows to i-symmetric ones."""
        transported = transport_symmetry(catalog("sym0_N", N=2))
        assert i_symmetric(transported).passed
        assert transported.equals(catalog("psi_N", N=2))
        assert verify_translation(transported).passed

    def test_transport_with_symmetric_map(self):
        """The degree 13 over 14 transport of phi_sph_inf composes in seconds."""
        s = BirMap1H.from_pq(x * y, x**2 + y**2)
        start = time.perf_counter()
        transported = transport_symmetry(catalog("phi_sph_inf"), s)
        report = i_symmetric(transported)
        assert time.perf_counter() - start < 60
        assert report.mode is VerificationMode.EXACT
        assert report.passed
        assert verify_translation(transported, mode="numeric", samples=16).passed

    def test_transport_needs_i0_symmetry(self):
        with pytest.raises(DomainError, match="not i0-symmetric"):
            transport_symmetry(catalog("phi_N", N=2))

    def test_symmetric_level0(self):
        t = symbols("t")[0]
        flow = symmetric_level0(t + 1 / t)
        assert i_symmetric(flow).passed
        assert verify_translation(flow).passed

    def test_symmetric_level0_needs_invariant_r(self):
        t = symbols("t")[0]
        with pytest.raises(DomainError, match="not invariant"):
            symmetric_level0(t + 2)


class TestOrbits:
    """Tests for shared and orthogonal orbits."""

    def test_phi_cN_shares_orbits_with_phi_N(self):
        base = vector_field(catalog("phi_N", N=3))
        other = vector_field(catalog("phi_cN", c=5, N=3))
        assert shared_orbits(base, other)

    def test_different_levels_do_not_share(self):
        base = vector_field(catalog("phi_N", N=3))
        assert not shared_orbits(base, vector_field(catalog("phi_N", N=2)))

    def test_zero_field(self):
        with pytest.raises(DomainError):
            shared_orbits(VectorField.zero((x, y)), VectorField.of((x**2, 0)))

    def test_shared_orbits_match_proportionality(self):
        """Orbits are shared exactly when the fields differ by a scalar factor."""

        def proportional(first: VectorField, second: VectorField) -> bool:
            (a, b), (c, d) = first.exprs, second.exprs
            if a == 0:
                return bool(c == 0)
            return bool(sympy.cancel(c / a * b - d) == 0)

        rng = random.Random(11)
        for k in range(20):
            base = _quadratic_field(rng)
            if k % 2 == 0:
                p, q, r, s = (rng.randint(-3, 3) for _ in range(4))
                if (p, q) == (0, 0) or (r, s) == (0, 0):
                    p, r = 1, 1
                other = base.scaled((p * x + q * y) / (r * x + s * y))
                assert shared_orbits(base, other)
            else:
                other = _quadratic_field(rng)
            expected = proportional(base, other)
            assert shared_orbits(base, other) == expected, (base.exprs, other.exprs)

    def test_axis_fields_are_orthogonal(self):
        assert orthogonal_orbits(VectorField.of((x**2, 0)), VectorField.of((0, y**2)))

    def test_circles_are_orthogonal(self):
        first = vector_field(catalog("phi_sph_1"))
        second = vector_field(catalog("phi_sph_1_orth"))
        assert orthogonal_orbits(first, second)
        assert not shared_orbits(first, second)


class TestSolenoidalSearch:
    """Tests for the solenoidal normal-form search."""

    def test_levels(self):
        hits = solenoidal_search(10)
        assert {hit.N for hit in hits} == {1, 3}

    def test_every_hit_is_solenoidal_and_witnessed(self):
        for hit in solenoidal_search(4):
            assert is_solenoidal(hit.field)
            assert hit.witness is not None, hit.pair
            target = "phi_sph_inf" if hit.N == 1 else "phi_N"
            assert hit.target == target
            expected = vector_field(
                catalog("phi_sph_inf") if hit.N == 1 else catalog("phi_N", N=3)
            )
            assert conjugate_vf_linear(hit.field, hit.witness) == expected

    def test_conjugator_for_level_2_is_not_rational(self):
        assert solenoidal_conjugator(QuadPair(Rational(0), Rational(1), Rational(0))) is None

    def test_level_3_needs_no_conjugation(self):
        A = solenoidal_conjugator(QuadPair(Rational(0), Rational(2), Rational(0)))
        assert A == 1

    def test_quad_pair_level(self):
        assert QuadPair(Rational(0), Rational(2), Rational(0)).level == 3
        assert QuadPair(Rational(1), Rational(0), Rational(1)).level is None

    def test_witness_rejects_other_classes(self):
        field_ = VectorField.of((x**2, x * y))
        assert linear_witness(field_, vector_field(catalog("phi_sph_inf"))) is None

    def test_bound(self):
        with pytest.raises(DomainError):
            solenoidal_search(0)


class TestLevel1ZeroSecond:
    """Tests for fields (a x + b y)^2 • 0."""

    def test_mixed_square(self):
        result = level1_zero_second(VectorField.of(((x + 2 * y) ** 2, 0)))
        assert isinstance(result, Level1ZeroSecond)
        assert (result.a, result.b, result.sign) == (1, 2, 1)
        assert verify_translation(result.flow).passed
        assert vector_field(result.flow)[0] == (x + 2 * y) ** 2

    def test_pure_y_square(self):
        result = level1_zero_second(VectorField.of((y**2, 0)))
        assert (result.a, result.b) == (0, 1)
        assert result.flow.equals(catalog("psi_0"))

    def test_negative_multiple(self):
        result = level1_zero_second(VectorField.of((-(x + 2 * y) ** 2, 0)))
        assert result.sign == -1
        assert vector_field(result.flow)[0] == -((x + 2 * y) ** 2)

    def test_matches_phi_a(self):
        result = level1_zero_second(VectorField.of(((x + 3 * y) ** 2, 0)))
        assert result.flow.equals(catalog("phi_a", a=3))

    def test_not_a_square(self):
        result = level1_zero_second(VectorField.of((x * y, 0)))
        assert isinstance(result, VerdictResult)
        assert result.verdict is Verdict.NOT_PERFECT_SQUARE

    def test_second_component_must_vanish(self):
        with pytest.raises(DomainError):
            level1_zero_second(VectorField.of((x**2, y**2)))


class TestReports:
    """Tests for classify_field and classify_flow."""

    def test_field_report(self):
        report = classify_field(VectorField.of((2 * x * y, -(y**2))))
        assert report.level == 3
        assert report.solenoidal
        assert not report.i0_symmetric

    def test_flow_report(self):
        report = classify_flow(catalog("psi_N", N=2))
        assert report.level == 2
        assert report.i_symmetric
        assert report.to_dict()["mode"] == "exact"
