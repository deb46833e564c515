"""Truncated Jacobian quotients: generators, dimensions, certificates,
reduction access.  The whole engine is checked against a brute-force
row-elimination oracle at small degrees, and the standard dimensions are
pinned by the golden file."""

import json
import pathlib
from fractions import Fraction

import pytest

import oracles
from qpsurf.jacobian import (
    TruncatedQuotient,
    g_path_independence_check,
    jacobian_generators,
    quotient_dimension,
)
from qpsurf.path_algebra import Path, Potential, Quiver, TruncatedElement
from qpsurf.qp_mutation import QP
from qpsurf.surface import potential_S, potential_Sxn

GOLDEN = json.loads(
    (pathlib.Path(__file__).parent / "golden" / "jacobian_dims.json").read_text()
)


def torus_qp(tq, n, degree):
    return QP(tq.quiver, potential_Sxn(tq, 1, n, degree))


class TestGenerators:
    def test_torus_shape(self, torus_tq):
        x = Fraction(3, 2)
        qp = QP(torus_tq.quiver, potential_Sxn(torus_tq, x, 1, 12))
        gens = jacobian_generators(qp)
        assert len(gens) == 6
        q = torus_tq.quiver
        for a, gen in zip(q.arrows, gens):
            corner = Path((torus_tq.f_of(a.name, 2), torus_tq.f_of(a.name)))
            tail = torus_tq.g_path(5, torus_tq.g[a.name])
            assert gen == TruncatedElement.from_path(q, 11, corner) + (
                TruncatedElement.from_path(q, 11, tail, x)
            )

    def test_family_hub_generator(self, fig_tq):
        xq = Fraction(7)
        qp = QP(fig_tq.quiver, potential_S(fig_tq, (1, xq), 22))
        gens = jacobian_generators(qp)
        by_name = dict(zip((a.name for a in fig_tq.quiver.arrows), gens))
        gen = by_name["a1"]
        lengths = sorted(len(p.arrows) for p in gen.terms)
        assert lengths == [2, 3]  # triangle corner + short hub g-path
        assert gen.coefficient(Path(("a2", "a3", "a4"))) == xq

    def test_matches_cyclic_derivatives_orderwise(self, torus_tq):
        qp = torus_qp(torus_tq, 1, 12)
        gens = jacobian_generators(qp)
        from qpsurf.path_algebra import cyclic_derivative

        for a, gen in zip(torus_tq.quiver.arrows, gens):
            assert gen == cyclic_derivative(qp.potential, a.name)


class TestGoldenDimensions:
    @pytest.mark.parametrize("key", ["n=1", "n=2", "n=3"])
    def test_standard_weighted_cycles(self, torus_tq, key):
        entry = GOLDEN[key]
        n = int(key.split("=")[1])
        qp = torus_qp(torus_tq, n, entry["degree"])
        quo, certified = quotient_dimension(qp, entry["degree"])
        assert certified
        assert quo.dimension == entry["dimension"]
        assert quo.certificate_length == entry["certificate_length"]
        assert list(quo.per_degree) == entry["per_degree"]

    def test_lower_bound_and_strict_growth(self, torus_tq):
        dims = {}
        for n in (1, 2):
            entry = GOLDEN["n=%d" % n]
            dims[n] = entry["dimension"]
            assert dims[n] >= 6 * n - 2
        assert dims[2] > dims[1]


class TestAgainstBruteForce:
    def test_torus_small_degree(self, torus_tq):
        qp = torus_qp(torus_tq, 1, 12)
        quo, certified = quotient_dimension(qp, 8)
        want = oracles.brute_quotient_dims(
            torus_tq.quiver, qp.potential, 8, jacobian_generators(qp)
        )
        assert certified
        assert list(quo.per_degree) == want

    def test_family_small_degree(self, fig_tq):
        qp = QP(fig_tq.quiver, potential_S(fig_tq, (1, 1), 22))
        quo, certified = quotient_dimension(qp, 9)
        want = oracles.brute_quotient_dims(
            fig_tq.quiver, qp.potential, 9, jacobian_generators(qp)
        )
        assert certified
        assert list(quo.per_degree) == want

    def test_fractional_coefficients(self, torus_tq):
        qp = QP(torus_tq.quiver, potential_Sxn(torus_tq, Fraction(-1, 3), 1, 12))
        quo, _ = quotient_dimension(qp, 8)
        want = oracles.brute_quotient_dims(
            torus_tq.quiver, qp.potential, 8, jacobian_generators(qp)
        )
        assert list(quo.per_degree) == want


class TestCertificate:
    def test_monotone_under_degree_increase(self, torus_tq):
        qp = torus_qp(torus_tq, 1, 14)
        a, _ = quotient_dimension(qp, 12)
        b, _ = quotient_dimension(qp, 13)
        c, _ = quotient_dimension(qp, 14)
        assert a.certified and b.certified and c.certified
        assert a.dimension == b.dimension == c.dimension
        assert a.certificate_length == b.certificate_length == c.certificate_length
        assert list(a.per_degree) == list(b.per_degree)[:13]
        assert list(b.per_degree) == list(c.per_degree)[:14]

    def test_zero_potential_on_an_acyclic_quiver(self):
        q = Quiver(["u", "v"], [("x", "u", "v")])
        qp = QP(q, Potential.zero(q, 6))
        quo, certified = quotient_dimension(qp, 4)
        assert certified
        assert quo.dimension == 3  # two lazy paths and the arrow itself
        assert quo.certificate_length == 2
        assert list(quo.per_degree) == [2, 1, 0, 0, 0]

    def test_zero_potential_on_a_cyclic_quiver_never_certifies(self, torus_tq):
        q = torus_tq.quiver
        qp = QP(q, Potential.zero(q, 8))
        quo, certified = quotient_dimension(qp, 6)
        assert not certified
        assert quo.certificate_length is None
        # nothing is killed: every path survives the window
        assert list(quo.per_degree) == [3] + [3 * 2 ** l for l in range(1, 7)]

    def test_degree_guards(self, torus_tq):
        qp = torus_qp(torus_tq, 1, 12)
        with pytest.raises(ValueError, match="truncated at"):
            quotient_dimension(qp, 13)
        with pytest.raises(ValueError, match="below max generator"):
            quotient_dimension(qp, 6)


@pytest.fixture(scope="module")
def quo(torus_tq):
    qp = torus_qp(torus_tq, 1, 12)
    quotient, certified = quotient_dimension(qp, 12)
    assert certified
    return quotient


class TestReduction:
    def test_basis_matches_per_degree(self, quo):
        hist = {}
        for p in quo.basis:
            hist[len(p.arrows)] = hist.get(len(p.arrows), 0) + 1
        want = {l: c for l, c in enumerate(quo.per_degree) if c}
        assert hist == want

    def test_basis_paths_reduce_to_themselves(self, quo):
        for p in quo.basis:
            assert quo.is_basis_path(p)
            assert quo.reduce_path(p) == {p: Fraction(1)}

    def test_long_paths_collapse_onto_the_basis(self, quo, torus_tq):
        q = torus_tq.quiver
        basis = set(quo.basis)
        tri = torus_tq.triangle_cycle(0)
        for seed in (tri.arrows * 2, tri.arrows * 3):
            residue = quo.reduce_path(Path(seed))
            for p, c in residue.items():
                assert p in basis
                assert len(p.arrows) < quo.certificate_length

    def test_relation_rewrites_corner_into_g_path(self, torus_tq):
        # β·f²(α)·f(α) is congruent to −x·n·β·(the long g-path of ∂_α)
        for n, d in ((1, 12), (2, 18)):
            x = Fraction(1)
            qp = QP(torus_tq.quiver, potential_Sxn(torus_tq, x, n, d))
            quo, certified = quotient_dimension(qp, d)
            assert certified
            q = torus_tq.quiver
            pairs = 0
            for a in q.arrows:
                head2 = torus_tq.f_of(a.name, 2)
                for beta in q.arrows_out[q.head(head2)]:
                    left = Path(
                        (beta.name, head2, torus_tq.f_of(a.name))
                    )
                    q.check_path(left)
                    right = Path(
                        (beta.name,) + torus_tq.g_path(6 * n - 1, torus_tq.g[a.name]).arrows
                    )
                    got = quo.reduce_path(left)
                    want = {p: -x * n * c for p, c in quo.reduce_path(right).items()}
                    assert got == want
                    pairs += 1
            assert pairs == 12


class TestGPathIndependence:
    @pytest.mark.parametrize("n,degree", [(1, 12), (2, 18)])
    def test_torus_standard_cases(self, torus_tq, n, degree):
        assert g_path_independence_check(torus_tq, 1, n, degree)

    def test_two_punctures_rejected(self, fig_tq):
        with pytest.raises(ValueError):
            g_path_independence_check(fig_tq, 1, 1, 12)
