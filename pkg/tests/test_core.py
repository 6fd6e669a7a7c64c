import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from graphlimits import io
from graphlimits.core import (
    DecorationSpace,
    MomentSeq,
    Multigraph,
    Partition,
    StepGraphon,
    StepKernel,
    TargetGraph,
    TestGraph,
    WeightFunction,
    basis_transform,
    change_basis,
    change_target_basis,
    common_refinement,
    encode_target_multigraph,
    encode_test_multigraph,
    threshold_space,
    truncate_multigraph,
)
from graphlimits.errors import ValidationError

DOUBLE = Multigraph.from_edges(2, [(0, 1, 2)])


@st.composite
def multigraphs(draw, max_n=5, max_mult=4):
    n = draw(st.integers(1, max_n))
    g = np.zeros((n, n), dtype=np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            g[u, v] = g[v, u] = draw(st.integers(0, max_mult))
    return Multigraph(g)


@st.composite
def kernels(draw, max_k=5):
    k = draw(st.integers(1, max_k))
    lam = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k)))
    a = np.array(draw(st.lists(st.floats(-3, 3), min_size=k * k, max_size=k * k))).reshape(k, k)
    return StepKernel(Partition(lam / lam.sum()), (a + a.T) / 2)


class TestPartition:
    def test_rejects_bad_measures(self):
        with pytest.raises(ValidationError):
            Partition([0.5, 0.6])
        with pytest.raises(ValidationError):
            Partition([1.0, 0.0])

    def test_breakpoints_and_locate(self):
        P = Partition([0.25, 0.25, 0.5])
        assert P.breakpoints.tolist() == [0.0, 0.25, 0.5, 1.0]
        assert P.locate([0.0, 0.3, 0.99]).tolist() == [0, 1, 2]

    def test_common_refinement(self):
        fine, (a, b) = common_refinement(Partition([0.5, 0.5]), Partition([0.25, 0.75]))
        assert np.allclose(fine.measures, [0.25, 0.25, 0.5])
        assert a.tolist() == [0, 0, 1]
        assert b.tolist() == [0, 1, 1]


class TestStepKernel:
    def test_symmetry_enforced(self):
        with pytest.raises(ValidationError):
            StepKernel.from_values([[0, 1], [0, 0]])
        StepKernel(Partition.uniform(2), [[0, 1], [0, 0]], symmetric=False)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            StepKernel(Partition.uniform(3), np.zeros((2, 2)))

    def test_arrays_are_read_only(self):
        K = StepKernel.constant(1.0)
        with pytest.raises(ValueError):
            K.values[0, 0] = 2.0

    def test_difference_on_common_refinement(self):
        a = StepKernel(Partition([0.5, 0.5]), [[1, 0], [0, 1]])
        b = StepKernel.constant(1.0)
        d = a - b
        assert d.k == 2 and np.allclose(d.values, [[0, -1], [-1, 0]])
        assert d.integral() == pytest.approx(-0.5)


class TestDecorations:
    def test_encode_double_edge(self):
        F = encode_test_multigraph(DOUBLE, 2)
        assert F.decorations.tolist() == [[0.0, 0.0, 1.0]]

    def test_encode_triangle(self):
        tri = Multigraph.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
        F = encode_test_multigraph(tri, 1)
        assert F.decorations.tolist() == [[0.0, 1.0]] * 3

    def test_encode_multiplicity_too_large(self):
        with pytest.raises(ValidationError):
            encode_test_multigraph(Multigraph.from_edges(2, [(0, 1, 3)]), 2)

    @pytest.mark.parametrize("mult,P,expected", [(2, 3, [1, 2, 4, 8]), (0, 2, [1, 0, 0]), (3, 2, [1, 3, 9])])
    def test_encode_target_moments(self, mult, P, expected):
        G = encode_target_multigraph(Multigraph.from_edges(2, [(0, 1, mult)]), P)
        assert G.values[0, 1].tolist() == expected
        # diagonal is the point mass at multiplicity 0
        assert G.values[0, 0].tolist() == [1.0] + [0.0] * P

    def test_monomial_to_indicator_dim2(self):
        F = TestGraph.from_edges(2, [(0, 1, [0.0, 1.0])], DecorationSpace(2, "monomial"))
        # m -> m on {0, 1} is the indicator of 1
        assert np.allclose(change_basis(F, "indicator").decorations, [[0.0, 1.0]])
        # dual coordinates: (mu0 + mu1, mu1) -> (mu0, mu1)
        v = np.zeros((2, 2, 2))
        v[0, 1] = v[1, 0] = [0.0, 1.0]
        G = change_target_basis(TargetGraph(v, DecorationSpace(2, "monomial")), "indicator")
        assert np.allclose(G.values[0, 1], [-1.0, 1.0])
        # test coordinates use the inverse of the 2x2 Vandermonde matrix on {0, 1}
        vinv = oracles.fraction_inverse([[1, 0], [1, 1]])
        T = basis_transform(DecorationSpace(2, "indicator"), DecorationSpace(2, "monomial"))
        assert np.allclose(T, np.array(vinv, dtype=float))

    def test_identity_transform(self):
        F = TestGraph.from_edges(2, [(0, 1, [1.0, 2.0, 3.0])], DecorationSpace(3, "indicator"))
        assert np.array_equal(change_basis(F, "indicator").decorations, F.decorations)

    def test_cumulative_inverse_is_bidiagonal(self):
        R = DecorationSpace(3, "cumulative").matrix()
        assert np.array_equal(R, np.tril(np.ones((3, 3))))
        inv = oracles.fraction_inverse(R.tolist())
        assert inv == [[1, 0, 0], [-1, 1, 0], [0, -1, 1]]
        assert np.allclose(np.linalg.inv(R), np.array(inv, dtype=float))

    def test_threshold_basis_values(self):
        R = threshold_space(3).matrix()
        assert R.tolist() == [[1, 1, 1], [0, 1, 1], [0, 0, 1]]

    def test_custom_basis_must_be_invertible(self):
        with pytest.raises(ValidationError):
            DecorationSpace(2, "custom", [[1, 1], [1, 1]])

    def test_target_diagonal_enforced(self):
        v = np.ones((2, 2, 2))
        with pytest.raises(ValidationError):
            TargetGraph(v, DecorationSpace(2, "indicator"))

    def test_witness_must_match(self):
        G = encode_target_multigraph(DOUBLE, 2)
        bad = np.array(G.witnesses)
        bad[0, 1] = bad[1, 0] = [0.0, 1.0, 0.0]
        with pytest.raises(ValidationError):
            TargetGraph(G.values, G.space, True, bad)


class TestTruncation:
    def test_example(self):
        G = Multigraph.from_edges(3, [(0, 1, 1), (1, 2, 5)])
        assert truncate_multigraph(G, 2) == Multigraph.from_edges(3, [(0, 1, 1), (1, 2, 2)])

    def test_large_t_identity(self):
        G = Multigraph.from_edges(3, [(0, 1, 1), (1, 2, 5)])
        assert truncate_multigraph(G, 9) == G

    def test_zero(self):
        assert truncate_multigraph(DOUBLE, 0).edges() == []

    @given(multigraphs(), st.integers(0, 5), st.integers(0, 5))
    def test_idempotent_and_monotone(self, G, s, t):
        Gt = truncate_multigraph(G, t)
        assert truncate_multigraph(Gt, t) == Gt
        assert truncate_multigraph(Gt, s) == truncate_multigraph(G, min(s, t))


class TestMoments:
    def test_point_mass(self):
        mu = MomentSeq.point_mass(2, 3)
        assert mu.moments.tolist() == [1, 2, 4, 8]

    def test_probability_normalization(self):
        with pytest.raises(ValidationError):
            MomentSeq([2.0, 1.0])

    def test_weight_function_rho_zero(self):
        rho = WeightFunction((1, 2, 4))
        assert rho(0) == 1.0
        assert rho(3) == pytest.approx(1 / 3)
        assert rho(5) == pytest.approx(5.0**-2)

    def test_thresholds_increasing(self):
        with pytest.raises(ValidationError):
            WeightFunction((2, 2))


class TestSerialization:
    @given(multigraphs())
    def test_multigraph_round_trip(self, G):
        assert io.loads(io.dumps(io.to_document(G))) == G

    @given(kernels())
    def test_kernel_round_trip_bit_exact(self, K):
        assert io.loads(io.dumps(K.to_dict())) == K

    def test_graphon_round_trip(self):
        w = np.array([[[0.5, 0.5, 0.0], [0.2, 0.3, 0.5]], [[0.2, 0.3, 0.5], [1.0, 0.0, 0.0]]])
        W = StepGraphon.from_witnesses(Partition([0.3, 0.7]), w, 3)
        back = io.loads(io.dumps(W.to_dict()))
        assert np.array_equal(back.values, W.values)
        assert np.array_equal(back.witnesses, W.witnesses)

    def test_target_round_trip(self):
        G = encode_target_multigraph(Multigraph.from_edges(3, [(0, 1, 2), (1, 2, 1)]), 2)
        back = io.loads(io.dumps(G.to_dict()))
        assert np.array_equal(back.values, G.values) and back.moment_mode

    def test_unknown_document(self):
        with pytest.raises(ValidationError):
            io.from_document({"foo": 1})

    def test_dumps_is_deterministic_lf(self):
        text = io.dumps({"b": 0.1, "a": [1, 2]})
        assert text.endswith("\n") and "\r" not in text
        assert json.loads(text) == {"a": [1, 2], "b": 0.1}


class TestBasisChange:
    @settings(max_examples=50)
    @given(st.integers(2, 5), st.sampled_from(["monomial", "indicator", "cumulative"]),
           st.sampled_from(["monomial", "indicator", "cumulative"]), st.integers(0, 2**32 - 1))
    def test_inverse_and_pairing_preserved(self, dim, a, b, seed):
        rng = np.random.default_rng(seed)
        F = TestGraph(3, ((0, 1), (1, 2)), rng.standard_normal((2, dim)), DecorationSpace(dim, a))
        back = change_basis(change_basis(F, b), a)
        assert np.allclose(back.decorations, F.decorations, atol=1e-8)
        v = rng.standard_normal((3, 3, dim))
        v = (v + np.swapaxes(v, 0, 1)) / 2
        v[np.arange(3), np.arange(3)] = 0.0
        G = TargetGraph(v, DecorationSpace(dim, a))
        G2 = change_target_basis(G, b)
        F2 = change_basis(F, b)
        for c, c2 in zip(F.decorations, F2.decorations):
            assert np.allclose(G.values @ c, G2.values @ c2, atol=1e-8)
