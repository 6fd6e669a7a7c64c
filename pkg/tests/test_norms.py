import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from graphlimits.core import DecorationSpace, Partition, StepGraphon, StepKernel, TestGraph
from graphlimits.errors import ValidationError
from graphlimits.norms import (
    SLACK_TOL,
    check_bilinear_bound,
    check_counting_bounds,
    check_graphon_counting_bounds,
    check_holder_bound,
    check_k_functional_bound,
    cut_norm,
    cut_value,
    jumble_norm,
    jumble_ratio,
    k_functional,
    k_functional_constant,
    lp_norm,
    sup_norm,
)

SIGN = StepKernel.from_values([[1, -1], [-1, 1]])
seeds = st.integers(0, 2**32 - 1)


def kernel(seed, kmax=8, heavy=None):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, kmax + 1))
    h = bool(rng.random() < 0.5) if heavy is None else heavy
    return StepKernel.random(k, rng, heavy_tail=h)


class TestLp:
    @pytest.mark.parametrize("p", [1, 2, 3.5, math.inf])
    def test_constant(self, p):
        assert lp_norm(StepKernel.constant(-1.5), p) == pytest.approx(1.5)

    def test_sign_kernel(self):
        assert lp_norm(SIGN, 2) == pytest.approx(1.0)

    def test_single_block(self):
        assert lp_norm(StepKernel.from_values([[2, 0], [0, 0]]), 1) == pytest.approx(0.5)

    def test_rejects_p_below_one(self):
        with pytest.raises(ValidationError):
            lp_norm(SIGN, 0.5)

    @given(seeds)
    def test_monotone_in_p(self, seed):
        u = kernel(seed)
        vals = [lp_norm(u, p) for p in (1, 2, 3, 4)] + [sup_norm(u)]
        assert all(a <= b * (1 + 1e-12) + 1e-15 for a, b in zip(vals, vals[1:]))


class TestCutAndJumble:
    def test_constant(self):
        K = StepKernel.constant(0.7)
        assert cut_norm(K).value == pytest.approx(0.7)
        assert jumble_norm(K).value == pytest.approx(0.7)

    def test_sign_kernel(self):
        assert cut_norm(SIGN).value == pytest.approx(0.25)
        r = jumble_norm(SIGN)
        assert r.value == pytest.approx(0.5)
        assert r.witness_sets == ((0,), (0,))
        assert jumble_ratio(SIGN, (0,), (0,)) == pytest.approx(0.5)
        assert cut_value(SIGN, (0,), (1,)) == pytest.approx(0.25)

    def test_zero_and_single_class(self):
        assert jumble_norm(StepKernel.constant(0.0)).value == 0.0
        assert jumble_norm(StepKernel.constant(-2.0)).value == pytest.approx(2.0)

    def test_exact_cap(self):
        u = StepKernel.random(15, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            jumble_norm(u, "exact")
        assert jumble_norm(u, "auto").method == "heuristic"

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_exact_matches_oracle(self, seed):
        u = kernel(seed, kmax=6)
        assert jumble_norm(u, "exact").value == pytest.approx(oracles.jumble_norm(u), rel=1e-10, abs=1e-12)
        assert cut_norm(u, "exact").value == pytest.approx(oracles.cut_norm(u), rel=1e-10, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_witness_attains_value(self, seed):
        u = kernel(seed)
        r = jumble_norm(u, "exact")
        assert abs(jumble_ratio(u, *r.witness_sets)) == pytest.approx(r.value, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_heuristic_is_lower_bound(self, seed):
        u = kernel(seed, kmax=10)
        h = jumble_norm(u, "heuristic", seed=seed % 100)
        assert h.value <= jumble_norm(u, "exact").value * (1 + 1e-12)
        assert abs(jumble_ratio(u, *h.witness_sets)) == pytest.approx(h.value, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_norm_chain(self, seed):
        u = kernel(seed)
        c, j = cut_norm(u).value, jumble_norm(u).value
        assert c <= j * (1 + 1e-12)
        assert j <= math.sqrt(c * sup_norm(u)) * (1 + 1e-12) + 1e-15
        assert j <= lp_norm(u, 2) * (1 + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.floats(-5, 5))
    def test_norm_axioms(self, seed, a):
        u, v = kernel(seed, kmax=5), kernel(seed + 1, kmax=5)
        J = lambda x: jumble_norm(x).value  # noqa: E731
        assert J(u * a) == pytest.approx(abs(a) * J(u), rel=1e-10, abs=1e-12)
        assert J(u + v) <= (J(u) + J(v)) * (1 + 1e-12)

    def test_refinement_invariant(self):
        u = StepKernel(Partition([0.25, 0.75]), [[1, -2], [-2, 0.5]])
        fine = u.refine(Partition([0.25, 0.25, 0.5]), np.array([0, 1, 1]))
        assert jumble_norm(fine).value == pytest.approx(jumble_norm(u).value)

    def test_graphon_uses_euclidean_norm(self):
        # a graphon whose two moment kernels are equal has norm sqrt(2) times theirs
        K = StepKernel.from_values([[1.0, -0.5], [-0.5, 0.2]])
        W = StepGraphon.from_kernels([K, K], basis="indicator")
        assert jumble_norm(W).value == pytest.approx(math.sqrt(2) * jumble_norm(K).value)
        assert lp_norm(W, 2) == pytest.approx(math.sqrt(2) * lp_norm(K, 2))


class TestKFunctional:
    def test_constant(self):
        assert k_functional([1.0], [1.0]) == pytest.approx(1.0)

    def test_quarter(self):
        assert k_functional([0.25, 0.75], [1.0, 0.0]) == pytest.approx(0.5)

    def test_constant_at_three(self):
        assert k_functional_constant(3) == pytest.approx(2 ** (1 / 3))

    def test_needs_p_above_two(self):
        with pytest.raises(ValidationError):
            k_functional_constant(2)

    @given(seeds)
    def test_matches_piecewise_oracle(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 10))
        lam = rng.dirichlet(np.ones(k))
        v = rng.standard_normal(k)
        assert k_functional(lam, v) == pytest.approx(oracles.k_functional(lam, v), rel=1e-12, abs=1e-15)

    @given(seeds, st.sampled_from([3, 4]))
    def test_bound(self, seed, p):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 10))
        c = check_k_functional_bound(rng.dirichlet(np.ones(k)), rng.standard_normal(k), p)
        assert not c.falsified


class TestBilinear:
    def test_zero_kernel(self):
        r = check_bilinear_bound(StepKernel.constant(0.0), [1.0], [1.0])
        assert r["bilinear_l3"].lhs == 0.0 and r["bilinear_l3"].rhs == 0.0

    def test_constant_one(self):
        r = check_bilinear_bound(StepKernel.constant(1.0), [1.0], [1.0])
        assert r["bilinear_l3"].lhs == pytest.approx(1.0)
        assert r["bilinear_l3"].rhs == pytest.approx(8.0)

    @settings(max_examples=80, deadline=None)
    @given(seeds)
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        u = kernel(seed, kmax=10)
        f = rng.standard_normal(u.k) * np.exp(rng.standard_normal(u.k))
        g = rng.standard_normal(u.k)
        assert check_bilinear_bound(u, f, g).ok


class TestCounting:
    def test_equal_kernels(self):
        u = kernel(1)
        r = check_counting_bounds([(0, 1), (1, 2)], u, u)
        assert all(c.lhs == 0.0 and c.rhs == pytest.approx(0.0, abs=1e-12) for c in r.checks)

    def test_single_edge_is_integral_difference(self):
        u, w = kernel(2, kmax=4), kernel(3, kmax=4)
        r = check_counting_bounds([(0, 1)], u, w)
        assert r["single_edge"].lhs == pytest.approx(abs(u.integral() - w.integral()))
        assert r["single_edge"].slack >= -SLACK_TOL

    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 7))
        part = Partition(rng.dirichlet(np.ones(k)))
        u = StepKernel(part, StepKernel.random(k, rng).values)
        w = StepKernel(part, u.values + rng.uniform(0, 1) * StepKernel.random(k, rng).values)
        edges = [(0, 1), (1, 2), (2, 3), (0, 3)][: int(rng.integers(1, 5))]
        assert check_counting_bounds(edges, u, w).ok
        assert check_holder_bound(edges, u).slack >= -SLACK_TOL

    def test_graphon_forms(self):
        rng = np.random.default_rng(5)
        part = Partition.uniform(3)
        U = StepGraphon.from_kernels([StepKernel(part, StepKernel.random(3, rng).values) for _ in range(2)], "indicator")
        W = StepGraphon.from_kernels([StepKernel(part, StepKernel.random(3, rng).values) for _ in range(2)], "indicator")
        F = TestGraph(3, ((0, 1), (1, 2)), rng.standard_normal((2, 2)), DecorationSpace(2, "indicator"))
        r = check_graphon_counting_bounds(F, U, W)
        assert r.ok
        assert not r["dec_dist_graphon_mean_norm"].asserted
