import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphlimits.core import Partition, StepGraphon, StepKernel
from graphlimits.errors import ValidationError
from graphlimits.norms import jumble_norm, lp_norm
from graphlimits.regularity import (
    fk_decompose,
    lift,
    multi_weak_regularity,
    overlay_labels,
    regularity_bound,
    regularity_rounds,
    stepping,
    weak_regularity_partition,
)

seeds = st.integers(0, 2**32 - 1)
TOL = 1e-9


def random_labels(rng, k):
    K = int(rng.integers(1, k + 1))
    lab = np.concatenate([np.arange(K), rng.integers(0, K, size=k - K)])
    rng.shuffle(lab)
    return np.unique(lab, return_inverse=True)[1]


class TestStepping:
    def test_ground_partition_is_identity(self):
        u = StepKernel.random(4, np.random.default_rng(0))
        assert stepping(u, u.partition) == u

    def test_single_class(self):
        u = StepKernel.random(4, np.random.default_rng(1))
        s = stepping(u, np.zeros(4, dtype=int))
        assert s.k == 1 and s.values[0, 0] == pytest.approx(u.integral())

    def test_sign_kernel_merged(self):
        s = stepping(StepKernel.from_values([[1, -1], [-1, 1]]), Partition.uniform(1))
        assert s.values[0, 0] == pytest.approx(0.0)

    def test_refining_partition(self):
        u = StepKernel(Partition([0.5, 0.5]), [[1, 2], [2, 3]])
        s = stepping(u, Partition([0.25, 0.25, 0.5]))
        assert np.array_equal(s.values, [[1, 1, 2], [1, 1, 2], [2, 2, 3]])

    def test_unaligned_partition_rejected(self):
        u = StepKernel(Partition([0.5, 0.5]), np.eye(2))
        with pytest.raises(ValidationError):
            stepping(u, Partition([0.3, 0.7]))

    def test_graphon_witnesses_follow(self):
        w = np.array([[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [0.5, 0.5]]])
        W = StepGraphon.from_witnesses(Partition([0.5, 0.5]), w, 1)
        s = stepping(W, np.zeros(2, dtype=int))
        assert s.witnesses[0, 0].tolist() == pytest.approx([0.375, 0.625])
        assert s.values[1, 0, 0] == pytest.approx(0.625)

    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_contraction(self, seed):
        rng = np.random.default_rng(seed)
        u = StepKernel.random(int(rng.integers(1, 9)), rng, heavy_tail=bool(rng.random() < 0.5))
        lab = random_labels(rng, u.k)
        uP = stepping(u, lab)
        assert jumble_norm(uP).value <= jumble_norm(u).value + TOL
        for p in (1, 2, 3, 4):
            assert lp_norm(uP, p) <= lp_norm(u, p) * (1 + 1e-12) + TOL
        # energy identity ||u||^2 = ||u_P||^2 + ||u - u_P||^2
        e = lp_norm(u, 2) ** 2
        rest = lp_norm(u - lift(uP, lab, u.partition), 2) ** 2
        assert e == pytest.approx(lp_norm(uP, 2) ** 2 + rest, rel=1e-9, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_partition_refining_steps_of_v(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 9))
        u = StepKernel.random(k, rng)
        coarse = random_labels(rng, k)
        K = int(coarse.max()) + 1
        a = rng.standard_normal((K, K))
        v = lift(StepKernel(Partition.from_labels(u.partition, coarse), (a + a.T) / 2), coarse, u.partition)
        fine = np.unique(coarse * 2 + rng.integers(0, 2, size=k), return_inverse=True)[1]
        uP = lift(stepping(u, fine), fine, u.partition)
        assert jumble_norm(u - uP).value <= 2 * jumble_norm(u - v).value + TOL


class TestDecomposition:
    def test_rectangle_one_round(self):
        w = StepKernel(Partition.uniform(3), np.where(np.add.outer([1, 1, 0], [1, 1, 0]) == 2, 2.0, 0.0))
        d = fk_decompose(w, 4)
        assert len(d.terms) == 1
        assert np.allclose(d.residual.values, 0.0)

    def test_zero_kernel(self):
        d = fk_decompose(StepKernel.constant(0.0, Partition.uniform(3)), 3)
        assert d.terms == ()

    def test_energy_strictly_decreasing(self):
        w = StepKernel.random(8, np.random.default_rng(4))
        d = fk_decompose(w, 4)
        e = d.energies
        assert all(b < a for a, b in zip(e, e[1:]))
        assert np.allclose(np.diff(e), -np.array(d.drops), atol=1e-12)
        assert np.allclose((d.reconstruct() + d.residual).values, w.values)

    def test_rounds_validated(self):
        with pytest.raises(ValidationError):
            fk_decompose(StepKernel.constant(1.0), -1)


class TestWeakRegularity:
    def test_rounds(self):
        assert regularity_rounds(2) == 0
        assert regularity_rounds(4) == 1
        assert regularity_rounds(16) == 1
        assert regularity_rounds(2**16) == 2
        with pytest.raises(ValidationError):
            regularity_rounds(1)

    def test_constant(self):
        r = weak_regularity_partition(StepKernel.constant(3.0, Partition.uniform(4)), 16)
        assert r.error == pytest.approx(0.0, abs=1e-12) and r.n_classes == 1

    def test_own_steps(self):
        w = StepKernel.random(4, np.random.default_rng(2))
        r = weak_regularity_partition(w, 16, use_own_steps=True)
        assert r.error == pytest.approx(0.0, abs=1e-12)

    def test_twelve_blocks(self):
        w = StepKernel.random(12, np.random.default_rng(9))
        r = weak_regularity_partition(w, 16)
        assert r.certified and r.within_bound
        assert r.n_classes <= 16
        assert r.bound == pytest.approx(4 / math.sqrt(math.log2(16)) * lp_norm(w, 2))
        assert r.bound == regularity_bound(w, 16)

    def test_rejects_asymmetric(self):
        w = StepKernel(Partition.uniform(2), [[0, 1], [0, 0]], symmetric=False)
        with pytest.raises(ValidationError):
            weak_regularity_partition(w, 4)

    def test_heuristic_not_certified(self):
        r = weak_regularity_partition(StepKernel.random(6, np.random.default_rng(3)), 16, method="heuristic")
        assert not r.certified

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.integers(2, 64))
    def test_bound_holds(self, seed, k):
        rng = np.random.default_rng(seed)
        w = StepKernel.random(int(rng.integers(2, 9)), rng, heavy_tail=bool(rng.random() < 0.5))
        r = weak_regularity_partition(w, k)
        assert r.error <= r.bound + TOL
        assert r.n_classes <= max(1, min(k, 4**r.rounds))

    def test_overlay(self):
        assert overlay_labels([(0, 1), (1, 2)], 4).tolist() == [0, 1, 2, 3]
        assert overlay_labels([], 3).tolist() == [0, 0, 0]


class TestMultiRegularity:
    def test_constant_keeps_p1(self):
        u = StepKernel.constant(1.0, Partition.uniform(4))
        r = multi_weak_regularity([u], 1.0, P1=np.array([0, 0, 1, 1]))
        assert r.labels.tolist() == [0, 0, 1, 1]

    def test_identical_kernels(self):
        u = StepKernel.random(6, np.random.default_rng(5))
        a = multi_weak_regularity([u], 0.5)
        b = multi_weak_regularity([u, u], 0.5)
        assert a.labels.tolist() == b.labels.tolist()

    def test_three_kernels(self):
        rng = np.random.default_rng(6)
        part = Partition(rng.dirichlet(np.ones(6)))
        ks = [StepKernel(part, StepKernel.random(6, rng).values) for _ in range(3)]
        r = multi_weak_regularity(ks, 0.5)
        assert r.satisfied
        for u, e in zip(ks, r.errors):
            assert e <= 0.5 * lp_norm(u, 2) + 1e-12

    def test_eps_validated(self):
        with pytest.raises(ValidationError):
            multi_weak_regularity([StepKernel.constant(1.0)], 0.0)
