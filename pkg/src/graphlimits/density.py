"""Homomorphism densities of decorated graphs, step kernels and graphons.

Two exact engines are provided.  ``method="contract"`` evaluates the sum
over all maps ``V(F) -> [N]`` as a single tensor contraction (numpy
``einsum``); ``method="enumerate"`` walks the maps explicitly in chunks and
is the reference used to cross-check the contraction.  Both refuse to run
when the nominal number of maps ``N**k`` exceeds ``cap``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int, check_random_state
from .core import (
    Multigraph,
    StepGraphon,
    StepKernel,
    TargetGraph,
    TestGraph,
    change_basis,
    common_refinement,
)
from .errors import CapExceededError, ValidationError

DEFAULT_CAP = 10**8
_CHUNK = 1 << 16


@dataclass(frozen=True)
class DensityReport:
    value: float
    mode: str
    samples: int = 0
    stderr: float = 0.0

    def to_dict(self):
        return {"value": self.value, "mode": self.mode, "samples": self.samples, "stderr": self.stderr}


def check_cap(count, cap, what):
    if count > cap:
        raise CapExceededError(what, count, cap)


# --------------------------------------------------------------------------
# engines
# --------------------------------------------------------------------------


def _contract(k, edges, mats, weights):
    """``sum_b prod_i weights[b_i] prod_{ij} M_ij[b_i, b_j]`` over ``b in [N]^k``."""
    operands = []
    for i in range(k):
        operands += [weights, [i]]
    for (i, j), M in zip(edges, mats):
        operands += [M, [i, j]]
    return float(np.einsum(*operands, [], optimize="greedy"))


def _map_chunks(N, k, injective):
    if injective:
        it = itertools.permutations(range(N), k)
        while True:
            block = list(itertools.islice(it, _CHUNK))
            if not block:
                return
            yield np.array(block, dtype=np.intp).reshape(len(block), k)
    else:
        total = N**k
        powers = N ** np.arange(k - 1, -1, -1, dtype=np.int64)
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
            yield ((idx[:, None] // powers[None, :]) % N).astype(np.intp)


def _enumerate(k, edges, mats, weights, injective=False):
    """Chunked explicit sum over maps; chunk totals are combined with ``math.fsum``."""
    N = weights.size
    totals = []
    for phi in _map_chunks(N, k, injective):
        term = np.prod(weights[phi], axis=1)
        for (i, j), M in zip(edges, mats):
            term = term * M[phi[:, i], phi[:, j]]
        totals.append(float(term.sum()))
    return math.fsum(totals)


def _run(k, edges, mats, weights, method, injective=False):
    if injective or method == "enumerate":
        return _enumerate(k, edges, mats, weights, injective)
    if method != "contract":
        raise ValidationError(f"method: expected 'contract' or 'enumerate', got {method!r}")
    return _contract(k, edges, mats, weights)


# --------------------------------------------------------------------------
# decorated graphs
# --------------------------------------------------------------------------


def _pairing_mats(F, G):
    if not isinstance(F, TestGraph) or not isinstance(G, TargetGraph):
        raise ValidationError("expected a TestGraph and a TargetGraph")
    if F.space.dim != G.space.dim:
        raise ValidationError(f"decoration dims differ: test {F.space.dim}, target {G.space.dim}")
    if F.space.basis != G.space.basis:
        raise ValidationError(
            f"bases differ ({F.space.basis} vs {G.space.basis}); use change_basis first"
        )
    return [G.values @ c for c in F.decorations]


def hom_decorated(F, G, cap=DEFAULT_CAP, method="contract"):
    """``sum over phi: V(F) -> V(G)`` of ``prod_e <f(e), g(phi(e))>``."""
    mats = _pairing_mats(F, G)
    check_cap(float(G.n) ** F.k, cap, "hom_decorated")
    return _run(F.k, F.edges, mats, np.ones(G.n), method)


def t_density(F, G, cap=DEFAULT_CAP, method="contract"):
    """Homomorphism density ``hom(F, G) / n**k``."""
    return hom_decorated(F, G, cap, method) / float(G.n) ** F.k


def inj_decorated(F, G, cap=DEFAULT_CAP):
    mats = _pairing_mats(F, G)
    if G.n < F.k:
        raise ValidationError(f"injective maps need n >= k (n={G.n}, k={F.k})")
    check_cap(float(G.n) ** F.k, cap, "inj_decorated")
    return _enumerate(F.k, F.edges, mats, np.ones(G.n), injective=True)


def t_inj_density(F, G, cap=DEFAULT_CAP):
    """Injective density ``inj(F, G) / (n (n-1) ... (n-k+1))``."""
    inj = inj_decorated(F, G, cap)
    return inj / float(math.perm(G.n, F.k))


# --------------------------------------------------------------------------
# step kernels and graphons
# --------------------------------------------------------------------------


def t_step(edges, kernels, k=None, cap=DEFAULT_CAP, method="contract"):
    """``t(F, w) = int prod_{ij} w_ij(x_i, x_j) dx`` for step kernels ``w_ij``.

    ``edges`` are node pairs of a simple graph, ``kernels`` one StepKernel
    per edge (or a single kernel used on every edge).  Kernels on different
    partitions are moved to their common refinement.
    """
    edges = [tuple(map(int, e)) for e in edges]
    if isinstance(kernels, StepKernel):
        kernels = [kernels] * len(edges)
    kernels = list(kernels)
    if len(kernels) != len(edges):
        raise ValidationError("t_step: need one kernel per edge")
    if k is None:
        k = 1 + max((max(e) for e in edges), default=0)
    check_positive_int(k, "k")
    if not edges:
        return 1.0
    part = kernels[0].partition
    if all(K.partition == part for K in kernels):
        mats = [K.values for K in kernels]
    else:
        part, maps = common_refinement(*(K.partition for K in kernels))
        mats = [K.values[np.ix_(m, m)] for K, m in zip(kernels, maps)]
    check_cap(float(len(part)) ** k, cap, "t_step")
    return _run(k, edges, mats, part.measures, method)


def _align_decorations(F, W):
    """Decoration coordinates of ``F`` in the basis of ``W`` (monomial orders padded or trimmed)."""
    if F.space.basis == "monomial" and F.space.dim != W.dim and W.space.basis == "monomial":
        c = np.asarray(F.decorations)
        if c.shape[1] > W.dim:
            if np.any(c[:, W.dim:] != 0):
                top = int(np.max(np.nonzero(np.any(c != 0, axis=0))[0]))
                raise ValidationError(
                    f"decoration needs moment order {top}, graphon stores orders < {W.dim}"
                )
            return c[:, : W.dim]
        return np.pad(c, ((0, 0), (0, W.dim - c.shape[1])))
    if F.space != W.space:
        if F.space.dim != W.dim:
            raise ValidationError(f"decoration dims differ: test {F.space.dim}, graphon {W.dim}")
        return change_basis(F, W.space).decorations
    return F.decorations


def align_test_graph(F, W):
    """``F`` re-expressed in the decoration space of the graphon ``W``."""
    if F.space == W.space:
        return F
    return TestGraph(F.k, F.edges, _align_decorations(F, W), W.space)


def graphon_edge_kernels(F, W):
    """The step kernels ``<f(ij), W>`` for every edge of ``F``."""
    c = _align_decorations(F, W)
    out = []
    for vec in c:
        K = np.tensordot(vec, W.values, axes=1)
        out.append(StepKernel(W.partition, (K + K.T) / 2))
    return out


def t_graphon(F, W, cap=DEFAULT_CAP, method="contract"):
    """``t(F, W)`` for a decorated test graph and a step graphon."""
    if not isinstance(W, StepGraphon):
        raise ValidationError("t_graphon expects a StepGraphon")
    return t_step(F.edges, graphon_edge_kernels(F, W), F.k, cap, method)


def t_monte_carlo(F, target, samples, seed=0, chunk=_CHUNK):
    """Unbiased sample mean of the edge-pairing product over random maps.

    For a TargetGraph the maps are uniform on ``V(G)^k``; for a StepGraphon
    the points ``x_i`` are uniform in [0, 1].
    """
    samples = check_positive_int(samples, "samples")
    rng = check_random_state(seed)
    if isinstance(target, TargetGraph):
        mats = _pairing_mats(F, target)

        def draw(m):
            return rng.integers(0, target.n, size=(m, F.k))

    elif isinstance(target, StepGraphon):
        mats = [K.values for K in graphon_edge_kernels(F, target)]

        def draw(m):
            return target.partition.locate(rng.random((m, F.k)))

    else:
        raise ValidationError("target must be a TargetGraph or StepGraphon")
    vals = []
    for start in range(0, samples, chunk):
        phi = draw(min(chunk, samples - start))
        term = np.ones(phi.shape[0])
        for (i, j), M in zip(F.edges, mats):
            term = term * M[phi[:, i], phi[:, j]]
        vals.append(term)
    vals = np.concatenate(vals)
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return DensityReport(float(vals.mean()), "monte_carlo", samples, stderr)


# --------------------------------------------------------------------------
# multigraphs
# --------------------------------------------------------------------------


def _multi_edges(F):
    if not isinstance(F, Multigraph):
        raise ValidationError("expected a Multigraph test graph")
    return [((u, v), m) for u, v, m in F.edges()]


def t_moment(F, G, cap=DEFAULT_CAP, method="contract"):
    """Node-and-edge density ``sum_phi prod_ij g_{phi(i) phi(j)}**f_ij / n**k``."""
    edges = _multi_edges(F)
    check_cap(float(G.n) ** F.n, cap, "t_moment")
    g = G.matrix.astype(float)
    mats = [g**m for _, m in edges]
    hom = _run(F.n, [e for e, _ in edges], mats, np.ones(G.n), method)
    return hom / float(G.n) ** F.n


def node_edge_hom_count(F, G, cap=DEFAULT_CAP):
    """Number of node-and-edge homomorphisms, in exact integer arithmetic.

    Each of the ``f_ij`` parallel edges of ``F`` independently picks one of
    the ``g_{phi(i) phi(j)}`` parallel edges of ``G``.
    """
    edges = _multi_edges(F)
    n, k = G.n, F.n
    check_cap(float(n) ** k, cap, "node_edge_hom_count")
    g = G.matrix.tolist()
    total = 0
    for phi in itertools.product(range(n), repeat=k):
        term = 1
        for (i, j), m in edges:
            term *= g[phi[i]][phi[j]] ** m
            if not term:
                break
        total += term
    return total


def node_hom_count(F, G, cap=DEFAULT_CAP):
    """Number of maps whose image multiplicities dominate the edge multiplicities of ``F``."""
    edges = _multi_edges(F)
    n, k = G.n, F.n
    check_cap(float(n) ** k, cap, "node_hom_count")
    total = 0
    for phi in _map_chunks(n, k, injective=False):
        ok = np.ones(phi.shape[0], dtype=bool)
        for (i, j), m in edges:
            ok &= G.matrix[phi[:, i], phi[:, j]] >= m
        total += int(ok.sum())
    return total
