"""Stepping operator, greedy jumble-norm decomposition and weak regularity partitions.

Coarse partitions produced here are unions of ground classes and are
described by a ``labels`` array (ground class -> coarse class).  A coarse
class stands for the union of its ground classes, which need not be an
interval; all norms and densities are invariant under that measure
preserving rearrangement, so coarse kernels are returned on
``Partition.from_labels`` and can be lifted back with :func:`lift`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BREAKPOINT_TOL,
    Partition,
    StepGraphon,
    StepKernel,
    canonical_labels,
    check_labels,
)
from .errors import ValidationError
from .norms import jumble_norm, lp_norm


# --------------------------------------------------------------------------
# stepping
# --------------------------------------------------------------------------


def _indicator(labels, K):
    L = np.zeros((labels.size, K))
    L[np.arange(labels.size), labels] = 1.0
    return L


def _aligned_labels(ground, P):
    """Labels of the ground classes in a coarser interval partition ``P``, or ``None`` if ``P`` refines."""
    gb, pb = ground.breakpoints, P.breakpoints
    if _contains(pb, gb):
        return None
    if _contains(gb, pb):
        mids = (gb[:-1] + gb[1:]) / 2
        return P.locate(mids)
    raise ValidationError("partition is neither a refinement nor a coarsening of the kernel's steps")


def _contains(big, small):
    """Every breakpoint of ``small`` is (within tolerance) a breakpoint of ``big``."""
    idx = np.clip(np.searchsorted(big, small), 1, big.size - 1)
    near = np.minimum(np.abs(big[idx] - small), np.abs(big[idx - 1] - small))
    return bool(np.all(near <= BREAKPOINT_TOL))


def _step_values(values, lam, labels):
    K = int(labels.max()) + 1
    L = _indicator(labels, K)
    mu = L.T @ lam
    mass = L.T @ (lam[:, None] * values * lam[None, :]) @ L
    return mass / (mu[:, None] * mu[None, :]), mu


def stepping(u, P):
    """Block averages of ``u`` over the classes of ``P``.

    ``P`` is either a Partition aligned with the steps of ``u`` (finer or
    coarser) or a labels array mapping each ground class to a coarse class.
    Works per moment kernel for a StepGraphon; attached witnesses are mixed
    with the same weights, so they keep matching the stepped moments.
    """
    ground = u.partition
    if isinstance(P, Partition):
        if P == ground:
            return u
        labels = _aligned_labels(ground, P)
        if labels is None:
            # P refines the steps: each class of P sits inside one ground class
            m = ground.locate((P.breakpoints[:-1] + P.breakpoints[1:]) / 2)
            if isinstance(u, StepKernel):
                return u.refine(P, m)
            w = None if u.witnesses is None else u.witnesses[np.ix_(m, m)]
            return StepGraphon(P, u.values[:, m][:, :, m], u.space, w)
        target = P
    else:
        labels = check_labels(labels=np.asarray(P), k=len(ground))
        target = None
    lam = ground.measures
    if isinstance(u, StepKernel):
        vals, mu = _step_values(u.values, lam, labels)
        if u.symmetric:
            vals = (vals + vals.T) / 2
        return StepKernel(target or Partition(mu / mu.sum()), vals, u.symmetric)
    if isinstance(u, StepGraphon):
        stack = []
        for v in u.values:
            s, mu = _step_values(v, lam, labels)
            stack.append((s + s.T) / 2)
        wit = None
        if u.witnesses is not None:
            K = int(labels.max()) + 1
            L = _indicator(labels, K) * lam[:, None]
            wit = np.einsum("ia,jb,ijm->abm", L, L, u.witnesses) / (mu[:, None, None] * mu[None, :, None])
            wit = (wit + np.swapaxes(wit, 0, 1)) / 2
            wit = wit / wit.sum(axis=2, keepdims=True)
        return StepGraphon(target or Partition(mu / mu.sum()), np.stack(stack), u.space, wit)
    raise ValidationError(f"cannot step a {type(u).__name__}")


def lift(v, labels, ground):
    """Express a coarse kernel (one class per label) on the ground partition."""
    labels = check_labels(np.asarray(labels), len(ground))
    if labels.max() + 1 != v.k:
        raise ValidationError("labels do not match the coarse kernel's class count")
    return StepKernel(ground, v.values[np.ix_(labels, labels)], v.symmetric)


# --------------------------------------------------------------------------
# greedy decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """``w = sum_i a_i 1_{A_i x B_i} + residual`` on the ground partition of ``w``.

    ``jumbles[r]`` is the jumble norm of the residual after ``r`` rounds and
    ``drops[r]`` the L2-energy removed in round ``r`` (``a**2 lam(A) lam(B)``).
    """

    terms: tuple
    residual: StepKernel
    energies: tuple
    drops: tuple
    jumbles: tuple
    method: str

    def reconstruct(self, m=None):
        """``sum_{i < m} a_i 1_{A_i x B_i}`` as a (possibly asymmetric) ground-level kernel."""
        terms = self.terms if m is None else self.terms[:m]
        v = np.zeros_like(self.residual.values)
        for A, B, a in terms:
            v[np.ix_(A, B)] += a
        return StepKernel(self.residual.partition, v, symmetric=False)

    def to_dict(self):
        return {
            "terms": [[list(A), list(B), a] for A, B, a in self.terms],
            "residual": self.residual.values.tolist(),
            "energies": list(self.energies),
            "drops": list(self.drops),
            "jumbles": list(self.jumbles),
            "method": self.method,
        }


def _energy(values, lam):
    return float(np.sum(lam[:, None] * lam[None, :] * values**2))


def _zero_tol(w):
    return 1e-13 * max(lp_norm(w, 2), np.finfo(float).tiny)


class _Greedy:
    """Incremental greedy rounds on a residual kernel."""

    def __init__(self, w, method, seed):
        self.part = w.partition
        self.lam = w.measures
        self.res = np.array(w.values, dtype=float)
        self.method = method
        self.seed = seed
        self.tol = _zero_tol(w)
        self.terms, self.drops = [], []
        self.energies = [_energy(self.res, self.lam)]
        self.jumbles = []
        self.witness = None
        self._measure()

    def _measure(self):
        J = jumble_norm(StepKernel(self.part, self.res, symmetric=False), self.method, self.seed + len(self.terms))
        self.jumbles.append(J.value)
        self.witness = J.witness_sets

    @property
    def done(self):
        return self.jumbles[-1] <= self.tol

    def step(self):
        A, B = self.witness
        la, lb = self.lam[list(A)], self.lam[list(B)]
        block = np.ix_(A, B)
        mA, mB = float(la.sum()), float(lb.sum())
        a = float(la @ self.res[block] @ lb) / (mA * mB)
        self.res[block] -= a
        self.terms.append((tuple(A), tuple(B), a))
        self.drops.append(a * a * mA * mB)
        self.energies.append(_energy(self.res, self.lam))
        self._measure()

    def decomposition(self):
        return Decomposition(
            tuple(self.terms),
            StepKernel(self.part, self.res, symmetric=False),
            tuple(self.energies),
            tuple(self.drops),
            tuple(self.jumbles),
            "exact" if self.method == "exact" else "heuristic",
        )


def _check_method(method):
    if method not in ("exact", "heuristic", "auto"):
        raise ValidationError(f"method: expected exact, heuristic or auto, got {method!r}")


def fk_decompose(w, rounds, method="exact", seed=0):
    """Greedy decomposition: subtract the best rectangle in jumble norm, ``rounds`` times.

    Stops early once the residual is zero (up to rounding).
    """
    if isinstance(rounds, bool) or not isinstance(rounds, (int, np.integer)) or rounds < 0:
        raise ValidationError(f"rounds must be a non-negative integer, got {rounds!r}")
    _check_method(method)
    g = _Greedy(w, method, seed)
    for _ in range(int(rounds)):
        if g.done:
            break
        g.step()
    return g.decomposition()


def overlay_labels(sets, k):
    """Labels of the common refinement of the set system ``sets`` over ``k`` ground classes."""
    member = np.zeros((k, len(sets)), dtype=bool)
    for i, S in enumerate(sets):
        member[list(S), i] = True
    return canonical_labels([row.tobytes() for row in member])


def regularity_rounds(k):
    """Number of greedy rounds for a target of ``k`` classes (``4**j <= k``)."""
    if k < 2:
        raise ValidationError(f"target class count must be >= 2, got {k}")
    j = int(math.floor(math.sqrt(math.log2(k)) / 2))
    if j == 0 and k >= 4:
        j = 1
    return j


def regularity_bound(w, k):
    """``4 / sqrt(log2 k) * ||w||_2``."""
    return 4.0 / math.sqrt(math.log2(k)) * lp_norm(w, 2)


@dataclass(frozen=True)
class RegularityResult:
    """Weak regularity partition of a step kernel.

    ``labels`` maps ground classes to the classes of ``partition``;
    ``stepped`` is ``w_P`` on those classes and ``approximant`` the
    symmetrized greedy stepfunction ``v`` whose steps define ``P``.
    """

    labels: np.ndarray
    partition: Partition
    stepped: StepKernel
    error: float
    bound: float
    certified: bool
    rounds: int
    prefix: int
    decomposition: Decomposition
    approximant: StepKernel

    @property
    def n_classes(self):
        return len(self.partition)

    @property
    def within_bound(self):
        return self.error <= self.bound + 1e-12

    def to_dict(self):
        return {
            "labels": self.labels.tolist(),
            "partition": self.partition.to_dict(),
            "stepped": self.stepped.to_dict(),
            "residual_jumble": self.error,
            "certified_bound": self.bound,
            "certified": self.certified,
            "within_bound": self.within_bound,
            "rounds": self.rounds,
            "prefix": self.prefix,
        }


def _symmetrize(v):
    return StepKernel(v.partition, (v.values + v.values.T) / 2)


def weak_regularity_partition(w, k, method="exact", seed=0, use_own_steps=False):
    """Partition into at most ``k`` unions of ground classes with small ``||w - w_P||_jumble``.

    Runs ``j`` greedy rounds, keeps the shortest prefix with the smallest
    residual jumble norm, overlays its sets (rows and columns, which
    symmetrizes) and steps ``w`` on the result.  The bound
    ``4 / sqrt(log2 k) ||w||_2`` is certified only with the exact search.
    With ``use_own_steps`` the ground partition is returned whenever it has
    at most ``k`` classes.
    """
    _check_method(method)
    if not isinstance(w, StepKernel) or not w.symmetric:
        raise ValidationError("weak_regularity_partition expects a symmetric StepKernel")
    j = regularity_rounds(k)
    dec = fk_decompose(w, j, method, seed)
    jumbles = np.array(dec.jumbles)
    m = int(np.argmin(jumbles))
    ground = w.partition
    if use_own_steps and w.k <= k:
        labels = np.arange(w.k)
    else:
        sets = [s for A, B, _ in dec.terms[:m] for s in (A, B)]
        labels = overlay_labels(sets, w.k)
    stepped = stepping(w, labels)
    error = jumble_norm(w - lift(stepped, labels, ground), method, seed).value
    exact = method == "exact" or (method == "auto" and w.k <= 14)
    return RegularityResult(
        labels=labels,
        partition=stepped.partition,
        stepped=stepped,
        error=error,
        bound=regularity_bound(w, k),
        certified=exact,
        rounds=j,
        prefix=m,
        decomposition=dec,
        approximant=_symmetrize(dec.reconstruct(m)),
    )


# --------------------------------------------------------------------------
# several kernels
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiRegularityResult:
    labels: np.ndarray
    partition: Partition
    errors: tuple
    targets: tuple
    class_bound: int

    @property
    def satisfied(self):
        return all(e <= t + 1e-12 for e, t in zip(self.errors, self.targets))

    def to_dict(self):
        return {
            "labels": self.labels.tolist(),
            "partition": self.partition.to_dict(),
            "errors": list(self.errors),
            "targets": list(self.targets),
            "class_bound": self.class_bound,
            "satisfied": self.satisfied,
        }


def _labels_for(P, ground):
    if P is None:
        return np.zeros(len(ground), dtype=np.intp)
    if isinstance(P, Partition):
        labels = _aligned_labels(ground, P)
        if labels is None and P != ground:
            raise ValidationError("P1 must be a coarsening of the kernels' common steps")
        return np.arange(len(ground)) if labels is None else labels
    return check_labels(np.asarray(P), len(ground))


def _kernel_labels(u, target, budget, method, seed):
    """Smallest greedy overlay with ``||u - u_R||_jumble <= target`` and at most ``budget`` classes."""
    g = _Greedy(u, method, seed)
    best = None
    while True:
        sets = [s for A, B, _ in g.terms for s in (A, B)]
        labels = overlay_labels(sets, u.k)
        if labels.max() + 1 > budget:
            break
        err = jumble_norm(u - lift(stepping(u, labels), labels, u.partition), method, seed).value
        if err <= target:
            return labels
        best = labels
        if g.done:
            break
        g.step()
    if u.k <= budget:
        return np.arange(u.k)
    return best if best is not None else np.zeros(u.k, dtype=np.intp)


def multi_weak_regularity(kernels, eps, P1=None, method="exact", seed=0):
    """Common partition refining ``P1`` with ``||u_i - (u_i)_P||_jumble <= eps ||u_i||_2`` for all ``i``.

    Each kernel gets its own partition with error at most ``eps/2 ||u_i||_2``
    and at most ``2**(4 ceil(1/eps))`` classes; the result is their common
    refinement with ``P1`` and every error is verified on the output.
    """
    kernels = list(kernels)
    if not kernels:
        raise ValidationError("need at least one kernel")
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    _check_method(method)
    ground = kernels[0].partition
    if any(u.partition != ground for u in kernels):
        raise ValidationError("kernels must share one ground partition")
    base = _labels_for(P1, ground)
    budget = 2 ** (4 * math.ceil(1.0 / eps))
    per_kernel = [_kernel_labels(u, eps / 2 * lp_norm(u, 2), budget, method, seed) for u in kernels]
    labels = canonical_labels(list(zip(base.tolist(), *(lab.tolist() for lab in per_kernel))))
    errors = tuple(
        jumble_norm(u - lift(stepping(u, labels), labels, ground), method, seed).value for u in kernels
    )
    return MultiRegularityResult(
        labels=labels,
        partition=Partition.from_labels(ground, labels),
        errors=errors,
        targets=tuple(eps * lp_norm(u, 2) for u in kernels),
        class_bound=(int(base.max()) + 1) * budget ** len(kernels),
    )
