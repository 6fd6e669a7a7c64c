"""Norms of step kernels and the inequality checks built on them.

The cut and jumble norms of a step kernel are suprema over measurable set
pairs, but for stepfunctions the supremum is attained on unions of step
classes, so the exact routines enumerate class subsets.  Vector-valued
(graphon) kernels are handled by the same code with the absolute value
replaced by the Euclidean norm of the block sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_random_state
from .core import StepGraphon, StepKernel, TestGraph
from .density import DEFAULT_CAP, graphon_edge_kernels, t_density, t_graphon, t_inj_density, t_step
from .errors import ValidationError

EXACT_MAX_CLASSES = 14
HEURISTIC_RESTARTS = 32
SLACK_TOL = 1e-9


@dataclass(frozen=True)
class NormResult:
    """Norm value with the maximizing class subsets (``None`` for L^p norms)."""

    value: float
    witness_sets: tuple | None = None
    method: str = "exact"

    def to_dict(self):
        ws = None if self.witness_sets is None else [list(self.witness_sets[0]), list(self.witness_sets[1])]
        return {"value": self.value, "witness_sets": ws, "method": self.method}


def _stack(u):
    """``(values (d, k, k), measures)`` for a StepKernel or StepGraphon."""
    if isinstance(u, StepKernel):
        return u.values[None], u.measures
    if isinstance(u, StepGraphon):
        return u.values, u.partition.measures
    raise ValidationError(f"expected a StepKernel or StepGraphon, got {type(u).__name__}")


def _pointwise_abs(u):
    vals, lam = _stack(u)
    return (np.abs(vals[0]) if vals.shape[0] == 1 else np.linalg.norm(vals, axis=0)), lam


# --------------------------------------------------------------------------
# L^p
# --------------------------------------------------------------------------


def lp_norm(u, p):
    """``(sum_ij lam_i lam_j |u_ij|**p)**(1/p)``; Euclidean pointwise norm for graphons."""
    if p == math.inf:
        return sup_norm(u)
    if p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    a, lam = _pointwise_abs(u)
    w = lam[:, None] * lam[None, :]
    return float(np.sum(w * a**p) ** (1.0 / p))


def sup_norm(u):
    """Essential supremum: the largest absolute block value."""
    a, _ = _pointwise_abs(u)
    return float(a.max())


def lp_norm_0(u, p):
    """L^p norm with the convention ``||u||_0 = 1``."""
    return 1.0 if p == 0 else lp_norm(u, p)


def stepfunction_lp(measures, values, p):
    """L^p norm of a one-variable stepfunction."""
    lam = np.asarray(measures, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if p == math.inf:
        return float(v.max())
    return float(np.sum(lam * v**p) ** (1.0 / p))


# --------------------------------------------------------------------------
# exact subset enumeration
# --------------------------------------------------------------------------


def _subset_matrix(k):
    """Row ``s - 1`` is the indicator of the bit mask ``s`` (``s = 1 .. 2**k - 1``)."""
    masks = np.arange(1, 1 << k, dtype=np.int64)
    return ((masks[:, None] >> np.arange(k)) & 1).astype(float)


def _mask_to_set(mask, k):
    return tuple(i for i in range(k) if mask >> i & 1)


def _check_exact(k, max_classes):
    if k > max_classes:
        raise ValidationError(
            f"exact search over {k} classes exceeds the cap of {max_classes}; use method='heuristic'"
        )


def _exact_jumble(vals, lam, max_classes):
    d, k, _ = vals.shape
    _check_exact(k, max_classes)
    S = _subset_matrix(k)
    mass = S @ lam
    weighted = lam[None, :, None] * vals * lam[None, None, :]
    # rows of S U for every component, shape (d, 2^k - 1, k)
    SU = np.einsum("ai,dij->daj", S, weighted)
    n_sub = S.shape[0]
    chunk = max(1, (1 << 22) // (n_sub * d))
    best, arg = -1.0, (0, 0)
    inv_sqrt = 1.0 / np.sqrt(mass)
    for start in range(0, n_sub, chunk):
        stop = min(n_sub, start + chunk)
        num = SU[:, start:stop] @ S.T
        mag = np.abs(num[0]) if d == 1 else np.sqrt(np.sum(num**2, axis=0))
        ratio = mag * inv_sqrt[start:stop, None] * inv_sqrt[None, :]
        idx = int(np.argmax(ratio))
        r, c = divmod(idx, n_sub)
        if ratio[r, c] > best:
            best, arg = float(ratio[r, c]), (start + r + 1, c + 1)
    return best, arg


def _exact_cut(vals, lam, max_classes):
    d, k, _ = vals.shape
    if d != 1:
        raise ValidationError("cut_norm is defined for real-valued kernels only")
    _check_exact(k, max_classes)
    S = _subset_matrix(k)
    U = lam[:, None] * vals[0] * lam[None, :]
    R = S @ U
    pos = np.where(R > 0, R, 0.0).sum(axis=1)
    neg = -np.where(R < 0, R, 0.0).sum(axis=1)
    both = np.maximum(pos, neg)
    a = int(np.argmax(both))
    row = R[a]
    cols = row > 0 if pos[a] >= neg[a] else row < 0
    value = float(both[a])
    if value == 0.0:
        return 0.0, ((1 << k) - 1, (1 << k) - 1)
    b = int(sum(1 << j for j in np.nonzero(cols)[0]))
    return value, (a + 1, b)


def jumble_ratio(u, A, B):
    """``|int_{A x B} u| / sqrt(lam(A) lam(B))`` for class index sets ``A``, ``B``."""
    vals, lam = _stack(u)
    a = np.zeros(lam.size)
    b = np.zeros(lam.size)
    a[list(A)] = 1.0
    b[list(B)] = 1.0
    return _ratio_vec(vals, lam, a, b)


def _ratio_vec(vals, lam, a, b):
    la, lb = float(a @ lam), float(b @ lam)
    if la <= 0 or lb <= 0:
        return 0.0
    num = np.einsum("i,dij,j->d", a * lam, vals, b * lam)
    return float(np.linalg.norm(num) / math.sqrt(la * lb))


def cut_value(u, A, B):
    """``|int_{A x B} u|`` for class index sets."""
    vals, lam = _stack(u)
    a = np.zeros(lam.size)
    b = np.zeros(lam.size)
    a[list(A)] = 1.0
    b[list(B)] = 1.0
    return float(np.linalg.norm(np.einsum("i,dij,j->d", a * lam, vals, b * lam)))


# --------------------------------------------------------------------------
# heuristics
# --------------------------------------------------------------------------


def _best_prefix(v, lam):
    """Best ``|sum_B v| / sqrt(lam(B))`` over prefixes of the ``v / lam`` ordering (both signs)."""
    best, best_set = -1.0, None
    for sign in (1.0, -1.0):
        order = np.argsort(-sign * v / lam, kind="stable")
        cv = np.cumsum(sign * v[order])
        cl = np.cumsum(lam[order])
        scores = cv / np.sqrt(cl)
        i = int(np.argmax(scores))
        if scores[i] > best:
            best = float(scores[i])
            best_set = np.zeros(v.size, dtype=bool)
            best_set[order[: i + 1]] = True
    return best_set


def _heuristic_jumble(vals, lam, seed, restarts):
    d, k, _ = vals.shape
    rng = check_random_state(seed)
    best, best_pair = -1.0, None

    def score(a, b):
        return _ratio_vec(vals, lam, a.astype(float), b.astype(float))

    for _ in range(restarts):
        a = rng.random(k) < 0.5
        b = rng.random(k) < 0.5
        a[rng.integers(k)] = True
        b[rng.integers(k)] = True
        cur = score(a, b)
        while True:
            improved = False
            # prefix best responses (scalar kernels only; a heuristic step)
            if d == 1:
                U = lam[:, None] * vals[0] * lam[None, :]
                for _ in range(2):
                    nb = _best_prefix(a.astype(float) @ U, lam)
                    if score(a, nb) > cur + 1e-15:
                        b, cur, improved = nb, score(a, nb), True
                    na = _best_prefix(U @ b.astype(float), lam)
                    if score(na, b) > cur + 1e-15:
                        a, cur, improved = na, score(na, b), True
            # steepest single-class flip
            flip_best, flip = cur, None
            for side in (0, 1):
                for i in range(k):
                    x, y = a.copy(), b.copy()
                    (x if side == 0 else y)[i] ^= True
                    if not x.any() or not y.any():
                        continue
                    s = score(x, y)
                    if s > flip_best + 1e-15:
                        flip_best, flip = s, (x, y)
            if flip is not None:
                a, b = flip
                cur = flip_best
                improved = True
            if not improved:
                break
        if cur > best:
            best, best_pair = cur, (a.copy(), b.copy())
    A = tuple(int(i) for i in np.nonzero(best_pair[0])[0])
    B = tuple(int(i) for i in np.nonzero(best_pair[1])[0])
    return best, (A, B)


def _heuristic_cut(vals, lam, seed, restarts):
    k = lam.size
    rng = check_random_state(seed)
    U = lam[:, None] * vals[0] * lam[None, :]
    best, best_pair = 0.0, (tuple(range(k)), tuple(range(k)))
    for _ in range(restarts):
        a = rng.random(k) < 0.5
        sign = 1.0 if rng.random() < 0.5 else -1.0
        cur = -1.0
        while True:
            b = sign * (a @ U) > 0
            a = sign * (U @ b) > 0
            val = sign * float(a.astype(float) @ U @ b.astype(float))
            if val <= cur + 1e-15:
                break
            cur = val
        if cur > best:
            best = cur
            best_pair = (tuple(int(i) for i in np.nonzero(a)[0]), tuple(int(i) for i in np.nonzero(b)[0]))
    return best, best_pair


# --------------------------------------------------------------------------
# public norms
# --------------------------------------------------------------------------


def jumble_norm(u, method="auto", seed=0, max_classes=EXACT_MAX_CLASSES, restarts=HEURISTIC_RESTARTS):
    """Jumble norm ``sup_{S,T} |int_{S x T} u| / sqrt(lam(S) lam(T))``.

    ``method="exact"`` enumerates all class-subset pairs and raises above
    ``max_classes``; ``"heuristic"`` runs seeded local search (a lower
    bound); ``"auto"`` picks exact when feasible.
    """
    vals, lam = _stack(u)
    k = lam.size
    if method == "auto":
        method = "exact" if k <= max_classes else "heuristic"
    if method == "exact":
        value, (ma, mb) = _exact_jumble(vals, lam, max_classes)
        return NormResult(value, (_mask_to_set(ma, k), _mask_to_set(mb, k)), "exact")
    if method == "heuristic":
        value, sets = _heuristic_jumble(vals, lam, seed, restarts)
        return NormResult(value, sets, "heuristic")
    raise ValidationError(f"method: expected exact, heuristic or auto, got {method!r}")


def cut_norm(u, method="auto", seed=0, max_classes=EXACT_MAX_CLASSES, restarts=HEURISTIC_RESTARTS):
    """Cut norm ``sup_{S,T} |int_{S x T} u|`` of a real step kernel."""
    vals, lam = _stack(u)
    k = lam.size
    if method == "auto":
        method = "exact" if k <= max_classes else "heuristic"
    if method == "exact":
        value, (ma, mb) = _exact_cut(vals, lam, max_classes)
        return NormResult(value, (_mask_to_set(ma, k), _mask_to_set(mb, k)), "exact")
    if method == "heuristic":
        if vals.shape[0] != 1:
            raise ValidationError("cut_norm is defined for real-valued kernels only")
        value, sets = _heuristic_cut(vals, lam, seed, restarts)
        return NormResult(value, sets, "heuristic")
    raise ValidationError(f"method: expected exact, heuristic or auto, got {method!r}")


def k_functional(measures, values):
    """``K(f) = int_0^inf sqrt(lam{|f| >= t}) dt`` for a one-variable stepfunction."""
    lam = np.asarray(measures, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if lam.shape != v.shape:
        raise ValidationError("k_functional: measures and values differ in length")
    order = np.argsort(-v, kind="stable")
    M = np.cumsum(lam[order])
    root = np.sqrt(M)
    return float(np.sum(v[order] * np.diff(np.concatenate([[0.0], root]))))


def k_functional_constant(p):
    """Constant ``C_p`` with ``K(f) <= C_p ||f||_p`` (valid for ``p > 2``)."""
    if p <= 2:
        raise ValidationError(f"the K-functional bound needs p > 2, got {p}")
    return 2.0 ** (-1.0 / p) * ((p - 1.0) / (p - 2.0)) ** ((p - 1.0) / p)


# --------------------------------------------------------------------------
# inequality reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    """One evaluated inequality ``lhs <= rhs``."""

    name: str
    lhs: float
    rhs: float
    asserted: bool = True
    note: str = ""

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def falsified(self):
        return self.asserted and self.slack < -SLACK_TOL

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "asserted": self.asserted,
            "falsified": self.falsified,
            "note": self.note,
        }


@dataclass(frozen=True)
class BoundReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def ok(self):
        return not any(c.falsified for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def names(self):
        return [c.name for c in self.checks]

    def to_dict(self):
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks]}


def _as_step_vector(f, k, name):
    v = np.asarray(f, dtype=float)
    if v.shape != (k,):
        raise ValidationError(f"{name}: expected {k} step values on the kernel's partition")
    return v


def check_bilinear_bound(u, f, g, method="exact"):
    """Check ``|int u f g| <= 8 ||u||_jumble ||f||_3 ||g||_3`` and the ``4 K(f) K(g)`` form."""
    lam = u.measures
    f = _as_step_vector(f, u.k, "f")
    g = _as_step_vector(g, u.k, "g")
    lhs = abs(float((f * lam) @ u.values @ (g * lam)))
    J = jumble_norm(u, method).value
    cert = method == "exact"
    rhs8 = 8.0 * J * stepfunction_lp(lam, f, 3) * stepfunction_lp(lam, g, 3)
    rhsK = 4.0 * J * k_functional(lam, f) * k_functional(lam, g)
    return BoundReport(
        (
            BoundCheck("bilinear_l3", lhs, rhs8, cert),
            BoundCheck("bilinear_k", lhs, rhsK, cert),
        )
    )


def check_k_functional_bound(measures, values, p):
    """Check ``K(f) <= C_p ||f||_p``."""
    lhs = k_functional(measures, values)
    rhs = k_functional_constant(p) * stepfunction_lp(measures, values, p)
    return BoundCheck(f"k_functional_p{p:g}", lhs, rhs)


def _edge_kernels(edges, u):
    if isinstance(u, StepKernel):
        return [u] * len(edges), True
    u = list(u)
    if len(u) != len(edges):
        raise ValidationError("need one kernel per edge")
    return u, False


def check_counting_bounds(edges, u, w, k=None, method="exact", cap=DEFAULT_CAP):
    """Evaluate the counting-lemma bounds for ``|t(F, u) - t(F, w)|``.

    ``u`` and ``w`` are either single kernels (used on every edge) or lists
    with one kernel per edge.  Reported checks:

    * ``single_edge`` (one edge only): ``|int (u - w)| <= ||u - w||_jumble``
    * ``count_ub`` (single kernels): ``8 l ||u-w||_jumble max(||u||_q, ||w||_q)**(l-1)``, ``q = 3l-3``
    * ``dec_dist``: ``8 sum_a ||u_a - w_a||_jumble prod_{b != a} M_b``
    * ``count_lp``: ``sum_a ||u_a - w_a||_l prod_{b != a} max(||u_b||_l, ||w_b||_l)``
    """
    edges = [tuple(e) for e in edges]
    l = len(edges)
    if l == 0:
        raise ValidationError("counting bounds need at least one edge")
    us, uniform_u = _edge_kernels(edges, u)
    ws, uniform_w = _edge_kernels(edges, w)
    lhs = abs(t_step(edges, us, k, cap) - t_step(edges, ws, k, cap))
    cert = method == "exact"
    q = 3 * l - 3
    diffs = [jumble_norm(a - b, method).value for a, b in zip(us, ws)]
    M = [max(lp_norm_0(a, q), lp_norm_0(b, q)) for a, b in zip(us, ws)]
    checks = []
    if l == 1:
        checks.append(BoundCheck("single_edge", lhs, diffs[0], cert))
    if uniform_u and uniform_w:
        Mu = max(lp_norm_0(us[0], q), lp_norm_0(ws[0], q))
        checks.append(BoundCheck("count_ub", lhs, 8.0 * l * diffs[0] * Mu ** (l - 1), cert))
    dec = 8.0 * sum(diffs[a] * float(np.prod([M[b] for b in range(l) if b != a])) for a in range(l))
    checks.append(BoundCheck("dec_dist", lhs, dec, cert))
    D = [lp_norm(a - b, l) for a, b in zip(us, ws)]
    N = [max(lp_norm(a, l), lp_norm(b, l)) for a, b in zip(us, ws)]
    lp = sum(D[a] * float(np.prod([N[b] for b in range(l) if b != a])) for a in range(l))
    checks.append(BoundCheck("count_lp", lhs, lp, True))
    return BoundReport(tuple(checks))


def mean_decoration_norm(F):
    """Mean Euclidean norm of the edge decorations."""
    return float(np.mean(F.edge_norms())) if F.n_edges else 0.0


def check_graphon_counting_bounds(F, U, W, method="exact", cap=DEFAULT_CAP):
    """Counting-lemma bounds for ``|t(F, U) - t(F, W)|`` with decorated ``F`` and step graphons.

    The graphon-level forms use the product of decoration norms ``Pi_f``
    (scaling correctly in every edge); the variants with the mean
    decoration norm are reported with ``asserted=False``.
    """
    if not isinstance(F, TestGraph):
        raise ValidationError("expected a TestGraph")
    l = F.n_edges
    if l == 0:
        raise ValidationError("counting bounds need at least one edge")
    us = graphon_edge_kernels(F, U)
    ws = graphon_edge_kernels(F, W)
    lhs = abs(t_graphon(F, U, cap) - t_graphon(F, W, cap))
    cert = method == "exact"
    q = 3 * l - 3
    diffs = [jumble_norm(a - b, method).value for a, b in zip(us, ws)]
    M = [max(lp_norm_0(a, q), lp_norm_0(b, q)) for a, b in zip(us, ws)]
    dec2 = 8.0 * sum(diffs[a] * float(np.prod([M[b] for b in range(l) if b != a])) for a in range(l))
    D = U - W
    JD = jumble_norm(D, method).value
    MUW = max(lp_norm_0(U, q), lp_norm_0(W, q))
    pi = F.pi_norm()
    mean = mean_decoration_norm(F)
    LD = lp_norm(D, l)
    LM = max(lp_norm(U, l), lp_norm(W, l))
    checks = (
        BoundCheck("dec_dist_edges", lhs, dec2, cert),
        BoundCheck("dec_dist_graphon", lhs, 8.0 * l * pi * JD * MUW ** (l - 1), cert),
        BoundCheck("count_lp_graphon", lhs, l * pi * LD * LM ** (l - 1), True),
        BoundCheck(
            "dec_dist_graphon_mean_norm", lhs, 8.0 * l * mean * JD * MUW ** (l - 1), False,
            "mean decoration norm in place of the product; not scale invariant",
        ),
        BoundCheck(
            "count_lp_graphon_mean_norm", lhs, l * mean * LD * LM ** (l - 1), False,
            "mean decoration norm in place of the product; not scale invariant",
        ),
    )
    return BoundReport(checks)


def check_inj_bounds(F, G, cap=DEFAULT_CAP):
    """Check ``|t|, |t_inj| <= Pi_f ||g||_l**l`` and ``|t_inj - t| <= k(k-1)/n Pi_f ||g||_l**l``."""
    l = F.n_edges
    t = t_density(F, G, cap)
    ti = t_inj_density(F, G, cap)
    env = F.pi_norm() * (G.norm_p(l) ** l if l else 1.0)
    return BoundReport(
        (
            BoundCheck("hom_envelope", abs(t), env),
            BoundCheck("inj_envelope", abs(ti), env),
            BoundCheck("inj_gap", abs(ti - t), F.k * (F.k - 1) / G.n * env),
        )
    )


def check_holder_bound(edges, kernels, k=None, cap=DEFAULT_CAP):
    """Check ``|t(F, w)| <= prod_ij ||w_ij||_m`` with ``m = |E(F)|``."""
    edges = [tuple(e) for e in edges]
    ks, _ = _edge_kernels(edges, kernels)
    m = len(edges)
    lhs = abs(t_step(edges, ks, k, cap))
    rhs = float(np.prod([lp_norm(K, m) for K in ks])) if m else 1.0
    return BoundCheck("holder", lhs, rhs)
