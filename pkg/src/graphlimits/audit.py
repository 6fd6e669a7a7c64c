"""Randomized inequality audit.

Each family draws seeded random instances and evaluates one inequality
with exact norms.  A falsification is a slack below ``-SLACK_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int, check_random_state
from .core import DecorationSpace, Partition, StepKernel, TargetGraph, TestGraph
from .norms import (
    SLACK_TOL,
    BoundCheck,
    check_bilinear_bound,
    check_counting_bounds,
    check_holder_bound,
    check_inj_bounds,
    check_k_functional_bound,
    jumble_norm,
    lp_norm,
)
from .regularity import lift, stepping, weak_regularity_partition


# --------------------------------------------------------------------------
# random instances
# --------------------------------------------------------------------------


def random_graph_edges(rng, max_nodes, max_edges, min_edges=1):
    """Random simple graph with ``min_edges..max_edges`` edges on at most ``max_nodes`` nodes."""
    while True:
        k = int(rng.integers(2, max_nodes + 1))
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
        hi = min(max_edges, len(pairs))
        if hi < min_edges:
            continue
        l = int(rng.integers(min_edges, hi + 1))
        idx = rng.choice(len(pairs), size=l, replace=False)
        return k, [pairs[i] for i in sorted(idx)]


def random_test_graph(rng, max_nodes=4, max_edges=4, dim=3):
    k, edges = random_graph_edges(rng, max_nodes, max_edges)
    dec = rng.standard_normal((len(edges), dim))
    return TestGraph(k, tuple(edges), dec, DecorationSpace(dim, "indicator"))


def random_target_graph(rng, n, dim=3):
    v = rng.standard_normal((n, n, dim))
    v = (v + np.swapaxes(v, 0, 1)) / 2
    v[np.arange(n), np.arange(n)] = 0.0
    return TargetGraph(v, DecorationSpace(dim, "indicator"))


def random_kernel(rng, k, heavy_tail=None):
    heavy = bool(rng.random() < 0.5) if heavy_tail is None else heavy_tail
    return StepKernel.random(k, rng, heavy_tail=heavy)


def random_labels(rng, k):
    """Random surjective coarsening labels on ``k`` classes."""
    K = int(rng.integers(1, k + 1))
    lab = np.concatenate([np.arange(K), rng.integers(0, K, size=k - K)])
    rng.shuffle(lab)
    _, lab = np.unique(lab, return_inverse=True)
    return lab.astype(np.intp)


# --------------------------------------------------------------------------
# families
# --------------------------------------------------------------------------


def family_inj(rng):
    F = random_test_graph(rng)
    G = random_target_graph(rng, int(rng.integers(F.k, 7)))
    return list(check_inj_bounds(F, G).checks)


def family_bilinear(rng):
    k = int(rng.integers(1, 9))
    u = random_kernel(rng, k)
    f = rng.standard_normal(k) * np.exp(rng.standard_normal(k))
    g = rng.standard_normal(k) * np.exp(rng.standard_normal(k))
    return list(check_bilinear_bound(u, f, g).checks)


def family_k_functional(rng):
    k = int(rng.integers(1, 11))
    lam = rng.dirichlet(np.ones(k))
    v = rng.standard_normal(k) * np.exp(2 * rng.standard_normal(k))
    return [check_k_functional_bound(lam, v, 3), check_k_functional_bound(lam, v, 4)]


def family_counting(rng):
    k_nodes, edges = random_graph_edges(rng, 5, 4)
    k = int(rng.integers(1, 7))
    part = Partition(rng.dirichlet(np.ones(k)))
    u = StepKernel(part, random_kernel(rng, k).values)
    w = StepKernel(part, u.values + rng.uniform(0, 1) * random_kernel(rng, k).values)
    checks = list(check_counting_bounds(edges, u, w, k_nodes).checks)
    us = [StepKernel(part, random_kernel(rng, k).values) for _ in edges]
    ws = [StepKernel(part, a.values + rng.uniform(0, 1) * random_kernel(rng, k).values) for a in us]
    per_edge = check_counting_bounds(edges, us, ws, k_nodes)
    checks += [BoundCheck("edges_" + c.name, c.lhs, c.rhs, c.asserted) for c in per_edge.checks]
    checks.append(check_holder_bound(edges, us, k_nodes))
    return checks


def family_step_contraction(rng):
    k = int(rng.integers(1, 9))
    u = random_kernel(rng, k)
    lab = random_labels(rng, k)
    uP = stepping(u, lab)
    checks = [BoundCheck("jumble_contraction", jumble_norm(uP).value, jumble_norm(u).value)]
    for p in (1, 2, 3, 4):
        checks.append(BoundCheck(f"l{p}_contraction", lp_norm(uP, p), lp_norm(u, p)))
    e2 = lp_norm(u, 2) ** 2
    gap = abs(e2 - lp_norm(uP, 2) ** 2 - lp_norm(u - lift(uP, lab, u.partition), 2) ** 2)
    checks.append(BoundCheck("energy_identity", gap, 1e-9 * max(1.0, e2)))
    return checks


def family_part_ref(rng):
    k = int(rng.integers(1, 9))
    u = random_kernel(rng, k)
    coarse = random_labels(rng, k)
    K = int(coarse.max()) + 1
    vc = rng.standard_normal((K, K))
    v = lift(StepKernel(Partition.from_labels(u.partition, coarse), (vc + vc.T) / 2), coarse, u.partition)
    # any partition whose classes refine the steps of v
    fine = np.array([coarse[i] * k + s for i, s in enumerate(rng.integers(0, 2, size=k))])
    _, fine = np.unique(fine, return_inverse=True)
    uP = lift(stepping(u, fine), fine, u.partition)
    return [BoundCheck("part_ref", jumble_norm(u - uP).value, 2.0 * jumble_norm(u - v).value)]


def family_weak_regularity(rng):
    k = int(rng.integers(2, 9))
    w = random_kernel(rng, k)
    target = int(rng.integers(2, 33))
    res = weak_regularity_partition(w, target)
    return [
        BoundCheck("weak_regularity", res.error, res.bound),
        BoundCheck("class_count", float(res.n_classes), float(max(1, min(target, 4**res.rounds)))),
    ]


FAMILIES = {
    "t_inj": family_inj,
    "bilinear": family_bilinear,
    "k_functional": family_k_functional,
    "counting": family_counting,
    "step_contraction": family_step_contraction,
    "part_ref": family_part_ref,
    "weak_regularity": family_weak_regularity,
}


@dataclass
class FamilyResult:
    instances: int = 0
    checks: int = 0
    falsified: int = 0
    worst_slack: float = math.inf
    worst_check: str = ""
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "instances": self.instances,
            "checks": self.checks,
            "falsified": self.falsified,
            "worst_slack": self.worst_slack,
            "worst_check": self.worst_check,
            "failures": self.failures,
        }


@dataclass(frozen=True)
class AuditReport:
    runs: int
    seed: int
    families: dict

    @property
    def falsifications(self):
        return sum(f.falsified for f in self.families.values())

    @property
    def ok(self):
        return self.falsifications == 0

    def to_dict(self):
        return {
            "runs": self.runs,
            "seed": self.seed,
            "ok": self.ok,
            "falsifications": self.falsifications,
            "slack_tolerance": SLACK_TOL,
            "families": {k: v.to_dict() for k, v in self.families.items()},
        }


def run_audit(runs=100, seed=0, families=None):
    """Run every family ``runs`` times with independent seeded streams."""
    runs = check_positive_int(runs, "runs")
    names = list(FAMILIES) if families is None else list(families)
    out = {}
    for fi, name in enumerate(names):
        fam = FAMILIES[name]
        res = FamilyResult()
        for r in range(runs):
            rng = check_random_state(seed, fi, r)
            for c in fam(rng):
                res.checks += 1
                if c.asserted and c.slack < res.worst_slack:
                    res.worst_slack, res.worst_check = float(c.slack), c.name
                if c.falsified:
                    res.falsified += 1
                    res.failures.append({"run": r, **c.to_dict()})
            res.instances += 1
        out[name] = res
    return AuditReport(runs, seed, out)
