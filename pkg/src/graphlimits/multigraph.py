"""Moment machinery for multigraphs with unbounded multiplicities.

Covers edge-multiplicity distributions, weight functions making a
moment-bounded family smooth, distributions with matching low moments, and
finite-prefix convergence diagnostics in the node and node-and-edge senses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int, check_random_state
from .core import Multigraph, MomentSeq, StepGraphon, WeightFunction, truncate_multigraph
from .density import DEFAULT_CAP, t_moment
from .errors import ValidationError
from .sampling import randomize_multiplicities, sample_w_random


def bond(p):
    """Two nodes joined by ``p`` parallel edges."""
    return Multigraph.from_edges(2, [(0, 1, p)])


def path(*multiplicities):
    """Path whose consecutive edges have the given multiplicities."""
    k = len(multiplicities) + 1
    return Multigraph.from_edges(k, [(i, i + 1, m) for i, m in enumerate(multiplicities)])


# --------------------------------------------------------------------------
# edge multiplicity distributions
# --------------------------------------------------------------------------


def multiplicity_counts(G):
    """``counts[m]`` = number of ordered pairs ``(u, v)`` (diagonal included) with multiplicity ``m``."""
    return np.bincount(G.matrix.ravel(), minlength=1)


def edge_multiplicity_distribution(G, order=4):
    """Multiplicity of a uniformly random ordered node pair, as a MomentSeq with witness."""
    order = check_positive_int(order, "order", minimum=0)
    counts = multiplicity_counts(G)
    return MomentSeq.from_witness(counts / float(G.n) ** 2, order)


def power_sum(G, p):
    """``sum_{u,v} g_uv**p`` in exact integer arithmetic (``n**2 t(B_p, G)``)."""
    counts = multiplicity_counts(G).tolist()
    return sum(c * m**p for m, c in enumerate(counts))


# --------------------------------------------------------------------------
# weight functions
# --------------------------------------------------------------------------


def build_weight_function(c, p_max=3):
    """Weight function certifying smoothness orders ``p <= p_max`` for a moment-bounded family.

    ``c[q]`` bounds the ``q``-th moment of every member.  Thresholds are
    ``s_j = ceil(2**j c[j*j + 1])`` (raised where needed to stay strictly
    increasing and >= 1); ``rho(m) = m**-j`` on ``[s_j, s_{j+1})``.  The
    bound ``c[p*p] + 1`` is recorded for every certified order ``p``.
    """
    c = [float(x) for x in c]
    p_max = check_positive_int(p_max, "p_max")
    need = p_max * p_max + 2
    if len(c) < need:
        raise ValidationError(f"smoothness order {p_max} needs moment bounds c_0..c_{need - 1}, got {len(c)}")
    if any(x < 0 for x in c):
        raise ValidationError("moment bounds must be >= 0")
    J = int(math.isqrt(len(c) - 2))
    thresholds = []
    for j in range(J + 1):
        s = max(1, math.ceil(2.0**j * c[j * j + 1]))
        if thresholds and s <= thresholds[-1]:
            s = thresholds[-1] + 1
        thresholds.append(s)
    certified = {p: c[p * p] + 1.0 for p in range(1, p_max + 1)}
    return WeightFunction(tuple(thresholds), certified)


def moment_bounds(family, max_order):
    """``c[q] = max`` over the family of the ``q``-th moment of the witnesses."""
    out = []
    for q in range(max_order + 1):
        out.append(max(float(np.sum(_witness(mu) * np.arange(_witness(mu).size, dtype=float) ** q)) for mu in family))
    return out


def _witness(mu):
    if isinstance(mu, MomentSeq):
        if mu.witness is None:
            raise ValidationError("family members need witnesses")
        return mu.witness
    return np.asarray(mu, dtype=float)


@dataclass(frozen=True)
class SmoothnessReport:
    """``sums[p]`` = max over the family of ``sum_m mu(m) / rho(m)**p``."""

    sums: dict
    bounds: dict
    tails: dict

    @property
    def violations(self):
        return {p: (s, self.bounds[p]) for p, s in self.sums.items() if p in self.bounds and s > self.bounds[p] * (1 + 1e-12)}

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "sums": {str(p): v for p, v in self.sums.items()},
            "bounds": {str(p): v for p, v in self.bounds.items()},
            "tails": {str(j): v for j, v in self.tails.items()},
            "ok": self.ok,
        }


def rho_smooth_check(family, rho, p_max, bounds=None):
    """Weighted sums ``sum_m mu(m) rho(m)**-p`` for ``p = 1..p_max``.

    ``bounds`` defaults to the bounds certified by ``rho``.  ``tails[j]``
    holds ``max sum_{m >= s_j} m**(j*j) mu(m)`` for the threshold chain.
    """
    family = [_witness(mu) for mu in family]
    bounds = dict(rho.certified if bounds is None else bounds)
    sums = {}
    for p in range(1, p_max + 1):
        best = 0.0
        for w in family:
            m = np.arange(w.size)
            best = max(best, float(np.sum(w / rho(m) ** p)))
        sums[p] = best
    tails = {}
    for j, s in enumerate(rho.thresholds):
        best = 0.0
        for w in family:
            m = np.arange(w.size, dtype=float)
            best = max(best, float(np.sum(np.where(m >= s, m ** (j * j) * w, 0.0))))
        tails[j] = best
    return SmoothnessReport(sums, bounds, tails)


# --------------------------------------------------------------------------
# moment twins
# --------------------------------------------------------------------------


def difference_vector(M, P, shift=0):
    """``delta(m) = -(-1)**(m - shift) C(P+1, m - shift)``: kills moments ``0..P`` on ``{0..M}``."""
    d = np.zeros(M + 1)
    for i in range(P + 2):
        d[shift + i] = -((-1) ** i) * math.comb(P + 1, i)
    return d


def moment_matched_pair(M, P, eps=None, seed=None, base=None, eps_scale=0.75):
    """Two distributions on ``{0..M}`` with equal moments of order ``0..P``.

    ``sigma = base + eps delta`` and ``tau = base - eps delta`` where
    ``delta`` lies in the null space of the moment matrix.  The default
    ``delta`` is the finite-difference vector; with a ``seed`` a random
    combination of its shifts is used.  ``base`` defaults to uniform and
    ``eps`` to 3/4 of the largest value keeping both nonnegative.
    Returned moment vectors run to order ``M``.
    """
    M = check_positive_int(M, "M")
    P = check_positive_int(P, "P", minimum=0)
    if M < P + 1:
        raise ValidationError(f"need M >= P + 1 for a nonzero moment-free direction (M={M}, P={P})")
    base = np.full(M + 1, 1.0 / (M + 1)) if base is None else np.asarray(base, dtype=float)
    if base.shape != (M + 1,) or np.any(base < 0) or abs(base.sum() - 1.0) > 1e-12:
        raise ValidationError("base must be a probability vector on {0..M}")
    if seed is None:
        delta = difference_vector(M, P)
    else:
        rng = check_random_state(seed)
        coef = rng.standard_normal(M - P)
        delta = sum(a * difference_vector(M, P, s) for s, a in enumerate(coef))
        delta = delta / np.max(np.abs(delta))
    nz = delta != 0
    eps_max = float(np.min(base[nz] / np.abs(delta[nz])))
    if eps is None:
        if not 0 < eps_scale <= 1:
            raise ValidationError(f"eps_scale must lie in (0, 1], got {eps_scale}")
        eps = eps_scale * eps_max
    if not 0 < eps <= eps_max:
        raise ValidationError(f"eps={eps} infeasible: both distributions stay nonnegative only for 0 < eps <= {eps_max}")
    sigma = base + eps * delta
    tau = base - eps * delta
    sigma[sigma < 0] = 0.0
    tau[tau < 0] = 0.0
    return MomentSeq.from_witness(sigma, M), MomentSeq.from_witness(tau, M)


def first_differing_order(a, b, rtol=1e-10):
    """Smallest order at which two moment vectors differ, or ``None``."""
    for p, (x, y) in enumerate(zip(a.moments, b.moments)):
        if abs(x - y) > rtol * max(1.0, abs(x), abs(y)):
            return p
    return None


# --------------------------------------------------------------------------
# convergence diagnostics
# --------------------------------------------------------------------------


def _label(F):
    return "F(" + ";".join(f"{u}-{v}x{m}" for u, v, m in F.edges()) + f")n{F.n}"


def cauchy_oscillation(values, tail_start):
    tail = np.asarray(values[tail_start:], dtype=float)
    return float(tail.max() - tail.min()) if tail.size else 0.0


@dataclass(frozen=True)
class ConvergenceDiagnosis:
    """Finite-prefix convergence verdicts.

    ``node_edge`` maps test-graph labels to node-and-edge density
    sequences; ``truncated[t]`` maps labels to densities in the truncated
    graphs ``G^(t)`` for the level-``t`` battery.  A family is called
    Cauchy when every sequence oscillates by at most ``eps`` over the tail
    (indices ``tail_start`` onward); no limit is claimed.
    """

    node_edge: dict
    truncated: dict
    oscillation_node_edge: dict
    oscillation_truncated: dict
    bonds: dict
    eps: float
    tail_start: int
    prefix_length: int

    @property
    def node_edge_cauchy(self):
        return all(v <= self.eps for v in self.oscillation_node_edge.values())

    def truncated_cauchy(self, t):
        return all(v <= self.eps for v in self.oscillation_truncated[t].values())

    @property
    def node_cauchy(self):
        return all(self.truncated_cauchy(t) for t in self.truncated)

    @property
    def label(self):
        ne, nd = self.node_edge_cauchy, self.node_cauchy
        if ne and nd:
            return "both"
        if ne:
            return "node_edge_conv"
        if nd:
            return "node_conv"
        return "neither"

    def to_dict(self):
        return {
            "label": self.label,
            "eps": self.eps,
            "prefix_length": self.prefix_length,
            "tail_start": self.tail_start,
            "node_edge_cauchy": self.node_edge_cauchy,
            "node_cauchy": self.node_cauchy,
            "truncated_cauchy": {str(t): self.truncated_cauchy(t) for t in self.truncated},
            "node_edge": self.node_edge,
            "truncated": {str(t): v for t, v in self.truncated.items()},
            "oscillation_node_edge": self.oscillation_node_edge,
            "oscillation_truncated": {str(t): v for t, v in self.oscillation_truncated.items()},
            "bond_densities": {str(p): v for p, v in self.bonds.items()},
            "bond_max": {str(p): max(v) for p, v in self.bonds.items()},
        }


def diagnose_convergence(sequence, battery, t_max, eps, tail_fraction=0.5, bond_orders=None, cap=DEFAULT_CAP):
    """Cauchy verdicts for node-and-edge and truncated (node-sense) batteries.

    The level-``t`` battery holds the bonds ``B_1..B_t`` and every battery
    graph with multiplicities at most ``t``; it is evaluated on the
    truncations ``G^(t)``.  ``bonds[p]`` reports ``t(B_p, G_n)`` for
    ``p`` in ``bond_orders`` (default ``1..max(t_max, max battery multiplicity)``).
    """
    seq = list(sequence)
    if not seq:
        raise ValidationError("empty sequence")
    t_max = check_positive_int(t_max, "t_max")
    if not eps > 0:
        raise ValidationError("eps must be > 0")
    battery = list(battery)
    tail_start = min(len(seq) - 1, int(math.floor(len(seq) * tail_fraction)))
    labels = [_label(F) for F in battery]
    node_edge = {lab: [t_moment(F, G, cap) for G in seq] for lab, F in zip(labels, battery)}
    truncated = {}
    for t in range(1, t_max + 1):
        level = {f"B{p}": bond(p) for p in range(1, t + 1)}
        level.update({lab: F for lab, F in zip(labels, battery) if F.max_multiplicity() <= t})
        trunc = [truncate_multigraph(G, t) for G in seq]
        truncated[t] = {lab: [t_moment(F, H, cap) for H in trunc] for lab, F in level.items()}
    if bond_orders is None:
        top = max([t_max] + [F.max_multiplicity() for F in battery])
        bond_orders = range(1, top + 1)
    bonds = {p: [power_sum(G, p) / G.n**2 for G in seq] for p in bond_orders}
    return ConvergenceDiagnosis(
        node_edge=node_edge,
        truncated=truncated,
        oscillation_node_edge={k: cauchy_oscillation(v, tail_start) for k, v in node_edge.items()},
        oscillation_truncated={
            t: {k: cauchy_oscillation(v, tail_start) for k, v in d.items()} for t, d in truncated.items()
        },
        bonds=bonds,
        eps=float(eps),
        tail_start=tail_start,
        prefix_length=len(seq),
    )


# --------------------------------------------------------------------------
# example sequences
# --------------------------------------------------------------------------


def thin_sequence(ns, densities=(0.2, 0.4), seed=0):
    """Multigraphs with about ``c_n n**2 / 2`` parallel edges on about ``n**1.5 / 2`` pairs.

    ``c_n`` cycles through ``densities``.  Edge density oscillates while the
    simple graphs underneath become sparse, so only the node sense converges.
    """
    out = []
    for i, n in enumerate(ns):
        n = check_positive_int(n, "n", minimum=2)
        rng = check_random_state(seed, n, i)
        c = densities[i % len(densities)]
        n_pairs = n * (n - 1) // 2
        q = max(1, min(n_pairs, round(n**1.5 / 2)))
        total = round(c * n * n / 2)
        chosen = np.sort(rng.choice(n_pairs, size=q, replace=False))
        mult = np.full(q, total // q, dtype=np.int64)
        mult[: total % q] += 1
        iu, iv = np.triu_indices(n, 1)
        g = np.zeros((n, n), dtype=np.int64)
        g[iu[chosen], iv[chosen]] = mult
        g[iv[chosen], iu[chosen]] = mult
        out.append(Multigraph(g))
    return out


def twin_sequence(sigma, tau, ns, seed=0):
    """Randomized W-random multigraphs alternating between two constant graphons.

    Even positions use the witness of ``sigma``, odd positions that of ``tau``.
    """
    Ws = [StepGraphon.constant(s.moments, s.witness) for s in (sigma, tau)]
    out = []
    for i, n in enumerate(ns):
        rng = check_random_state(seed, n, i)
        G = sample_w_random(n, Ws[i % 2], rng)
        out.append(randomize_multiplicities(G, rng))
    return out
