"""Domain types: partitions, step kernels, decorated graphs, multigraphs and moments.

Every type is an immutable dataclass backed by read-only numpy arrays.
Partitions of [0, 1] are interval partitions: class ``i`` is the interval
``[b_i, b_{i+1})`` where ``b`` are the cumulative measures.  That makes
common refinements and alignment checks computable from the measures alone.

Decorations live in a finite-dimensional space ``B`` with a chosen basis.
A test-graph decoration is the coordinate vector ``c`` of ``f = sum c_i b_i``;
a target decoration ``z`` is stored by its dual coordinates
``z_i = <b_i, z>``, so the pairing ``<f, z>`` is the dot product ``c . z``.
In the monomial basis the dual coordinates of a distribution on the
integers are exactly its moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    check_measures,
    check_positive_int,
    check_probability_vector,
    check_square,
    check_symmetric,
    frozen_array,
)
from .errors import ValidationError

BASES = ("monomial", "indicator", "cumulative", "custom")
BREAKPOINT_TOL = 1e-12
WITNESS_RTOL = 1e-9


# --------------------------------------------------------------------------
# partitions and step kernels
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Partition:
    """Interval partition of [0, 1] given by its ordered class measures."""

    measures: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "measures", check_measures(self.measures))

    @classmethod
    def uniform(cls, k):
        k = check_positive_int(k, "k")
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def from_labels(cls, ground, labels):
        """Partition whose class ``c`` has the total measure of ``labels == c``."""
        labels = check_labels(labels, len(ground))
        return cls(np.bincount(labels, weights=ground.measures))

    def __len__(self):
        return self.measures.size

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.measures, other.measures)

    def __hash__(self):
        return hash(self.measures.tobytes())

    @property
    def breakpoints(self):
        """Cumulative measures ``0 = b_0 < b_1 < ... < b_k = 1``."""
        b = np.concatenate([[0.0], np.cumsum(self.measures)])
        b[-1] = 1.0
        return b

    def locate(self, x):
        """Class index of each point ``x`` in [0, 1)."""
        idx = np.searchsorted(self.breakpoints[1:-1], np.asarray(x), side="right")
        return idx

    def to_dict(self):
        return {"measures": self.measures.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["measures"])


def check_labels(labels, k):
    """Validate a ground-class -> coarse-class map; coarse classes must be 0..K-1, all used."""
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size != k or lab.dtype.kind not in "iu":
        raise ValidationError(f"labels: expected {k} integer class labels")
    if lab.size and (lab.min() < 0 or set(np.unique(lab)) != set(range(int(lab.max()) + 1))):
        raise ValidationError("labels: classes must be numbered 0..K-1 with none empty")
    return lab.astype(np.intp)


def canonical_labels(keys):
    """Relabel arbitrary hashable per-class keys as 0, 1, ... in order of first appearance."""
    seen = {}
    out = np.empty(len(keys), dtype=np.intp)
    for i, key in enumerate(keys):
        out[i] = seen.setdefault(key, len(seen))
    return out


def common_refinement(*partitions):
    """Common refinement of interval partitions.

    Returns the refined partition and, for each input, the map from refined
    classes to that input's classes.
    """
    if not partitions:
        raise ValidationError("common_refinement needs at least one partition")
    cuts = np.sort(np.concatenate([p.breakpoints[1:-1] for p in partitions]))
    merged = [0.0]
    for c in cuts:
        if c - merged[-1] > BREAKPOINT_TOL:
            merged.append(float(c))
    if 1.0 - merged[-1] <= BREAKPOINT_TOL:
        merged.pop()
    bps = np.array(merged + [1.0])
    fine = Partition(np.diff(bps))
    mids = (bps[:-1] + bps[1:]) / 2
    maps = [p.locate(mids) for p in partitions]
    return fine, maps


@dataclass(frozen=True, eq=False)
class StepKernel:
    """Real stepfunction on [0,1]^2 with steps ``partition x partition``.

    ``values[i, j]`` is the constant value on ``S_i x S_j``.  Kernels are
    symmetric unless built with ``symmetric=False`` (the greedy regularity
    residuals are the only asymmetric kernels the library produces).
    """

    partition: Partition
    values: np.ndarray
    symmetric: bool = True

    def __post_init__(self):
        if not isinstance(self.partition, Partition):
            object.__setattr__(self, "partition", Partition(self.partition))
        v = frozen_array(self.values, ndim=2, name="values")
        check_square(v, "values")
        if v.shape[0] != len(self.partition):
            raise ValidationError(
                f"values: shape {v.shape} does not match {len(self.partition)} partition classes"
            )
        if self.symmetric:
            check_symmetric(v, "values")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, c, partition=None):
        partition = partition or Partition.uniform(1)
        k = len(partition)
        return cls(partition, np.full((k, k), float(c)))

    @classmethod
    def from_values(cls, values, measures=None):
        v = np.asarray(values, dtype=float)
        measures = np.full(v.shape[0], 1.0 / v.shape[0]) if measures is None else measures
        return cls(Partition(measures), v)

    @classmethod
    def random(cls, k, rng, scale=1.0, measures="dirichlet", heavy_tail=False):
        """Random symmetric kernel, for property tests and audits."""
        if measures == "dirichlet":
            lam = rng.dirichlet(np.ones(k))
            lam = lam / lam.sum()
            lam = np.maximum(lam, 1e-6)
            lam = lam / lam.sum()
        else:
            lam = np.full(k, 1.0 / k)
        a = rng.standard_normal((k, k))
        if heavy_tail:
            a = a * np.exp(rng.standard_normal((k, k)))
        a = scale * (a + a.T) / 2
        return cls(Partition(lam), a)

    @property
    def k(self):
        return len(self.partition)

    @property
    def measures(self):
        return self.partition.measures

    def weighted(self):
        """Block masses ``lambda_i lambda_j values_ij``."""
        lam = self.measures
        return lam[:, None] * self.values * lam[None, :]

    def integral(self):
        return float(self.weighted().sum())

    def refine(self, fine, index_map):
        """Same function expressed on a finer interval partition."""
        return StepKernel(fine, self.values[np.ix_(index_map, index_map)], self.symmetric)

    def _binary(self, other, op):
        if isinstance(other, StepKernel):
            sym = self.symmetric and other.symmetric
            if self.partition == other.partition:
                return StepKernel(self.partition, op(self.values, other.values), sym)
            fine, (ma, mb) = common_refinement(self.partition, other.partition)
            return StepKernel(fine, op(self.values[np.ix_(ma, ma)], other.values[np.ix_(mb, mb)]), sym)
        return StepKernel(self.partition, op(self.values, float(other)), self.symmetric)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        return StepKernel(self.partition, self.values * float(c), self.symmetric)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __eq__(self, other):
        return (
            isinstance(other, StepKernel)
            and self.partition == other.partition
            and np.array_equal(self.values, other.values)
        )

    def to_dict(self):
        return {"measures": self.measures.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(Partition(d["measures"]), d["values"])


# --------------------------------------------------------------------------
# decoration spaces and decorated graphs
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DecorationSpace:
    """Finite-dimensional decoration space ``B = R^dim`` with a named basis.

    Bases are expressed against the indicator basis of functions on
    ``{0, ..., dim-1}``: row ``i`` of :meth:`matrix` holds the values of
    basis function ``b_i``.

    * ``monomial``: ``b_p(m) = m**p`` (node-and-edge counting)
    * ``indicator``: ``b_i(m) = [m == i]`` (multiplicity-preserving counting)
    * ``cumulative``: ``b_i = e_0 + ... + e_i``, i.e. ``b_i(m) = [m <= i]``
    * ``custom``: user supplied invertible ``transform``
    """

    dim: int
    basis: str = "monomial"
    transform: np.ndarray | None = None

    def __post_init__(self):
        check_positive_int(self.dim, "dim")
        if self.basis not in BASES:
            raise ValidationError(f"basis: expected one of {BASES}, got {self.basis!r}")
        if self.basis == "custom":
            if self.transform is None:
                raise ValidationError("custom basis requires a transform matrix")
            t = frozen_array(self.transform, ndim=2, name="transform")
            if t.shape != (self.dim, self.dim):
                raise ValidationError(f"transform: expected shape {(self.dim, self.dim)}, got {t.shape}")
            if abs(np.linalg.det(t)) == 0.0 or np.linalg.matrix_rank(t) < self.dim:
                raise ValidationError("transform: matrix is singular")
            object.__setattr__(self, "transform", t)
        elif self.transform is not None:
            raise ValidationError(f"transform only allowed for custom bases, not {self.basis!r}")

    def matrix(self):
        d = self.dim
        if self.basis == "monomial":
            m = np.arange(d, dtype=float)
            return m[None, :] ** np.arange(d)[:, None]
        if self.basis == "indicator":
            return np.eye(d)
        if self.basis == "cumulative":
            return np.tril(np.ones((d, d)))
        return np.array(self.transform)

    def null_decoration(self, moment_mode=False):
        """Decoration of the diagonal: zero vector, or point mass at 0 in moment mode."""
        if not moment_mode:
            return np.zeros(self.dim)
        # dual coordinates of the point mass at multiplicity 0
        return self.matrix()[:, 0].copy()

    def __eq__(self, other):
        if not isinstance(other, DecorationSpace):
            return NotImplemented
        if (self.dim, self.basis) != (other.dim, other.basis):
            return False
        return self.basis != "custom" or np.array_equal(self.transform, other.transform)

    def __hash__(self):
        return hash((self.dim, self.basis))

    def to_dict(self):
        d = {"dim": self.dim, "basis": self.basis}
        if self.basis == "custom":
            d["transform"] = self.transform.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["dim"]), d.get("basis", "monomial"), d.get("transform"))


def threshold_space(dim):
    """Custom basis ``b_i(m) = [m >= i]``; its homomorphism numbers count node-homomorphisms."""
    return DecorationSpace(dim, "custom", np.triu(np.ones((dim, dim))))


@dataclass(frozen=True, eq=False)
class TestGraph:
    """Simple graph on ``k`` nodes whose edges carry vectors of a decoration space."""

    __test__ = False  # not a pytest class

    k: int
    edges: tuple
    decorations: np.ndarray
    space: DecorationSpace

    def __post_init__(self):
        check_positive_int(self.k, "k")
        edges = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValidationError(f"edges: loop at node {i} not allowed")
            if not (0 <= i < self.k and 0 <= j < self.k):
                raise ValidationError(f"edges: ({i}, {j}) out of range for k={self.k}")
            edges.append((min(i, j), max(i, j)))
        if len(set(edges)) != len(edges):
            raise ValidationError("edges: repeated pair (underlying graph must be simple)")
        if edges:
            dec = frozen_array(self.decorations, name="decorations")
            if dec.ndim != 2 or dec.shape != (len(edges), self.space.dim):
                raise ValidationError(
                    f"decorations: expected shape ({len(edges)}, {self.space.dim}), got {dec.shape}"
                )
        else:
            dec = frozen_array(np.zeros((0, self.space.dim)))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "decorations", dec)

    @classmethod
    def from_edges(cls, k, edges, space):
        """Build from ``[(i, j, vector), ...]``."""
        edges = list(edges)
        return cls(k, tuple((i, j) for i, j, _ in edges), [v for _, _, v in edges], space)

    @classmethod
    def simple(cls, k, edges, space=None):
        """Simple test graph with every edge decorated by the basis vector ``b_1``."""
        space = space or DecorationSpace(2, "monomial")
        unit = np.zeros(space.dim)
        unit[1] = 1.0
        return cls(k, tuple(edges), [unit] * len(edges), space)

    @property
    def n_edges(self):
        return len(self.edges)

    def edge_norms(self):
        return np.linalg.norm(self.decorations, axis=1)

    def pi_norm(self):
        """Product of the Euclidean norms of the edge decorations."""
        return float(np.prod(self.edge_norms()))

    def norm_p(self, p):
        if not self.n_edges:
            return 0.0
        return float(np.mean(self.edge_norms() ** p) ** (1.0 / p))

    def with_decoration(self, index, vector):
        dec = np.array(self.decorations)
        dec[index] = vector
        return TestGraph(self.k, self.edges, dec, self.space)

    def to_dict(self):
        return {
            "k": self.k,
            "space": self.space.to_dict(),
            "edges": [[i, j, v.tolist()] for (i, j), v in zip(self.edges, self.decorations)],
        }

    @classmethod
    def from_dict(cls, d):
        space = DecorationSpace.from_dict(d["space"])
        return cls.from_edges(int(d["k"]), [(e[0], e[1], e[2]) for e in d["edges"]], space)


@dataclass(frozen=True, eq=False)
class TargetGraph:
    """Complete graph on ``n`` nodes with symmetric decoration table ``values[u, v, :]``.

    ``moment_mode`` marks multigraph-style targets whose decorations are
    moment vectors in the monomial basis; their diagonal is the point mass at
    zero multiplicity instead of the zero vector.  ``witnesses[u, v, m]``
    optionally holds a probability distribution on ``{0..M}`` realizing each
    decoration.
    """

    values: np.ndarray
    space: DecorationSpace
    moment_mode: bool = False
    witnesses: np.ndarray | None = None

    def __post_init__(self):
        v = frozen_array(self.values, ndim=3, name="values")
        n = v.shape[0]
        if v.shape[1] != n or v.shape[2] != self.space.dim:
            raise ValidationError(f"values: expected shape (n, n, {self.space.dim}), got {v.shape}")
        check_symmetric(v, "values")
        null = self.space.null_decoration(self.moment_mode)
        if n and not np.array_equal(v[np.arange(n), np.arange(n)], np.broadcast_to(null, (n, self.space.dim))):
            raise ValidationError("values: diagonal must carry the null decoration")
        object.__setattr__(self, "values", v)
        if self.witnesses is not None:
            w = check_probability_vector(self.witnesses, "witnesses")
            if w.ndim != 3 or w.shape[:2] != (n, n):
                raise ValidationError("witnesses: expected shape (n, n, M+1)")
            check_symmetric(w, "witnesses")
            check_moments_match(w @ dual_matrix(self.space, w.shape[2]), v, "witnesses")
            object.__setattr__(self, "witnesses", w)

    @property
    def n(self):
        return self.values.shape[0]

    def norm_p(self, p):
        """``(mean over unordered pairs u<v of ||g_uv||^p)^(1/p)`` with Euclidean ``||.||``."""
        n = self.n
        if n < 2:
            return 0.0
        iu = np.triu_indices(n, 1)
        norms = np.linalg.norm(self.values[iu], axis=1)
        return float(np.mean(norms**p) ** (1.0 / p))

    def moment_seq(self, u, v):
        w = None if self.witnesses is None else self.witnesses[u, v]
        return MomentSeq(self.values[u, v], w)

    def to_dict(self):
        n = self.n
        d = {
            "n": n,
            "space": self.space.to_dict(),
            "moment_mode": self.moment_mode,
            "decorations": [[u, v, self.values[u, v].tolist()] for u in range(n) for v in range(u + 1, n)],
        }
        if self.witnesses is not None:
            d["witnesses"] = [[u, v, self.witnesses[u, v].tolist()] for u in range(n) for v in range(u + 1, n)]
        return d

    @classmethod
    def from_dict(cls, d):
        space = DecorationSpace.from_dict(d["space"])
        n = int(d["n"])
        mode = bool(d.get("moment_mode", False))
        values = np.zeros((n, n, space.dim))
        values[np.arange(n), np.arange(n)] = space.null_decoration(mode)
        for u, v, vec in d["decorations"]:
            values[u, v] = values[v, u] = vec
        witnesses = None
        if d.get("witnesses") is not None:
            entries = d["witnesses"]
            size = len(entries[0][2]) if entries else 1
            witnesses = np.zeros((n, n, size))
            witnesses[np.arange(n), np.arange(n), 0] = 1.0
            for u, v, w in entries:
                witnesses[u, v] = witnesses[v, u] = w
        return cls(values, space, mode, witnesses)


# --------------------------------------------------------------------------
# multigraphs and moments
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Loopless multigraph as a symmetric nonnegative integer multiplicity matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = frozen_array(self.matrix, dtype=np.int64, ndim=2, name="matrix")
        check_square(m, "matrix")
        check_symmetric(m, "matrix")
        if np.any(m < 0):
            raise ValidationError("matrix: multiplicities must be >= 0")
        if np.any(np.diag(m) != 0):
            raise ValidationError("matrix: diagonal must be zero (no loops)")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_edges(cls, n, edges):
        """Build from ``[(u, v, multiplicity), ...]``; repeated pairs accumulate."""
        n = check_positive_int(n, "n")
        m = np.zeros((n, n), dtype=np.int64)
        for u, v, mult in edges:
            u, v, mult = int(u), int(v), int(mult)
            if u == v:
                raise ValidationError(f"edges: loop at node {u} not allowed")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edges: ({u}, {v}) out of range for n={n}")
            if mult < 0:
                raise ValidationError("edges: multiplicity must be >= 0")
            m[u, v] += mult
            m[v, u] += mult
        return cls(m)

    @property
    def n(self):
        return self.matrix.shape[0]

    def edges(self):
        """``[(u, v, multiplicity)]`` for ``u < v`` with positive multiplicity."""
        iu, iv = np.nonzero(np.triu(self.matrix, 1))
        return [(int(u), int(v), int(self.matrix[u, v])) for u, v in zip(iu, iv)]

    def max_multiplicity(self):
        return int(self.matrix.max()) if self.matrix.size else 0

    def __eq__(self, other):
        return isinstance(other, Multigraph) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def to_dict(self):
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_dict(cls, d):
        return cls.from_edges(int(d["n"]), d["edges"])


def _power_matrix(support_size, order_count):
    """``V[m, p] = m**p`` for ``m < support_size``, ``p < order_count`` (``0**0 = 1``)."""
    m = np.arange(support_size, dtype=float)
    return m[:, None] ** np.arange(order_count)[None, :]


def dual_matrix(space, support_size):
    """``A[m, i] = b_i(m)``: maps a distribution on ``{0..M}`` to its dual coordinates."""
    if space.basis == "monomial":
        return _power_matrix(support_size, space.dim)
    if support_size > space.dim:
        raise ValidationError(
            f"witness support {support_size} exceeds the {space.basis} basis domain of size {space.dim}"
        )
    return space.matrix().T[:support_size]


def check_moments_match(moments, expected, name):
    tol = WITNESS_RTOL * np.maximum(1.0, np.abs(moments))
    if np.any(np.abs(moments - expected) > tol):
        raise ValidationError(f"{name}: moments disagree with the stored decoration")


@dataclass(frozen=True, eq=False)
class MomentSeq:
    """Truncated moment vector ``(a_0, ..., a_P)`` with an optional witness distribution."""

    moments: np.ndarray
    witness: np.ndarray | None = None
    probability: bool = True

    def __post_init__(self):
        a = frozen_array(self.moments, ndim=1, name="moments")
        object.__setattr__(self, "moments", a)
        if self.witness is not None:
            w = check_probability_vector(np.asarray(self.witness, dtype=float).ravel(), "witness")
            check_moments_match(w @ _power_matrix(w.size, a.size), a, "witness")
            object.__setattr__(self, "witness", w)
        if self.probability and a.size and abs(a[0] - 1.0) > WITNESS_RTOL:
            raise ValidationError("moments: a_0 must be 1 for a probability moment sequence")

    @classmethod
    def from_witness(cls, witness, order):
        w = np.asarray(witness, dtype=float)
        return cls(w @ _power_matrix(w.size, order + 1), w)

    @classmethod
    def point_mass(cls, m, order):
        w = np.zeros(m + 1)
        w[m] = 1.0
        return cls(np.array([float(m) ** p for p in range(order + 1)]), w)

    @property
    def order(self):
        return self.moments.size - 1

    def __eq__(self, other):
        if not isinstance(other, MomentSeq) or not np.array_equal(self.moments, other.moments):
            return False
        if (self.witness is None) != (other.witness is None):
            return False
        return self.witness is None or np.array_equal(self.witness, other.witness)

    def to_dict(self):
        d = {"moments": self.moments.tolist()}
        if self.witness is not None:
            d["witness"] = self.witness.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["moments"], d.get("witness"), d.get("probability", True))


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Decorated stepfunction graphon stored by its moment-function family.

    ``values[m]`` is the step kernel ``<b_m, W>`` for basis function ``b_m``
    of ``space``; in the monomial basis these are the moment kernels
    ``W_0, W_1, ...``.  ``witnesses[i, j, :]`` optionally gives a
    distribution on ``{0..M}`` realizing block ``(i, j)``.
    """

    partition: Partition
    values: np.ndarray
    space: DecorationSpace
    witnesses: np.ndarray | None = None

    def __post_init__(self):
        if not isinstance(self.partition, Partition):
            object.__setattr__(self, "partition", Partition(self.partition))
        v = frozen_array(self.values, ndim=3, name="kernels")
        k = len(self.partition)
        if v.shape[1:] != (k, k) or v.shape[0] != self.space.dim:
            raise ValidationError(
                f"kernels: expected shape ({self.space.dim}, {k}, {k}), got {v.shape}"
            )
        if not np.array_equal(v, np.swapaxes(v, 1, 2)):
            raise ValidationError("kernels: every moment kernel must be exactly symmetric")
        object.__setattr__(self, "values", v)
        if self.witnesses is not None:
            w = check_probability_vector(self.witnesses, "witnesses")
            if w.ndim != 3 or w.shape[:2] != (k, k):
                raise ValidationError("witnesses: expected shape (k, k, M+1)")
            check_symmetric(w, "witnesses")
            check_moments_match(w @ dual_matrix(self.space, w.shape[2]), np.moveaxis(v, 0, -1), "witnesses")
            object.__setattr__(self, "witnesses", w)

    @classmethod
    def from_kernels(cls, kernels, basis="monomial", witnesses=None):
        kernels = list(kernels)
        part = kernels[0].partition
        if any(K.partition != part for K in kernels):
            raise ValidationError("kernels: all moment kernels must share one partition")
        return cls(part, np.stack([K.values for K in kernels]), DecorationSpace(len(kernels), basis), witnesses)

    @classmethod
    def from_witnesses(cls, partition, witnesses, order):
        """Monomial-basis graphon whose block moments come from block distributions."""
        w = np.asarray(witnesses, dtype=float)
        mom = w @ _power_matrix(w.shape[2], order + 1)
        return cls(partition, np.moveaxis(mom, -1, 0), DecorationSpace(order + 1, "monomial"), w)

    @classmethod
    def constant(cls, moments, witness=None):
        """One-class graphon with the same decoration everywhere."""
        a = np.asarray(moments, dtype=float)
        w = None if witness is None else np.asarray(witness, dtype=float)[None, None, :]
        return cls(Partition.uniform(1), a[:, None, None], DecorationSpace(a.size, "monomial"), w)

    @property
    def k(self):
        return len(self.partition)

    @property
    def dim(self):
        return self.space.dim

    @property
    def moment_kernels(self):
        return [StepKernel(self.partition, v) for v in self.values]

    def pointwise_norm(self):
        """Step kernel of the Euclidean norms ``||W(x, y)||``."""
        return StepKernel(self.partition, np.linalg.norm(self.values, axis=0))

    def __sub__(self, other):
        if self.space != other.space:
            raise ValidationError("cannot subtract graphons over different decoration spaces")
        if self.partition == other.partition:
            return StepGraphon(self.partition, self.values - other.values, self.space)
        fine, (ma, mb) = common_refinement(self.partition, other.partition)
        return StepGraphon(
            fine, self.values[:, ma][:, :, ma] - other.values[:, mb][:, :, mb], self.space
        )

    def to_dict(self):
        d = {
            "measures": self.partition.measures.tolist(),
            "kernels": self.values.tolist(),
            "basis": self.space.basis,
        }
        if self.space.basis == "custom":
            d["transform"] = self.space.transform.tolist()
        if self.witnesses is not None:
            d["witnesses"] = self.witnesses.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        v = np.asarray(d["kernels"], dtype=float)
        space = DecorationSpace(v.shape[0], d.get("basis", "monomial"), d.get("transform"))
        return cls(Partition(d["measures"]), v, space, d.get("witnesses"))


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Weight ``rho(m) = m**(-j)`` for ``s_j <= m < s_{j+1}`` and ``rho(m) = 1`` below ``s_0``.

    ``certified`` maps a smoothness order ``p`` to the bound on
    ``sum_m mu(m) / rho(m)**p`` that the construction guarantees.
    """

    thresholds: tuple
    certified: dict = field(default_factory=dict)

    def __post_init__(self):
        t = tuple(int(s) for s in self.thresholds)
        if not t or any(b <= a for a, b in zip(t, t[1:])) or t[0] < 1:
            raise ValidationError("thresholds: need positive, strictly increasing integers")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "certified", {int(p): float(b) for p, b in self.certified.items()})

    def exponent(self, m):
        """The ``j`` with ``s_j <= m < s_{j+1}`` (0 below ``s_0``)."""
        m = np.asarray(m)
        j = np.searchsorted(np.array(self.thresholds), m, side="right") - 1
        return np.maximum(j, 0)

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        j = self.exponent(m)
        with np.errstate(divide="ignore"):
            out = np.where(m >= 1, m ** (-j.astype(float)), 1.0)
        return out

    def to_dict(self):
        return {"thresholds": list(self.thresholds), "certified": {str(p): b for p, b in self.certified.items()}}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["thresholds"]), {int(p): b for p, b in d.get("certified", {}).items()})


# --------------------------------------------------------------------------
# encodings and basis changes
# --------------------------------------------------------------------------


def encode_test_multigraph(F, max_degree):
    """Decorate each edge of multiplicity ``m`` by the monomial ``X**m``."""
    P = check_positive_int(max_degree, "max_degree", minimum=0)
    top = F.max_multiplicity()
    if top > P:
        raise ValidationError(f"multiplicity {top} exceeds max_degree {P}")
    space = DecorationSpace(P + 1, "monomial")
    edges = []
    for u, v, mult in F.edges():
        vec = np.zeros(P + 1)
        vec[mult] = 1.0
        edges.append((u, v, vec))
    return TestGraph.from_edges(F.n, edges, space)


def encode_target_multigraph(G, order):
    """Decorate each pair by the point mass at its multiplicity (moment vector up to ``order``)."""
    P = check_positive_int(order, "order", minimum=0)
    g = G.matrix
    powers = g[..., None].astype(float) ** np.arange(P + 1)
    n = G.n
    powers[np.arange(n), np.arange(n)] = DecorationSpace(P + 1).null_decoration(True)
    support = G.max_multiplicity() + 1
    witnesses = np.zeros((n, n, support))
    np.put_along_axis(witnesses, g[..., None], 1.0, axis=2)
    return TargetGraph(powers, DecorationSpace(P + 1, "monomial"), True, witnesses)


def _as_space(target, dim):
    if isinstance(target, DecorationSpace):
        if target.dim != dim:
            raise ValidationError(f"target basis has dim {target.dim}, expected {dim}")
        return target
    return DecorationSpace(dim, target)


def basis_transform(source, target):
    """Matrix mapping coordinates in ``source`` to coordinates in ``target``."""
    if source.dim != target.dim:
        raise ValidationError("basis_transform: dimensions differ")
    return np.linalg.solve(target.matrix().T, source.matrix().T)


def change_basis(F, target_basis):
    """Re-express the edge decorations of a test graph in another basis."""
    space = _as_space(target_basis, F.space.dim)
    T = basis_transform(F.space, space)
    return TestGraph(F.k, F.edges, F.decorations @ T.T, space)


def change_target_basis(G, target_basis):
    """Contragradient change for target decorations, preserving every pairing."""
    space = _as_space(target_basis, G.space.dim)
    # dual coordinates transform by R_new R_old^{-1}
    D = space.matrix() @ np.linalg.inv(G.space.matrix())
    vals = G.values @ D.T
    vals = (vals + np.swapaxes(vals, 0, 1)) / 2
    n = G.n
    vals[np.arange(n), np.arange(n)] = space.null_decoration(G.moment_mode)
    witnesses = G.witnesses
    if witnesses is not None and space.basis != "monomial" and witnesses.shape[2] > space.dim:
        witnesses = None
    return TargetGraph(vals, space, G.moment_mode, witnesses)


def truncate_multigraph(G, t):
    """Cap every multiplicity at ``t``."""
    t = check_positive_int(t, "t", minimum=0)
    return Multigraph(np.minimum(G.matrix, t))
