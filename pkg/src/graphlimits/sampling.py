"""W-random decorated graphs, multiplicity randomization and convergence experiments."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int, check_random_state
from .core import Multigraph, StepGraphon, TargetGraph, TestGraph, encode_target_multigraph
from .density import DEFAULT_CAP, align_test_graph, t_density, t_graphon, t_inj_density
from .errors import ValidationError


def sample_w_random(n, W, seed=0, keep_positions=False):
    """Sample the W-random decorated graph on ``n`` nodes.

    Latent points ``x_1..x_n`` are uniform in [0, 1]; pair ``uv`` gets the
    decoration of the block containing ``(x_u, x_v)``.  Monomial-basis
    graphons give moment-mode targets (diagonal = point mass at 0).  Any
    attached block witnesses are carried over pairwise.  With
    ``keep_positions`` the points are returned as well.
    """
    n = check_positive_int(n, "n")
    if not isinstance(W, StepGraphon):
        raise ValidationError("sample_w_random expects a StepGraphon")
    rng = check_random_state(seed)
    x = rng.random(n)
    cls = W.partition.locate(x)
    moment_mode = W.space.basis == "monomial" or W.witnesses is not None
    vals = np.moveaxis(W.values[:, cls][:, :, cls], 0, -1).copy()
    diag = np.arange(n)
    vals[diag, diag] = W.space.null_decoration(moment_mode)
    wit = None
    if W.witnesses is not None:
        wit = W.witnesses[cls][:, cls].copy()
        wit[diag, diag] = 0.0
        wit[diag, diag, 0] = 1.0
    G = TargetGraph(vals, W.space, moment_mode, wit)
    return (G, x) if keep_positions else G


def randomize_multiplicities(G, seed=0):
    """Draw an independent multiplicity for every pair ``u < v`` from its witness distribution."""
    if not isinstance(G, TargetGraph) or G.witnesses is None:
        raise ValidationError("randomization needs a TargetGraph with a witness distribution on every pair")
    rng = check_random_state(seed)
    return _draw_multigraph(G.witnesses, rng)


def _draw_multigraph(witnesses, rng):
    n = witnesses.shape[0]
    iu, iv = np.triu_indices(n, 1)
    cdf = np.cumsum(witnesses[iu, iv], axis=1)
    r = rng.random(iu.size)
    m = np.minimum((r[:, None] >= cdf).sum(axis=1), witnesses.shape[2] - 1)
    g = np.zeros((n, n), dtype=np.int64)
    g[iu, iv] = m
    g[iv, iu] = m
    return Multigraph(g)


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------


def graphon_hash(W):
    blob = json.dumps(W.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def fmt_float(x):
    """17 significant digits: round-trips every double."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentTable:
    """Rows ``(n, trial, F, density, deviation)`` plus run metadata."""

    rows: tuple
    metadata: dict = field(default_factory=dict)

    COLUMNS = ("n", "trial", "F", "density", "deviation")

    def to_csv(self):
        lines = [",".join(self.COLUMNS)]
        for n, trial, name, dens, dev in self.rows:
            lines.append(f"{n},{trial},{name},{fmt_float(dens)},{fmt_float(dev)}")
        return "\n".join(lines) + "\n"

    def column(self, name, F=None, n=None):
        idx = self.COLUMNS.index(name)
        return np.array(
            [r[idx] for r in self.rows if (F is None or r[2] == F) and (n is None or r[0] == n)]
        )

    def summary(self):
        """Per ``(F, n)``: mean and max deviation, mean fourth power, mean density."""
        out = {}
        for name in self.metadata.get("battery", []):
            per_n = {}
            for n in self.metadata.get("n_list", []):
                dev = self.column("deviation", name, n)
                dens = self.column("density", name, n)
                per_n[n] = {
                    "mean_density": float(np.mean(dens)),
                    "mean_deviation": float(np.mean(dev)),
                    "max_deviation": float(np.max(dev)),
                    "mean_dev4": float(np.mean(dev**4)),
                }
            out[name] = per_n
        return out

    def decay_exponent(self, F):
        """Least-squares slope of ``log mean(dev**4)`` against ``log n``."""
        ns = list(self.metadata["n_list"])
        y = [np.mean(self.column("deviation", F, n) ** 4) for n in ns]
        if len(ns) < 2 or min(y) <= 0:
            return math.nan
        slope, _ = np.polyfit(np.log(ns), np.log(y), 1)
        return float(slope)


def _battery(battery):
    items = battery.items() if isinstance(battery, dict) else enumerate(battery)
    out = []
    for name, F in items:
        if isinstance(F, tuple):
            name, F = F
        if not isinstance(F, TestGraph):
            raise ValidationError("battery entries must be TestGraphs")
        out.append((str(name), F))
    return out


def run_convergence_experiment(
    W, battery, n_list, trials, seed=0, kind="hom", randomize=False, cap=DEFAULT_CAP
):
    """Sample ``trials`` graphs for each ``n`` and record densities against ``t(F, W)``.

    ``kind`` selects ``t`` ("hom") or ``t_inj`` ("inj").  With ``randomize``
    each sample is turned into a multigraph by drawing multiplicities from
    the witnesses, and densities are taken against its moment encoding.
    Each ``(n, trial)`` pair owns an independent random stream.
    """
    if kind not in ("hom", "inj"):
        raise ValidationError(f"kind must be 'hom' or 'inj', got {kind!r}")
    trials = check_positive_int(trials, "trials")
    n_list = [check_positive_int(n, "n") for n in n_list]
    items = _battery(battery)
    density = t_density if kind == "hom" else t_inj_density
    reference = {name: t_graphon(F, W, cap) for name, F in items}
    if not randomize:
        # sampled targets carry the graphon's decoration space
        items = [(name, align_test_graph(F, W)) for name, F in items]
    rows = []
    for n in n_list:
        for trial in range(trials):
            rng = check_random_state(seed, n, trial)
            G = sample_w_random(n, W, rng)
            if randomize:
                H = randomize_multiplicities(G, rng)
            for name, F in items:
                target = G
                if randomize:
                    target = encode_target_multigraph(H, F.space.dim - 1)
                value = density(F, target, cap)
                rows.append((n, trial, name, value, abs(value - reference[name])))
    meta = {
        "seed": seed,
        "graphon_sha256": graphon_hash(W),
        "battery": [name for name, _ in items],
        "n_list": n_list,
        "trials": trials,
        "kind": kind,
        "randomize": randomize,
        "reference": reference,
    }
    return ExperimentTable(tuple(rows), meta)
