"""Monte Carlo SIR epidemics on generated networks.

A single epidemic is a directed bond percolation: every ordered
neighbour pair (u, v) carries an independent bond that is open with the
probability that u, once infected, transmits to v.  For a constant
infectious period that is one Bernoulli(p_i) per directed bond; for a
general period each node draws its period once and all bonds out of it
share that draw.  Breadth-first exploration of open bonds from the seed
yields the final size and the per-generation counts.  Exploring against
the bond direction instead yields the size of the set of nodes that
would have infected the start node, whose mean connects to the
asymptotic relative final size.

`estimate` repeats build / rewire / infect with independently spawned
seed streams, splits outcomes into minor and major at a size cutoff
and reports the major-outbreak frequency and mean relative size with
binomial / empirical standard errors.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .branching import ModelParams
from .errors import AmbiguousBimodality, NoMajorOutbreaks
from .netgen import Network, build_network, rewire

DEFAULT_CUTOFF = 0.05


@dataclass(frozen=True)
class EpidemicOutcome:
    """One simulated epidemic: total ever infected (seed included), the
    infected fraction of the population, and the number of new
    infections in each generation (index 0 is the seed generation)."""

    final_size: int
    infected_fraction: float
    generations: np.ndarray

    def __post_init__(self):
        assert int(self.generations.sum()) == self.final_size


def _ranges(counts: np.ndarray) -> np.ndarray:
    """[0..counts[0]-1, 0..counts[1]-1, ...] as one array."""
    total = int(counts.sum())
    ends = np.cumsum(counts)
    return np.arange(total) - np.repeat(ends - counts, counts)


def run_epidemic(net: Network, infection, seed, start: Optional[int] = None,
                 reverse: bool = False) -> EpidemicOutcome:
    """Percolation epidemic from `start` (uniform if None).

    reverse=True explores against the bond direction, producing the set
    of nodes whose infection would reach the start node.  Self-loops are
    inert; parallel edges carry independent bonds.
    """
    rng = np.random.default_rng(seed)
    n = net.n
    src = np.concatenate([net.edges_u, net.edges_v])
    dst = np.concatenate([net.edges_v, net.edges_u])
    order = np.argsort(src, kind="stable")
    heads = dst[order]
    out_deg = np.bincount(src, minlength=n)
    indptr = np.concatenate(([0], np.cumsum(out_deg)))

    if start is None:
        start = int(rng.integers(n))

    p_i = infection.p_i
    if not infection.is_constant:
        if infection.sampler is None:
            raise ValueError("general infectious period needs a sampler "
                             "to simulate")
        periods = infection.sampler(rng, n)
        p_node = 1.0 - np.exp(-infection.rate * periods)

    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    frontier = np.array([start], dtype=np.int64)
    generations = [1]
    while frontier.size:
        counts = out_deg[frontier]
        targets = heads[np.repeat(indptr[frontier], counts) + _ranges(counts)]
        if infection.is_constant:
            prob = p_i
        elif reverse:
            prob = p_node[targets]
        else:
            prob = p_node[np.repeat(frontier, counts)]
        hit = targets[rng.random(targets.size) < prob]
        new = np.unique(hit[~seen[hit]])
        if new.size == 0:
            break
        seen[new] = True
        frontier = new
        generations.append(int(new.size))
    size = int(seen.sum())
    return EpidemicOutcome(size, size / n,
                           np.array(generations, dtype=np.int64))


def classify(final_sizes: np.ndarray, cutoff: float, n: int):
    """Split runs into minor/major.  A cutoff in (0, 1) is a fraction of
    n, anything >= 1 an absolute count.  Returns (major flags, threshold
    used); warns when many runs crowd the threshold, since then the
    split is not backed by a bimodal histogram."""
    if cutoff <= 0.0:
        raise ValueError("cutoff must be positive")
    threshold = int(math.ceil(cutoff * n)) if cutoff < 1.0 else int(cutoff)
    final_sizes = np.asarray(final_sizes)
    major = final_sizes >= threshold
    near = np.abs(final_sizes - threshold) <= 0.2 * threshold
    if near.mean() > 0.02:
        warnings.warn(
            f"{int(near.sum())} of {final_sizes.size} final sizes fall "
            f"within 20% of the cutoff {threshold}; the minor/major "
            "separation is unclear",
            AmbiguousBimodality,
        )
    return major, threshold


@dataclass(frozen=True)
class EstimateReport:
    """Monte Carlo estimates over repeated build / rewire / infect runs."""

    n: int
    n_sims: int
    cutoff_used: int
    seeds: np.ndarray
    final_sizes: np.ndarray
    major: np.ndarray
    p_hat: float
    p_se: float

    @property
    def n_major(self) -> int:
        return int(self.major.sum())

    @property
    def has_major(self) -> bool:
        return self.n_major > 0

    @property
    def histogram(self) -> np.ndarray:
        """Counts of each final size, index = size (0 unused)."""
        return np.bincount(self.final_sizes, minlength=self.n + 1)

    @property
    def z_hat(self) -> float:
        if not self.has_major:
            raise NoMajorOutbreaks(
                f"none of {self.n_sims} runs reached the cutoff "
                f"{self.cutoff_used}")
        return float(self.final_sizes[self.major].mean() / self.n)

    @property
    def z_se(self) -> float:
        if not self.has_major:
            raise NoMajorOutbreaks(
                f"none of {self.n_sims} runs reached the cutoff "
                f"{self.cutoff_used}")
        if self.n_major == 1:
            return float("nan")
        fracs = self.final_sizes[self.major] / self.n
        return float(fracs.std(ddof=1) / math.sqrt(self.n_major))


def _run_one(params: ModelParams, n: int, seed_value: int, reverse: bool) -> int:
    ss = np.random.SeedSequence(seed_value)
    s_build, s_rewire, s_epi = ss.spawn(3)
    net = build_network(params.gen_spec(n), seed=s_build)
    if params.p_rw > 0.0:
        net = rewire(net, params.p_rw, seed=s_rewire)
    out = run_epidemic(net, params.infection, seed=s_epi, reverse=reverse)
    return out.final_size


def _run_block(args):
    params, n, seed_values, reverse = args
    return [_run_one(params, n, int(s), reverse) for s in seed_values]


def estimate(params: ModelParams, n: int, n_sims: int, master_seed: int,
             cutoff: float = DEFAULT_CUTOFF, threads: int = 1,
             reverse: bool = False) -> EstimateReport:
    """Build a fresh network per run, infect one uniform seed, classify
    runs as major at the cutoff (fraction of n or absolute count).

    Per-run integer seeds derive from the master seed, so results are
    reproducible bit for bit and independent of `threads` (workers merge
    back by run index).
    """
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    ss = np.random.SeedSequence(master_seed)
    seeds = ss.generate_state(n_sims, dtype=np.uint64)

    if threads > 1:
        blocks = np.array_split(np.arange(n_sims), threads * 4)
        blocks = [b for b in blocks if b.size]
        jobs = [(params, n, seeds[b].tolist(), reverse) for b in blocks]
        final_sizes = np.empty(n_sims, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for b, result in zip(blocks, pool.map(_run_block, jobs)):
                final_sizes[b] = result
    else:
        final_sizes = np.array(
            [_run_one(params, n, int(s), reverse) for s in seeds],
            dtype=np.int64)

    major, threshold = classify(final_sizes, cutoff, n)
    p_hat = float(major.mean())
    p_se = math.sqrt(p_hat * (1.0 - p_hat) / n_sims)
    return EstimateReport(n=n, n_sims=n_sims, cutoff_used=threshold,
                          seeds=seeds, final_sizes=final_sizes, major=major,
                          p_hat=p_hat, p_se=p_se)
