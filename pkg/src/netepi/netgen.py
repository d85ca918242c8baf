"""Finite random networks with household cliques and labelled global stubs.

Construction: household sizes are drawn iid (the last household truncated
so sizes sum to n) and each household forms a complete graph of "local"
edges.  Each node independently draws a number of "global" stubs; every
stub is labelled X=1 with probability |r|, else X=0.  X=0 stubs are paired
uniformly.  X=1 stubs are sorted by owner total degree (uniform random
tie-break), cut into n_q near-equal blocks (larger blocks first), and
paired within a block when r > 0 or between mirror-image blocks i and
n_q + 1 - i when r < 0 (the middle block pairing internally when n_q is
odd).  Unpairable leftovers are discarded and counted: at most one X=0
stub and at most n_q X=1 stubs.

Self-loops and parallel edges are kept (they vanish in proportion as n
grows) but counted, so callers can check the imperfection fraction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from typing import Iterable, TextIO, Union

import numpy as np

from .distributions import DiscreteDist

Seed = Union[int, np.random.SeedSequence, None]


@dataclass(frozen=True)
class GenSpec:
    """Everything the generator needs: network size and the four
    structural knobs (household law, global degree law, target degree
    correlation sign/strength r, number of sorting blocks n_q)."""

    n: int
    household: DiscreteDist
    global_degree: DiscreteDist
    r: float = 0.0
    n_q: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.household.min_support() < 1:
            raise ValueError("household sizes must be >= 1")
        if not -1.0 <= self.r <= 1.0:
            raise ValueError("r must lie in [-1, 1]")
        if self.n_q < 1:
            raise ValueError("n_q must be >= 1")


@dataclass(frozen=True)
class Imperfections:
    self_loops: int = 0
    parallel_edges: int = 0
    discarded_x0: int = 0
    discarded_x1: int = 0
    discarded_local: int = 0

    @property
    def discarded_total(self) -> int:
        return self.discarded_x0 + self.discarded_x1 + self.discarded_local


@dataclass(frozen=True)
class Network:
    """An undirected multigraph with household structure.

    Nodes 0..n-1 are laid out household by household.  Edge arrays are
    aligned; edge_local marks household edges.  stub_q_u/stub_q_v carry
    the 1-based sorting-block labels of the two stubs of an X=1 global
    edge and are 0 everywhere else.
    """

    n: int
    household_index: np.ndarray
    household_sizes: np.ndarray
    edges_u: np.ndarray
    edges_v: np.ndarray
    edge_local: np.ndarray
    stub_q_u: np.ndarray
    stub_q_v: np.ndarray
    imperfections: Imperfections

    @property
    def n_edges(self) -> int:
        return int(self.edges_u.size)

    def degrees(self) -> np.ndarray:
        """Stub-based degrees: a self-loop adds 2 to its node."""
        deg = np.bincount(self.edges_u, minlength=self.n)
        deg += np.bincount(self.edges_v, minlength=self.n)
        return deg

    def household_size_of(self, v: int) -> int:
        return int(self.household_sizes[self.household_index[v]])

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.household_sizes, other.household_sizes)
            and np.array_equal(self.edges_u, other.edges_u)
            and np.array_equal(self.edges_v, other.edges_v)
            and np.array_equal(self.edge_local, other.edge_local)
            and np.array_equal(self.stub_q_u, other.stub_q_u)
            and np.array_equal(self.stub_q_v, other.stub_q_v)
            and self.imperfections == other.imperfections
        )


def _count_imperfections(n, edges_u, edges_v) -> tuple[int, int]:
    if edges_u.size == 0:
        return 0, 0
    self_loops = int(np.sum(edges_u == edges_v))
    a = np.minimum(edges_u, edges_v).astype(np.int64)
    b = np.maximum(edges_u, edges_v).astype(np.int64)
    key = np.sort(a * n + b)
    parallel = int(np.sum(np.diff(key) == 0))
    return self_loops, parallel


def _draw_household_sizes(household: DiscreteDist, n: int,
                          rng: np.random.Generator) -> np.ndarray:
    sizes = []
    total = 0
    mean = max(household.mean(), 1.0)
    while total < n:
        batch = household.sample(rng, max(64, int((n - total) / mean) + 16))
        sizes.append(batch)
        total += int(batch.sum())
    sizes = np.concatenate(sizes)
    cum = np.cumsum(sizes)
    last = int(np.searchsorted(cum, n))
    sizes = sizes[: last + 1].copy()
    # truncate the final household so the sizes sum to exactly n
    sizes[last] = n - (cum[last - 1] if last > 0 else 0)
    return sizes[sizes > 0]


def _household_edges(sizes: np.ndarray, starts: np.ndarray):
    chunks_u, chunks_v = [], []
    for s in np.unique(sizes):
        if s < 2:
            continue
        hs = starts[sizes == s]
        ti, tj = np.triu_indices(int(s), k=1)
        chunks_u.append((hs[:, None] + ti[None, :]).ravel())
        chunks_v.append((hs[:, None] + tj[None, :]).ravel())
    if not chunks_u:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    return np.concatenate(chunks_u), np.concatenate(chunks_v)


def _pair_uniform(owners: np.ndarray, rng: np.random.Generator):
    """Uniform random perfect matching; odd leftover discarded."""
    shuffled = owners[rng.permutation(owners.size)]
    m = owners.size // 2
    return shuffled[: 2 * m : 2], shuffled[1 : 2 * m : 2], int(owners.size - 2 * m)


def _block_sizes(total: int, n_q: int) -> np.ndarray:
    base, rem = divmod(total, n_q)
    return np.array([base + 1] * rem + [base] * (n_q - rem), dtype=np.int64)


def build_network(spec: GenSpec, seed: Seed) -> Network:
    rng = np.random.default_rng(seed)
    n = spec.n

    sizes = _draw_household_sizes(spec.household, n, rng)
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    household_index = np.repeat(np.arange(sizes.size), sizes)
    size_of_node = np.repeat(sizes, sizes)

    local_u, local_v = _household_edges(sizes, starts)

    g = spec.global_degree.sample(rng, n)
    degree = size_of_node - 1 + g
    owners = np.repeat(np.arange(n, dtype=np.int64), g)

    x1 = rng.random(owners.size) < abs(spec.r)
    x0_owners = owners[~x1]
    x1_owners = owners[x1]

    g0_u, g0_v, disc_x0 = _pair_uniform(x0_owners, rng)

    # sort X=1 stubs by owner degree, uniform tie-break, cut into blocks
    n_q = spec.n_q
    order = np.lexsort((rng.random(x1_owners.size), degree[x1_owners]))
    ranked = x1_owners[order]
    bounds = np.concatenate(([0], np.cumsum(_block_sizes(ranked.size, n_q))))

    g1_u, g1_v, q_u, q_v = [], [], [], []
    disc_x1 = 0

    def pair_within(block: int):
        nonlocal disc_x1
        seg = ranked[bounds[block] : bounds[block + 1]]
        u, v, disc = _pair_uniform(seg, rng)
        disc_x1 += disc
        g1_u.append(u)
        g1_v.append(v)
        q_u.append(np.full(u.size, block + 1, dtype=np.int16))
        q_v.append(np.full(v.size, block + 1, dtype=np.int16))

    if spec.r >= 0:
        for b in range(n_q):
            pair_within(b)
    else:
        for b in range(n_q // 2):
            mirror = n_q - 1 - b
            seg_a = ranked[bounds[b] : bounds[b + 1]]
            seg_b = ranked[bounds[mirror] : bounds[mirror + 1]]
            seg_a = seg_a[rng.permutation(seg_a.size)]
            seg_b = seg_b[rng.permutation(seg_b.size)]
            take = min(seg_a.size, seg_b.size)
            disc_x1 += (seg_a.size - take) + (seg_b.size - take)
            g1_u.append(seg_a[:take])
            g1_v.append(seg_b[:take])
            q_u.append(np.full(take, b + 1, dtype=np.int16))
            q_v.append(np.full(take, mirror + 1, dtype=np.int16))
        if n_q % 2 == 1:
            pair_within(n_q // 2)

    empty_i64 = np.empty(0, dtype=np.int64)
    empty_i16 = np.empty(0, dtype=np.int16)
    g1_u = np.concatenate(g1_u) if g1_u else empty_i64
    g1_v = np.concatenate(g1_v) if g1_v else empty_i64
    q_u = np.concatenate(q_u) if q_u else empty_i16
    q_v = np.concatenate(q_v) if q_v else empty_i16

    edges_u = np.concatenate([local_u, g0_u, g1_u])
    edges_v = np.concatenate([local_v, g0_v, g1_v])
    edge_local = np.zeros(edges_u.size, dtype=bool)
    edge_local[: local_u.size] = True
    stub_q_u = np.zeros(edges_u.size, dtype=np.int16)
    stub_q_v = np.zeros(edges_u.size, dtype=np.int16)
    stub_q_u[local_u.size + g0_u.size :] = q_u
    stub_q_v[local_u.size + g0_u.size :] = q_v

    self_loops, parallel = _count_imperfections(n, edges_u, edges_v)
    imp = Imperfections(self_loops, parallel, disc_x0, disc_x1, 0)
    return Network(n, household_index, sizes, edges_u, edges_v, edge_local,
                   stub_q_u, stub_q_v, imp)


def rewire(net: Network, p_rw: float, seed: Seed) -> Network:
    """Break each household's local edges with probability p_rw and
    re-pair the freed stubs uniformly within their household-size class.

    Degrees are preserved exactly; clustering is diluted by the factor
    (1 - p_rw) in expectation.  Meant for freshly built networks, where
    every local edge lies inside a single household.
    """
    if not 0.0 <= p_rw <= 1.0:
        raise ValueError("p_rw must lie in [0, 1]")
    if p_rw == 0.0 or not np.any(net.edge_local):
        return net
    rng = np.random.default_rng(seed)
    chosen = rng.random(net.household_sizes.size) < p_rw

    local_idx = np.flatnonzero(net.edge_local)
    edge_household = net.household_index[net.edges_u[local_idx]]
    broken = local_idx[chosen[edge_household]]
    if broken.size == 0:
        return net

    keep = np.ones(net.n_edges, dtype=bool)
    keep[broken] = False
    label = net.household_sizes[net.household_index[net.edges_u[broken]]]
    stub_owner = np.concatenate([net.edges_u[broken], net.edges_v[broken]])
    stub_label = np.concatenate([label, label])

    new_u, new_v = [], []
    disc_local = 0
    for h in np.unique(stub_label):
        u, v, disc = _pair_uniform(stub_owner[stub_label == h], rng)
        disc_local += disc
        new_u.append(u)
        new_v.append(v)
    new_u = np.concatenate(new_u)
    new_v = np.concatenate(new_v)

    edges_u = np.concatenate([net.edges_u[keep], new_u])
    edges_v = np.concatenate([net.edges_v[keep], new_v])
    edge_local = np.concatenate(
        [net.edge_local[keep], np.ones(new_u.size, dtype=bool)]
    )
    stub_q_u = np.concatenate(
        [net.stub_q_u[keep], np.zeros(new_u.size, dtype=np.int16)]
    )
    stub_q_v = np.concatenate(
        [net.stub_q_v[keep], np.zeros(new_v.size, dtype=np.int16)]
    )

    self_loops, parallel = _count_imperfections(net.n, edges_u, edges_v)
    imp = replace(net.imperfections, self_loops=self_loops,
                  parallel_edges=parallel,
                  discarded_local=net.imperfections.discarded_local + disc_local)
    return Network(net.n, net.household_index, net.household_sizes,
                   edges_u, edges_v, edge_local, stub_q_u, stub_q_v, imp)


# -- plain-text edge list format ----------------------------------------
#
#   #n 12
#   #households 4,4,3,1
#   #discarded 1 0 0          (optional: x0 x1 local counts)
#   0 1 local
#   4 9 global 2 7            (block labels of the two stubs, if any)
#
# Unrecognized leading comment lines are skipped, so callers may prepend
# their own provenance headers.  Nodes are numbered household by
# household, matching the generator's layout.


def write_network(net: Network, out: Union[str, TextIO]) -> None:
    if isinstance(out, str):
        with open(out, "w") as fh:
            write_network(net, fh)
        return
    out.write(f"#n {net.n}\n")
    out.write("#households " + ",".join(str(int(s)) for s in net.household_sizes) + "\n")
    imp = net.imperfections
    out.write(f"#discarded {imp.discarded_x0} {imp.discarded_x1} {imp.discarded_local}\n")
    kinds = np.where(net.edge_local, "local", "global")
    for u, v, kind, qu, qv in zip(net.edges_u, net.edges_v, kinds,
                                  net.stub_q_u, net.stub_q_v):
        if qu or qv:
            out.write(f"{u} {v} {kind} {qu} {qv}\n")
        else:
            out.write(f"{u} {v} {kind}\n")


def read_network(src: Union[str, TextIO, Iterable[str]]) -> Network:
    if isinstance(src, str):
        with open(src) as fh:
            return read_network(fh)
    n = None
    sizes = None
    discarded = (0, 0, 0)
    eu, ev, loc, qu, qv = [], [], [], [], []
    for raw in src:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("#n "):
                n = int(line[3:])
            elif line.startswith("#households "):
                sizes = np.array([int(s) for s in line[12:].split(",")], dtype=np.int64)
            elif line.startswith("#discarded "):
                parts = line.split()
                discarded = (int(parts[1]), int(parts[2]), int(parts[3]))
            continue
        parts = line.split()
        if len(parts) not in (3, 5):
            raise ValueError(f"bad edge line {line!r}")
        eu.append(int(parts[0]))
        ev.append(int(parts[1]))
        if parts[2] not in ("local", "global"):
            raise ValueError(f"bad edge kind in line {line!r}")
        loc.append(parts[2] == "local")
        if len(parts) == 5:
            qu.append(int(parts[3]))
            qv.append(int(parts[4]))
        else:
            qu.append(0)
            qv.append(0)
    if n is None or sizes is None:
        raise ValueError("missing #n or #households header")
    if int(sizes.sum()) != n:
        raise ValueError("household sizes do not sum to n")
    household_index = np.repeat(np.arange(sizes.size), sizes)
    edges_u = np.array(eu, dtype=np.int64)
    edges_v = np.array(ev, dtype=np.int64)
    if edges_u.size and (edges_u.max() >= n or edges_v.max() >= n):
        raise ValueError("edge endpoint out of range")
    self_loops, parallel = _count_imperfections(n, edges_u, edges_v)
    imp = Imperfections(self_loops, parallel, *discarded)
    return Network(n, household_index, sizes, edges_u, edges_v,
                   np.array(loc, dtype=bool),
                   np.array(qu, dtype=np.int16), np.array(qv, dtype=np.int16), imp)


def network_to_string(net: Network) -> str:
    buf = io.StringIO()
    write_network(net, buf)
    return buf.getvalue()
