"""Discrete distributions and the stub-level laws derived from them.

Everything downstream (network generation, analytic network properties,
branching-process epidemic quantities) consumes the types defined here:
finite-support laws for household size and global degree, the size- and
edge-biased variants that describe what a randomly chosen stub or edge
sees, the quantile decomposition of the stub degree law used to induce
degree correlation, and the infectious-period specification.

Infinite-support laws (Poisson, geometric, ...) are truncated once, at
construction, to a finite support carrying all but ``tail_mass_bound``
of the mass; every derived law then treats the truncated support as
exact and renormalizes over it.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy import stats

from .errors import EmptyDistribution, NoEdges, ZeroMean

# Default bound on the probability mass discarded when truncating an
# infinite support.  Small enough that third factorial moments of the
# laws used here are good to ~1e-12.
DEFAULT_TAIL_EPS = 1e-14

_SUM_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteDist:
    """A probability law on a finite set of non-negative integers.

    support : sorted, distinct non-negative integers
    probs   : matching probabilities, summing to 1 - tail_mass_bound
    tail_mass_bound : upper bound on the mass lost to truncation
    """

    support: np.ndarray
    probs: np.ndarray
    tail_mass_bound: float = 0.0

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if support.size == 0:
            raise EmptyDistribution("distribution has empty support")
        if support.ndim != 1 or probs.shape != support.shape:
            raise ValueError("support and probs must be 1-d and aligned")
        if np.any(support < 0):
            raise ValueError("support values must be non-negative integers")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if not 0.0 <= self.tail_mass_bound <= 1.0:
            raise ValueError("tail_mass_bound must lie in [0, 1]")
        total = float(probs.sum()) + self.tail_mass_bound
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        object.__setattr__(self, "support", _freeze(support))
        object.__setattr__(self, "probs", _freeze(probs))

    # -- basic queries -------------------------------------------------

    def p(self, k: int) -> float:
        """Probability of the value k (0.0 if outside the support)."""
        idx = np.searchsorted(self.support, k)
        if idx < self.support.size and self.support[idx] == k:
            return float(self.probs[idx])
        return 0.0

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.support - m) ** 2, self.probs))

    def falling_moment(self, order: int) -> float:
        """E[X (X-1) ... (X-order+1)] over the retained support."""
        w = np.ones_like(self.support, dtype=np.float64)
        for j in range(order):
            w *= self.support - j
        return float(np.dot(w, self.probs))

    def pgf(self, s: float) -> float:
        return float(np.dot(self.probs, np.float_power(s, self.support)))

    def min_support(self) -> int:
        return int(self.support[0])

    def max_support(self) -> int:
        return int(self.support[-1])

    def prob_at_least(self, k: int) -> float:
        return float(self.probs[self.support >= k].sum()) + self.tail_mass_bound

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.support, self.probs)}

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` iid values (truncated law treated as exact)."""
        # cdf inversion keeps this correct even though probs sum to
        # 1 - tail_mass_bound rather than exactly 1
        cdf = np.cumsum(self.probs)
        cdf[-1] = max(cdf[-1], 1.0)
        u = rng.random(size)
        return self.support[np.searchsorted(cdf, u, side="right")]

    def dense_probs(self) -> np.ndarray:
        """Probabilities on 0..max_support as a dense vector."""
        dense = np.zeros(self.max_support() + 1)
        dense[self.support] = self.probs
        return dense


def _from_dense(dense: np.ndarray, tail: float = 0.0) -> DiscreteDist:
    support = np.flatnonzero(dense > 0.0)
    if support.size == 0:
        raise EmptyDistribution("no probability mass left")
    return DiscreteDist(support, dense[support], tail)


# -- named laws --------------------------------------------------------


def point(k: int) -> DiscreteDist:
    return DiscreteDist(np.array([int(k)]), np.array([1.0]))


def poisson(mean: float, eps: float = DEFAULT_TAIL_EPS) -> DiscreteDist:
    if mean < 0:
        raise ValueError("poisson mean must be >= 0")
    if mean == 0:
        return point(0)
    hi = int(stats.poisson.isf(eps, mean)) + 1
    support = np.arange(hi + 1)
    probs = stats.poisson.pmf(support, mean)
    tail = max(0.0, 1.0 - float(probs.sum()))
    return DiscreteDist(support, probs, tail)


def poisson_plus(mean: float, eps: float = DEFAULT_TAIL_EPS) -> DiscreteDist:
    """Zero-truncated Poisson; degenerates to the point mass at 1 when
    mean == 0."""
    if mean < 0:
        raise ValueError("poisson_plus mean must be >= 0")
    if mean == 0:
        return point(1)
    hi = max(1, int(stats.poisson.isf(eps, mean)) + 1)
    support = np.arange(1, hi + 1)
    probs = stats.poisson.pmf(support, mean) / (1.0 - math.exp(-mean))
    tail = max(0.0, 1.0 - float(probs.sum()))
    return DiscreteDist(support, probs, tail)


def geometric(p: float, eps: float = DEFAULT_TAIL_EPS) -> DiscreteDist:
    """P(X = k) = p (1-p)^k on k = 0, 1, 2, ..."""
    if not 0.0 < p <= 1.0:
        raise ValueError("geometric parameter must lie in (0, 1]")
    if p == 1.0:
        return point(0)
    hi = max(1, int(math.ceil(math.log(eps) / math.log1p(-p))))
    support = np.arange(hi + 1)
    probs = p * np.exp(support * math.log1p(-p))
    tail = max(0.0, 1.0 - float(probs.sum()))
    return DiscreteDist(support, probs, tail)


def negative_binomial(r: float, p: float, eps: float = DEFAULT_TAIL_EPS) -> DiscreteDist:
    """P(X = k) = C(k+r-1, k) p^r (1-p)^k on k = 0, 1, 2, ..."""
    if r <= 0 or not 0.0 < p <= 1.0:
        raise ValueError("negative_binomial needs r > 0 and p in (0, 1]")
    if p == 1.0:
        return point(0)
    hi = max(1, int(stats.nbinom.isf(eps, r, p)) + 1)
    support = np.arange(hi + 1)
    probs = stats.nbinom.pmf(support, r, p)
    tail = max(0.0, 1.0 - float(probs.sum()))
    return DiscreteDist(support, probs, tail)


def from_pmf(pmf: Mapping[int, float]) -> DiscreteDist:
    if not pmf:
        raise EmptyDistribution("empty pmf")
    items = sorted((int(k), float(v)) for k, v in pmf.items())
    support = np.array([k for k, _ in items])
    probs = np.array([v for _, v in items])
    if np.any(probs < 0):
        raise ValueError("pmf entries must be non-negative")
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"pmf sums to {total}, expected 1")
    keep = probs > 0.0
    return DiscreteDist(support[keep], probs[keep] / total)


# -- the distribution grammar used by config files and the CLI ---------

_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")
_PMF_ITEM_RE = re.compile(r"^\s*(\d+)\s*:\s*([0-9.eE+-]+)\s*$")


def parse_distribution(text: str, eps: float = DEFAULT_TAIL_EPS) -> DiscreteDist:
    """Parse a distribution expression.

    Accepted forms: poisson(m), poisson_plus(m), point(k) / point_mass(k),
    geometric(p), negative_binomial(r, p), pmf([k1:p1, k2:p2, ...]).
    """
    m = _CALL_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse distribution {text!r}")
    name, args = m.group(1), m.group(2).strip()
    if name == "pmf":
        if not (args.startswith("[") and args.endswith("]")):
            raise ValueError(f"pmf expects a [k:p, ...] list, got {args!r}")
        entries = {}
        for item in args[1:-1].split(","):
            if not item.strip():
                continue
            im = _PMF_ITEM_RE.match(item)
            if not im:
                raise ValueError(f"bad pmf entry {item!r} in {text!r}")
            entries[int(im.group(1))] = float(im.group(2))
        return from_pmf(entries)
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        vals = [float(a) for a in parts]
    except ValueError:
        raise ValueError(f"bad numeric arguments in {text!r}") from None
    if name == "poisson" and len(vals) == 1:
        return poisson(vals[0], eps)
    if name == "poisson_plus" and len(vals) == 1:
        return poisson_plus(vals[0], eps)
    if name in ("point", "point_mass") and len(vals) == 1:
        if vals[0] != int(vals[0]):
            raise ValueError(f"point mass needs an integer, got {vals[0]}")
        return point(int(vals[0]))
    if name == "geometric" and len(vals) == 1:
        return geometric(vals[0], eps)
    if name == "negative_binomial" and len(vals) == 2:
        return negative_binomial(vals[0], vals[1], eps)
    raise ValueError(f"unknown distribution form {text!r}")


# -- biased laws --------------------------------------------------------


def moments(dist: DiscreteDist) -> tuple[float, float]:
    """(mean, variance) over the retained support."""
    return dist.mean(), dist.variance()


def size_bias(dist: DiscreteDist) -> DiscreteDist:
    """The law seen by a uniformly chosen unit of size: P ~ k p_k.

    A node's household, viewed from a random individual, is size-biased;
    so is the owner of a random stub.
    """
    mean = dist.mean()
    if mean <= 0.0:
        raise ZeroMean("size biasing needs a distribution with positive mean")
    keep = dist.support > 0
    w = dist.support[keep] * dist.probs[keep]
    return DiscreteDist(dist.support[keep], w / w.sum())


def edge_bias(dist: DiscreteDist) -> DiscreteDist:
    """The household-size law of a uniformly chosen local edge: P ~ k(k-1) p_k."""
    if dist.prob_at_least(2) <= 0.0:
        raise NoEdges("edge biasing needs mass on sizes >= 2")
    keep = dist.support >= 2
    sup = dist.support[keep]
    w = sup * (sup - 1) * dist.probs[keep]
    total = w.sum()
    if total <= 0.0:
        raise NoEdges("edge biasing needs mass on sizes >= 2")
    return DiscreteDist(sup, w / total)


def stub_degree_law(household: DiscreteDist, global_degree: DiscreteDist) -> DiscreteDist:
    """Total degree of the owner of a uniformly chosen global stub.

    The owner's global degree is size-biased and its household is
    size-biased independently, so the total degree is the convolution
    size_bias(G) + size_bias(H) - 1.
    """
    if global_degree.mean() <= 0.0:
        raise ZeroMean("no global stubs exist when the global degree has mean 0")
    g_tilde = size_bias(global_degree)
    h_tilde = size_bias(household)
    dense = np.convolve(g_tilde.dense_probs(), h_tilde.dense_probs())
    # shift by -1: degree = global stubs + (household - 1) co-members
    return _from_dense(dense[1:])


# -- quantile decomposition of the stub degree law ---------------------


@dataclass(frozen=True)
class QuantileTable:
    """Joint law of (degree, quantile block) for a random global stub.

    Stubs sorted by owner degree (uniform tie-break) and cut into n_q
    near-equal blocks have asymptotic joint law
        P(D = d, Q = i) = max(min(u_d, i/n_q) - max(u_{d-1}, (i-1)/n_q), 0)
    where u_d is the cdf of the stub degree law.
    """

    dist: DiscreteDist
    n_q: int
    joint: np.ndarray            # (n_d, n_q)
    q_given_d: np.ndarray        # rows sum to 1
    d_given_q: np.ndarray        # columns sum to 1
    quantile_means: np.ndarray   # (n_q,) mean degree within each block

    @property
    def degrees(self) -> np.ndarray:
        return self.dist.support

    def block_dispersion(self, r: float) -> float:
        """Covariance g(r) of paired stub degrees induced by the blocks.

        r >= 0: both stubs share a block; r < 0: block i pairs with
        block n_q + 1 - i.  Piecewise linear in r.
        """
        mu = self.dist.mean()
        means = self.quantile_means
        if r >= 0.0:
            aligned = float(np.mean(means * means))
            return r * (aligned - mu * mu)
        crossed = float(np.mean(means * means[::-1]))
        return -r * (crossed - mu * mu)


def quantile_table(dist: DiscreteDist, n_q: int) -> QuantileTable:
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    cdf_hi = np.cumsum(dist.probs)
    cdf_lo = cdf_hi - dist.probs
    i = np.arange(1, n_q + 1)
    upper = np.minimum(cdf_hi[:, None], i[None, :] / n_q)
    lower = np.maximum(cdf_lo[:, None], (i[None, :] - 1) / n_q)
    joint = np.clip(upper - lower, 0.0, None)
    row_mass = joint.sum(axis=1)
    col_mass = joint.sum(axis=0)
    # degrees whose (tiny) mass vanished in rounding: pin them to the
    # block holding their cdf position so conditionals stay proper
    dead = np.flatnonzero(row_mass <= 0.0)
    if dead.size:
        q_given_d = joint / np.where(row_mass > 0.0, row_mass, 1.0)[:, None]
        q_given_d[dead, np.clip((cdf_lo[dead] * n_q).astype(int), 0, n_q - 1)] = 1.0
    else:
        q_given_d = joint / row_mass[:, None]
    d_given_q = joint / col_mass[None, :]
    means = dist.support @ d_given_q
    return QuantileTable(dist, n_q, _freeze(joint), _freeze(q_given_d),
                         _freeze(d_given_q), _freeze(means))


@dataclass(frozen=True)
class PairingKernels:
    """Which block a stub's partner lands in, given correlation sign.

    quantile_kernel[i, j]: partner block of a labelled stub in block i.
    degree_kernel[d_idx, j]: same, marginalized over the block of a
    labelled stub of degree d.
    """

    quantile_kernel: np.ndarray  # (n_q, n_q)
    degree_kernel: np.ndarray    # (n_d, n_q)


def pairing_kernels(table: QuantileTable, r: float) -> PairingKernels:
    n_q = table.n_q
    if r < 0.0:
        quantile_kernel = np.eye(n_q)[::-1]
    else:
        # identity at r = 0 by convention (kernel is unused there)
        quantile_kernel = np.eye(n_q)
    degree_kernel = table.q_given_d @ quantile_kernel
    return PairingKernels(_freeze(quantile_kernel), _freeze(degree_kernel))


# -- infectious period --------------------------------------------------


@dataclass(frozen=True)
class InfectionSpec:
    """Infectious-period model for the SIR epidemic.

    Either a constant period, parameterized directly by the probability
    p_i that a given contact is infectious (one Bernoulli per directed
    neighbour pair), or a general period with contact rate `rate`,
    Laplace transform `phi` (theta -> E[exp(-theta I)]) and an optional
    `sampler` for simulation.
    """

    kind: str
    p_i: float
    rate: Optional[float] = None
    phi: Optional[Callable[[float], float]] = None
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None
    label: str = field(default="")

    def __post_init__(self):
        if self.kind not in ("constant", "general"):
            raise ValueError(f"unknown infection kind {self.kind!r}")
        if not 0.0 <= self.p_i <= 1.0:
            raise ValueError("transmission probability must lie in [0, 1]")
        if self.kind == "general":
            if self.rate is None or self.rate < 0 or self.phi is None:
                raise ValueError("general infectious period needs rate and phi")

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def phi_multiple(self, k: int) -> float:
        """E[exp(-k * rate * I)]: survival of k independent exposures."""
        if self.is_constant:
            return (1.0 - self.p_i) ** k
        return float(self.phi(k * self.rate))

    @classmethod
    def constant(cls, p_i: float) -> "InfectionSpec":
        return cls(kind="constant", p_i=float(p_i), label=f"constant(p_i={p_i})")

    @classmethod
    def general(cls, rate, phi, sampler=None, label="general") -> "InfectionSpec":
        p_i = 1.0 - float(phi(rate))
        return cls(kind="general", p_i=p_i, rate=float(rate), phi=phi,
                   sampler=sampler, label=label)

    @classmethod
    def exponential(cls, rate: float, mean: float = 1.0) -> "InfectionSpec":
        """Exponentially distributed period with the given mean."""
        # partials of module-level functions keep the spec picklable for
        # multi-process simulation
        phi = functools.partial(_exponential_transform, mean=mean)
        sampler = functools.partial(_exponential_sampler, mean=mean)
        return cls.general(rate, phi, sampler,
                           label=f"exponential(rate={rate}, mean={mean})")

    @classmethod
    def gamma(cls, rate: float, shape: float, scale: float = 1.0) -> "InfectionSpec":
        phi = functools.partial(_gamma_transform, shape=shape, scale=scale)
        sampler = functools.partial(_gamma_sampler, shape=shape, scale=scale)
        return cls.general(rate, phi, sampler,
                           label=f"gamma(rate={rate}, shape={shape}, scale={scale})")


def _exponential_transform(theta, mean):
    return 1.0 / (1.0 + theta * mean)


def _exponential_sampler(rng, size, mean):
    return rng.exponential(mean, size)


def _gamma_transform(theta, shape, scale):
    return (1.0 + scale * theta) ** (-shape)


def _gamma_sampler(rng, size, shape, scale):
    return rng.gamma(shape, scale, size)
