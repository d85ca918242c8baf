"""Within-household epidemic laws.

A household of size h is a complete graph on which the SIR epidemic is
equivalent to directed bond percolation: node u, if ever infected, makes
infectious contact with each housemate independently with probability
1 - exp(-rate * I_u) given its infectious period I_u.

Two directions matter.  Forward: T, the number of housemates a single
introduction ultimately infects.  Backward: M, the number of housemates
who would infect a focal node were they infected themselves (the local
susceptibility set).  For a constant period T and M coincide in law; in
general only their means do.

Everything is driven by the Laplace transform of the period evaluated at
integer multiples of the contact rate, so the same recursions serve the
constant and general cases.

Rewiring replaces a household's clique by a uniformly re-paired
(locally tree-like) graph with the same degrees; its local epidemic is a
branching process whose offspring counts are Bin(h-2, p) after the root,
giving closed-form means and fixed-point PGFs.  Mixtures over the
rewiring probability are plain convex combinations.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import InfectionSpec
from .errors import ConstantPeriodRequired, NonConvergence

_FIXED_POINT_TOL = 1e-14
_FIXED_POINT_MAX_ITER = 200_000
_PMF_SUM_TOL = 1e-10
_PMF_NEG_TOL = 1e-9


class HouseholdEngine:
    """Caches the per-size final-size and susceptibility-set laws for one
    infectious-period specification, for household sizes up to max_size."""

    def __init__(self, infection: InfectionSpec, max_size: int):
        if max_size < 1:
            raise ValueError("max_size must be >= 1")
        self.infection = infection
        self.max_size = int(max_size)
        # survival probabilities phi_I(k * rate) for k exposures
        self._phi = np.array(
            [infection.phi_multiple(k) for k in range(self.max_size + 1)]
        )
        self._alpha = self._mean_coefficients()
        self._beta = self._susceptibility_coefficients()
        self._mean_cache: dict[int, float] = {}
        self._t_pmf_cache: dict[int, np.ndarray] = {}
        self._m_pmf_cache: dict[int, np.ndarray] = {}

    # -- mean final size (general period) --------------------------------

    def _mean_coefficients(self) -> list[float]:
        # alpha_k solve sum_{l<=k} C(k,l) alpha_l phi(l)^(k-l) = k
        alpha = [0.0] * self.max_size
        if self.max_size >= 2:
            alpha[1] = 1.0
        for k in range(2, self.max_size):
            acc = math.fsum(
                math.comb(k, l) * alpha[l] * self._phi[l] ** (k - l)
                for l in range(1, k)
            )
            alpha[k] = k - acc
        return alpha

    def final_size_mean(self, h: int) -> float:
        """Expected number of housemates infected by one introduction."""
        self._check_size(h)
        if h not in self._mean_cache:
            acc = math.fsum(
                math.comb(h - 1, k) * self._alpha[k] * self._phi[k] ** (h - k)
                for k in range(1, h)
            )
            self._mean_cache[h] = h - 1 - acc
        return self._mean_cache[h]

    # -- final-size pmf / PGF (constant period only) ----------------------

    def final_size_pmf(self, h: int) -> np.ndarray:
        """P(T = k), k = 0..h-1.  Needs a constant infectious period."""
        self._check_size(h)
        if not self.infection.is_constant:
            raise ConstantPeriodRequired(
                "the final-size law needs a constant infectious period"
            )
        if h not in self._t_pmf_cache:
            self._t_pmf_cache[h] = self._build_t_pmf(h)
        return self._t_pmf_cache[h]

    def _build_t_pmf(self, h: int) -> np.ndarray:
        q = 1.0 - self.infection.p_i
        # coefficient vectors of the inverse-power polynomials a_k(x) with
        # a_k = e_k - sum_{l<k} C(k,l) q^(l(k-l)) a_l; the final-size PGF
        # s^(h-1) sum_k C(h-1,k) q^(k(h-k)) a_k(1/s) then collapses to an
        # ordinary polynomial whose coefficients are the pmf
        a = []
        for k in range(h):
            vec = np.zeros(k + 1)
            vec[k] = 1.0
            for l in range(k):
                vec[: l + 1] -= math.comb(k, l) * q ** (l * (k - l)) * a[l]
            a.append(vec)
        pmf = np.zeros(h)
        for k in range(h):
            w = math.comb(h - 1, k) * q ** (k * (h - k))
            for j in range(k + 1):
                pmf[h - 1 - j] += w * a[k][j]
        total = math.fsum(pmf)
        if abs(total - 1.0) > _PMF_SUM_TOL or pmf.min() < -_PMF_NEG_TOL:
            raise NonConvergence(
                f"final-size pmf for h={h}, p_i={self.infection.p_i} lost "
                f"precision (sum={total}, min={pmf.min()})"
            )
        return np.clip(pmf, 0.0, None)

    def final_size_pgf(self, h: int, s: float) -> float:
        """E[s^T] for a constant period; s = 0 gives P(T = 0)."""
        return _poly(self.final_size_pmf(h), s)

    # -- susceptibility set (any period) ----------------------------------

    def _susceptibility_coefficients(self) -> list[float]:
        # beta_k = P(all k-1 housemates of a size-k household join the set)
        beta = [0.0, 1.0]
        for k in range(2, self.max_size + 1):
            acc = math.fsum(
                math.comb(k - 1, l - 1) * self._phi[l] ** (k - l) * beta[l]
                for l in range(1, k)
            )
            beta.append(1.0 - acc)
        return beta

    def susceptibility_pmf(self, h: int) -> np.ndarray:
        """P(M = k), k = 0..h-1, for any infectious period."""
        self._check_size(h)
        if h not in self._m_pmf_cache:
            pmf = np.array(
                [
                    math.comb(h - 1, k)
                    * self._phi[k + 1] ** (h - 1 - k)
                    * self._beta[k + 1]
                    for k in range(h)
                ]
            )
            total = math.fsum(pmf)
            if abs(total - 1.0) > _PMF_SUM_TOL or pmf.min() < -_PMF_NEG_TOL:
                raise NonConvergence(
                    f"susceptibility pmf for h={h} lost precision "
                    f"(sum={total}, min={pmf.min()})"
                )
            self._m_pmf_cache[h] = np.clip(pmf, 0.0, None)
        return self._m_pmf_cache[h]

    def susceptibility_mean(self, h: int) -> float:
        pmf = self.susceptibility_pmf(h)
        return float(np.dot(np.arange(h), pmf))

    def susceptibility_pgf(self, h: int, s: float) -> float:
        return _poly(self.susceptibility_pmf(h), s)

    # -- rewired (tree-like) locals ---------------------------------------

    def rewired_final_size_mean(self, h: int) -> float:
        """Mean progeny of the tree-like local process; infinite once
        p_i reaches 1/(h-2)."""
        self._check_size(h)
        p = self.infection.p_i
        if h == 1:
            return 0.0
        if h >= 3 and p >= 1.0 / (h - 2):
            return math.inf
        return (h - 1) * p / (1.0 - (h - 2) * p)

    def rewired_final_size_pgf(self, h: int, s: float) -> float:
        """E[s^T] on the rewired local graph; constant period only."""
        if not self.infection.is_constant:
            raise ConstantPeriodRequired(
                "the rewired final-size law needs a constant infectious period"
            )
        return self._rewired_progeny_pgf(h, s)

    def rewired_susceptibility_pgf(self, h: int, s: float) -> float:
        """E[s^M] on the rewired local graph; valid for any period because
        each node contributes exactly one bond along its tree path."""
        return self._rewired_progeny_pgf(h, s)

    def _rewired_progeny_pgf(self, h: int, s: float) -> float:
        self._check_size(h)
        p = self.infection.p_i
        if h == 1:
            return 1.0
        if h == 2:
            return 1.0 - p + p * s
        x = _subtree_fixed_point(
            np.array([float(s)]), np.array([h], dtype=np.int64), p
        )[0]
        return (1.0 - p + p * x) ** (h - 1)

    # -- mixtures over the rewiring probability ---------------------------

    def mixture_mean(self, h: int, p_rw: float) -> float:
        _check_prw(p_rw)
        if p_rw == 0.0:
            return self.final_size_mean(h)
        rew = self.rewired_final_size_mean(h)
        if math.isinf(rew):
            return math.inf
        return (1.0 - p_rw) * self.final_size_mean(h) + p_rw * rew

    def mixture_pgf(self, h: int, p_rw: float, s: float,
                    backward: bool = False) -> float:
        """PGF of the local progeny when the household was rewired with
        probability p_rw: a convex combination of the two laws."""
        _check_prw(p_rw)
        if backward:
            intact = self.susceptibility_pgf(h, s)
            if p_rw == 0.0:
                return intact
            return (1.0 - p_rw) * intact + p_rw * self.rewired_susceptibility_pgf(h, s)
        intact = self.final_size_pgf(h, s)
        if p_rw == 0.0:
            return intact
        return (1.0 - p_rw) * intact + p_rw * self.rewired_final_size_pgf(h, s)

    # -- vectorized forms used by the branching-process engine ------------

    def mixture_pgf_profile(self, sizes: np.ndarray, s_by_size: np.ndarray,
                            p_rw: float, backward: bool = False) -> np.ndarray:
        """mixture_pgf evaluated at one argument per household size."""
        _check_prw(p_rw)
        sizes = np.asarray(sizes, dtype=np.int64)
        s_by_size = np.asarray(s_by_size, dtype=np.float64)
        if backward:
            intact = np.array(
                [self.susceptibility_pgf(int(h), s)
                 for h, s in zip(sizes, s_by_size)]
            )
        else:
            intact = np.array(
                [self.final_size_pgf(int(h), s)
                 for h, s in zip(sizes, s_by_size)]
            )
        if p_rw == 0.0:
            return intact
        p = self.infection.p_i
        x = _subtree_fixed_point(s_by_size, sizes, p)
        rewired = np.where(
            sizes == 1, 1.0,
            (1.0 - p + p * x) ** np.maximum(sizes - 1, 0)
        )
        two = sizes == 2
        if np.any(two):
            rewired[two] = 1.0 - p + p * s_by_size[two]
        return (1.0 - p_rw) * intact + p_rw * rewired

    def _check_size(self, h: int) -> None:
        if not 1 <= h <= self.max_size:
            raise ValueError(f"household size {h} outside 1..{self.max_size}")


def _check_prw(p_rw: float) -> None:
    if not 0.0 <= p_rw <= 1.0:
        raise ValueError("p_rw must lie in [0, 1]")


def _poly(coeffs: np.ndarray, s: float) -> float:
    # Horner on pmf coefficients: sum_k coeffs[k] s^k
    acc = 0.0
    for c in coeffs[::-1]:
        acc = acc * s + c
    return float(acc)


def _subtree_fixed_point(s: np.ndarray, sizes: np.ndarray, p: float) -> np.ndarray:
    """Smallest solution of x = s (1 - p + p x)^(h-2), elementwise, by
    monotone iteration from 0 (sizes < 3 are passed through untouched)."""
    x = np.zeros_like(s)
    expo = np.maximum(sizes - 2, 0)
    for _ in range(_FIXED_POINT_MAX_ITER):
        nxt = s * (1.0 - p + p * x) ** expo
        if np.max(np.abs(nxt - x)) < _FIXED_POINT_TOL:
            return nxt
        x = nxt
    return x  # exactly-critical cases approach 1 like 1/k; close enough
