"""Multitype branching-process epidemic analytics.

In the large-n limit the early epidemic on a generated network is a
branching process whose particles are globally infected individuals,
typed by the sorting block (quantile) of the stub along which infection
arrived.  A particle of type i has total degree d with probability
P(D = d | Q = i) from the quantile table, household size h with the
size- and degree-consistent weight, and produces global offspring two
ways: through its own d - h remaining global stubs, and through the
global stubs of the housemates its local epidemic reaches.  Each stub
transmits with probability p_i and lands in a block drawn from the
pairing kernel (labelled, probability |r|) or uniformly (unlabelled).

The offspring mean matrix gives the threshold R* (its Perron root); the
type-indexed extinction probabilities solve a monotone fixed point of
the offspring PGFs.  Running the same construction backwards over
susceptibility sets gives the expected major-outbreak relative final
size z; for a constant infectious period the forward and backward laws
coincide and the major-outbreak probability equals z.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import (
    DiscreteDist,
    InfectionSpec,
    pairing_kernels,
    quantile_table,
    size_bias,
    stub_degree_law,
)
from .errors import (
    ConstantPeriodRequired,
    Infeasible,
    InvalidTarget,
    NonConvergence,
    ReducibleMatrixWarning,
)
from .household import HouseholdEngine
from .netgen import GenSpec
from .netprops import poisson_c_rho

_POWER_TOL = 1e-12
_POWER_MAX_ITER = 100_000
_FP_TOL = 1e-13
_FP_MAX_ITER = 500_000
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Single source of truth for the analytics and the simulations."""

    household: DiscreteDist
    global_degree: DiscreteDist
    r: float
    n_q: int
    infection: InfectionSpec
    p_rw: float = 0.0

    def __post_init__(self):
        if self.household.min_support() < 1:
            raise ValueError("household sizes must be >= 1")
        if not -1.0 <= self.r <= 1.0:
            raise ValueError("r must lie in [-1, 1]")
        if self.n_q < 1:
            raise ValueError("n_q must be >= 1")
        if not 0.0 <= self.p_rw <= 1.0:
            raise ValueError("p_rw must lie in [0, 1]")

    def gen_spec(self, n: int) -> GenSpec:
        return GenSpec(n=n, household=self.household,
                       global_degree=self.global_degree, r=self.r, n_q=self.n_q)


@dataclass(frozen=True)
class MeanMatrix:
    """Offspring means between types; entries may be inf when rewiring
    makes some local epidemic supercritical."""

    entries: np.ndarray
    has_infinite: bool


@dataclass(frozen=True)
class AnalyticReport:
    r_star: float
    p_major: Optional[float]
    z: float
    sigma: Optional[np.ndarray]
    xi: np.ndarray
    has_infinite: bool


class BranchingModel:
    """Assembles every table the branching analytics need for one
    parameter set and caches intermediate results."""

    def __init__(self, params: ModelParams):
        self.params = params
        p = params
        self.h_vals = p.household.support.astype(np.int64)
        self.h_probs = p.household.probs
        self.h_tilde = size_bias(p.household)
        # household law is supported on >= 1, so biasing keeps the support
        self.pi_tilde = self.h_tilde.probs

        self.d_tilde = stub_degree_law(p.household, p.global_degree)
        self.table = quantile_table(self.d_tilde, p.n_q)
        self.kernels = pairing_kernels(self.table, p.r)
        self.d_vals = self.table.degrees.astype(np.int64)
        self._row_of = {int(d): i for i, d in enumerate(self.d_vals)}

        g_tilde = size_bias(p.global_degree)
        g_dense = np.zeros(p.global_degree.max_support() + 2)
        g_dense[g_tilde.support] = g_tilde.probs

        # household-size weights given total degree: pi~_h p~_G(d - h + 1)
        shift = self.d_vals[:, None] - self.h_vals[None, :] + 1
        valid = (shift >= 0) & (shift < g_dense.size)
        raw = np.where(valid, g_dense[np.clip(shift, 0, g_dense.size - 1)], 0.0)
        raw = raw * self.pi_tilde[None, :]
        rows = raw.sum(axis=1)
        self.size_given_degree = raw / np.where(rows > 0.0, rows, 1.0)[:, None]

        self.exponents = np.maximum(self.d_vals[:, None] - self.h_vals[None, :], 0)

        gk = p.global_degree.support >= 1
        self.g1_vals = p.global_degree.support[gk].astype(np.int64)
        self.g1_probs = p.global_degree.probs[gk]
        self.g0_prob = 1.0 - float(self.g1_probs.sum())
        self.mu_g = p.global_degree.mean()

        # rows of the stub-degree table reached as g + h - 1
        self.partner_rows = np.empty((self.h_vals.size, self.g1_vals.size),
                                     dtype=np.int64)
        for hi, h in enumerate(self.h_vals):
            for gi, g in enumerate(self.g1_vals):
                self.partner_rows[hi, gi] = self._row_of[int(g + h - 1)]

        self.households = HouseholdEngine(p.infection, int(self.h_vals.max()))
        self._mean_matrix: Optional[MeanMatrix] = None
        self._r_star: Optional[float] = None

    # -- offspring mean matrix and threshold ------------------------------

    def mean_matrix(self) -> MeanMatrix:
        if self._mean_matrix is not None:
            return self._mean_matrix
        p = self.params
        n_q = p.n_q
        abs_r = abs(p.r)
        p_i = p.infection.p_i

        mu_mix = np.array(
            [self.households.mixture_mean(int(h), p.p_rw) for h in self.h_vals]
        )
        inf_h = np.isinf(mu_mix)
        mu_fin = np.where(inf_h, 0.0, mu_mix)

        # q_i(h) and the per-type mean count of spare stubs A_i
        q_ih = self.table.d_given_q.T @ self.size_given_degree       # (n_q, n_h)
        mean_h_given_d = self.size_given_degree @ self.h_vals.astype(float)
        a_i = self.table.d_given_q.T @ (self.d_vals - mean_h_given_d)

        # w_j^(h): mean labelled-stub kernel weight of a housemate's stubs
        deg_kernel = self.kernels.degree_kernel
        w_hj = np.zeros((self.h_vals.size, n_q))
        for hi in range(self.h_vals.size):
            rows = self.partner_rows[hi]
            w_hj[hi] = (self.g1_probs * self.g1_vals) @ deg_kernel[rows]

        u_fin = q_ih @ mu_fin
        v_fin = (q_ih * mu_fin[None, :]) @ w_hj

        kernel = self.kernels.quantile_kernel
        entries = p_i * (
            a_i[:, None] * ((1.0 - abs_r) / n_q + abs_r * kernel)
            + (1.0 - abs_r) * self.mu_g / n_q * u_fin[:, None]
            + abs_r * v_fin
        )

        has_infinite = False
        if np.any(inf_h) and p_i > 0.0:
            carrier = q_ih[:, inf_h] > 0.0                            # (n_q, #inf)
            if (1.0 - abs_r) * self.mu_g > 0.0:
                rows_inf = carrier.any(axis=1)
                entries[rows_inf, :] = np.inf
                has_infinite = has_infinite or bool(rows_inf.any())
            if abs_r > 0.0:
                cells = carrier @ (w_hj[inf_h] > 0.0)
                entries[cells] = np.inf
                has_infinite = has_infinite or bool(cells.any())
        self._mean_matrix = MeanMatrix(entries, has_infinite)
        return self._mean_matrix

    def r_star(self) -> float:
        if self._r_star is None:
            self._r_star = r_star(self.mean_matrix())
        return self._r_star

    # -- offspring PGF fixed points ---------------------------------------

    def _partner_block_mix(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-type and per-degree expected s at the partner's block."""
        p = self.params
        abs_r = abs(p.r)
        mean_s = float(np.mean(s))
        by_type = (1.0 - abs_r) * mean_s + abs_r * (self.kernels.quantile_kernel @ s)
        by_degree = (1.0 - abs_r) * mean_s + abs_r * (self.kernels.degree_kernel @ s)
        return by_type, by_degree

    def _stub_pgfs(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """g_i(s), the spare-stub factor per type; and f1_h(s), the PGF of
        one housemate's global transmissions, per household size."""
        p_i = self.params.infection.p_i
        by_type, by_degree = self._partner_block_mix(s)
        g_type = 1.0 - p_i + p_i * by_type
        g_degree = 1.0 - p_i + p_i * by_degree
        powered = g_degree[self.partner_rows] ** self.g1_vals[None, :].astype(float)
        f1 = self.g0_prob + powered @ self.g1_probs
        return g_type, g_degree, f1

    def _offspring_pgf(self, s: np.ndarray, backward: bool) -> np.ndarray:
        g_type, _, f1 = self._stub_pgfs(s)
        local = self.households.mixture_pgf_profile(
            self.h_vals, f1, self.params.p_rw, backward
        )
        out = np.empty(self.params.n_q)
        for i in range(self.params.n_q):
            spare = g_type[i] ** self.exponents            # (n_d, n_h)
            inner = (self.size_given_degree * spare) @ local
            out[i] = self.table.d_given_q[:, i] @ inner
        return out

    def _ancestor_pgf(self, s: np.ndarray, backward: bool) -> float:
        _, _, f1 = self._stub_pgfs(s)
        local = self.households.mixture_pgf_profile(
            self.h_vals, f1, self.params.p_rw, backward
        )
        return float(np.dot(self.pi_tilde, f1 * local))

    def _solve_extinction(self, backward: bool) -> np.ndarray:
        s = np.zeros(self.params.n_q)
        for _ in range(_FP_MAX_ITER):
            nxt = self._offspring_pgf(s, backward)
            delta = float(np.max(np.abs(nxt - s)))
            s = nxt
            if delta < _FP_TOL:
                break
        residual = float(np.max(np.abs(self._offspring_pgf(s, backward) - s)))
        if residual > _RESIDUAL_TOL:
            raise NonConvergence(
                f"extinction fixed point residual {residual:.2e}", history=[s]
            )
        return s

    def forward_extinction(self) -> np.ndarray:
        """Extinction probability by ancestor type; all ones at or below
        threshold.  Needs a constant infectious period."""
        if not self.params.infection.is_constant:
            raise ConstantPeriodRequired(
                "forward extinction needs a constant infectious period"
            )
        if self.r_star() <= 1.0:
            return np.ones(self.params.n_q)
        return self._solve_extinction(backward=False)

    def p_major(self) -> float:
        """Probability a uniformly chosen introduction sparks a major
        outbreak (constant infectious period only)."""
        if self.r_star() <= 1.0:
            if not self.params.infection.is_constant:
                raise ConstantPeriodRequired(
                    "the outbreak probability needs a constant infectious period"
                )
            return 0.0
        sigma = self.forward_extinction()
        return 1.0 - self._ancestor_pgf(sigma, backward=False)

    def backward_extinction(self) -> np.ndarray:
        if self.r_star() <= 1.0:
            return np.ones(self.params.n_q)
        return self._solve_extinction(backward=True)

    def z_final_size(self) -> float:
        """Asymptotic relative final size of a major outbreak: the chance
        a node's susceptibility process survives."""
        if self.r_star() <= 1.0:
            return 0.0
        xi = self.backward_extinction()
        return 1.0 - self._ancestor_pgf(xi, backward=True)


def mean_matrix(params: ModelParams) -> MeanMatrix:
    return BranchingModel(params).mean_matrix()


def r_star(m: MeanMatrix) -> float:
    """Perron root of the offspring mean matrix by power iteration."""
    if m.has_infinite:
        return math.inf
    return _perron_root(m.entries)


def _is_irreducible(mat: np.ndarray) -> bool:
    n = mat.shape[0]
    if n == 1:
        return True
    reach = np.eye(n, dtype=bool) | (mat > 0.0)
    for _ in range(int(math.ceil(math.log2(n))) + 1):
        reach = reach @ reach
    return bool(reach.all())


def _perron_root(mat: np.ndarray) -> float:
    n = mat.shape[0]
    if not np.any(mat > 0.0):
        return 0.0
    if not _is_irreducible(mat):
        warnings.warn(
            "offspring mean matrix is reducible; threshold is still the "
            "largest eigenvalue but multitype theory assumes irreducibility",
            ReducibleMatrixWarning,
        )
    # identity shift keeps the iteration aperiodic (e.g. pure mirror-block
    # kernels are 2-periodic and would oscillate)
    shift = max(1.0, float(mat.max()))
    rng = np.random.default_rng(0x5EED)
    v = rng.random(n) + 0.5
    v /= v.sum()
    lam_prev = math.inf
    history = []
    for _ in range(_POWER_MAX_ITER):
        w = mat @ v + shift * v
        lam = float(w.sum())
        v = w / lam
        if abs(lam - lam_prev) <= _POWER_TOL * max(1.0, abs(lam)):
            return lam - shift
        lam_prev = lam
        if len(history) < 64:
            history.append(lam - shift)
    raise NonConvergence("power iteration did not stabilize", history=history)


def forward_extinction(params: ModelParams) -> np.ndarray:
    return BranchingModel(params).forward_extinction()


def p_major(params: ModelParams) -> float:
    return BranchingModel(params).p_major()


def backward_extinction_and_z(params: ModelParams) -> tuple[np.ndarray, float]:
    model = BranchingModel(params)
    return model.backward_extinction(), model.z_final_size()


def analyze(params: ModelParams) -> AnalyticReport:
    model = BranchingModel(params)
    rs = model.r_star()
    constant = params.infection.is_constant
    if rs <= 1.0:
        sigma = np.ones(params.n_q) if constant else None
        xi = np.ones(params.n_q)
        return AnalyticReport(rs, 0.0 if constant else None, 0.0, sigma, xi,
                              model.mean_matrix().has_infinite)
    xi = model.backward_extinction()
    z = 1.0 - model._ancestor_pgf(xi, backward=True)
    if constant:
        sigma = model.forward_extinction()
        pm = 1.0 - model._ancestor_pgf(sigma, backward=False)
    else:
        sigma, pm = None, None
    return AnalyticReport(rs, pm, z, sigma, xi,
                          model.mean_matrix().has_infinite)


# -- tuning the Poisson template ----------------------------------------


@dataclass(frozen=True)
class TuneResult:
    mu: float
    r: float
    c: float
    rho: float


def tune_poisson(gamma: float, c_target: float, rho_target: float,
                 n_q: int, tol: float = 1e-8) -> TuneResult:
    """Pick (mu, r) so the Poisson template hits (c, rho) at fixed gamma.

    Clustering pins mu = gamma sqrt(c); rho is then monotone in r, so a
    bisection on [-1, 1] closes the loop.  Targets outside the attainable
    envelope raise Infeasible carrying the swept bounds.
    """
    if gamma <= 0.0:
        raise InvalidTarget("gamma must be positive")
    if not 0.0 <= c_target < 1.0:
        raise InvalidTarget("feasible clustering targets lie in [0, 1)")
    mu = gamma * math.sqrt(c_target)
    _, rho_lo = poisson_c_rho(gamma, mu, -1.0, n_q)
    _, rho_hi = poisson_c_rho(gamma, mu, 1.0, n_q)
    if not rho_lo - 1e-12 <= rho_target <= rho_hi + 1e-12:
        raise Infeasible(
            f"rho={rho_target} outside the attainable range "
            f"[{rho_lo:.6f}, {rho_hi:.6f}] at c={c_target}",
            lo=rho_lo, hi=rho_hi,
        )
    lo, hi = -1.0, 1.0
    r = 0.0
    for _ in range(200):
        r = 0.5 * (lo + hi)
        c_val, rho_val = poisson_c_rho(gamma, mu, r, n_q)
        if abs(rho_val - rho_target) <= tol:
            return TuneResult(mu, r, c_val, rho_val)
        if rho_val < rho_target:
            lo = r
        else:
            hi = r
    c_val, rho_val = poisson_c_rho(gamma, mu, r, n_q)
    if abs(rho_val - rho_target) > tol:
        raise NonConvergence(
            f"tuning bisection stalled at rho={rho_val} for target {rho_target}"
        )
    return TuneResult(mu, r, c_val, rho_val)


def rewired_tuning(gamma: float, mu: float, r: float, p_rw: float,
                   n_q: int) -> tuple[float, float]:
    """(c, rho) reached by rewiring the tuned base template: correlation
    is untouched, clustering scales by 1 - p_rw."""
    if not 0.0 <= p_rw <= 1.0:
        raise ValueError("p_rw must lie in [0, 1]")
    c, rho = poisson_c_rho(gamma, mu, r, n_q)
    return (1.0 - p_rw) * c, rho
