"""Exact spectral and geometric analysis of reversible kernels.

Eigenvalues come from the symmetrization D^{1/2} P D^{-1/2} (D the
diagonal of stationary weights), computed with a dense symmetric solver;
birth--death chains route to the symmetric-tridiagonal solver.  On top
of the spectrum: spectral gap, exhaustive conductance with the Cheeger
sandwich, the chain-decomposition lower bound, the birth--death path
bound, the Gershgorin bound, asymptotic variance, and the total
variation convergence bound.

Every inequality evaluation returns a structured record (name, value,
hypotheses flag) so reports can audit them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .kernels import BirthDeathChain, FiniteKernel, Partition, lumped_projection, restriction

#: gaps below this are reported as "below resolution" rather than zero:
#: slow chains at large beta*N sit under the floating-point floor and the
#: report must distinguish underflow from disconnection.
GAP_RESOLUTION = 1e-12

DEFAULT_MAX_DENSE = 8192


class NonReversibleError(ValueError):
    """Detailed balance fails beyond tolerance; the symmetrization is invalid."""


class ReducibleChainError(ValueError):
    """Eigenvalue 1 has multiplicity > 1."""


class HypothesisError(ValueError):
    """A bound was requested whose hypotheses fail on the given chain."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending; eigenvalues[0] is 1 up to solver noise."""

    eigenvalues: np.ndarray
    dim: int


@dataclass(frozen=True)
class BoundEvaluation:
    """One inequality evaluation: value plus whether its hypotheses held."""

    name: str
    value: float
    hypotheses_ok: bool
    detail: Optional[str] = None


@dataclass(frozen=True)
class SpectralSummary:
    gap: float
    lambda1: float
    lambda_min: float
    dim: int
    below_resolution: bool
    conductance: Optional[float] = None
    cheeger_lower: Optional[float] = None
    cheeger_upper: Optional[float] = None
    bounds: tuple = ()


Chain = Union[FiniteKernel, BirthDeathChain]


def _symmetrize(kernel: FiniteKernel) -> np.ndarray:
    lw = kernel.log_pi
    P = kernel.P
    mask = P > 0
    S = np.zeros_like(P)
    diff = 0.5 * (lw[:, None] - lw[None, :])
    S[mask] = P[mask] * np.exp(diff[mask])
    return 0.5 * (S + S.T)


def spectrum(chain: Chain, max_dense: int = DEFAULT_MAX_DENSE,
             reversibility_tol: float = 1e-8) -> Spectrum:
    """All eigenvalues of a reversible chain, sorted descending.

    FiniteKernel inputs are checked for detailed balance first and
    rejected beyond ``reversibility_tol``; birth--death chains go to the
    symmetric-tridiagonal solver with off-diagonals
    sqrt(up_i * down_{i+1}).
    """
    if isinstance(chain, BirthDeathChain):
        if chain.n == 1:
            return Spectrum(eigenvalues=np.array([1.0]), dim=1)
        d = chain.hold
        e = np.sqrt(chain.up[:-1] * chain.down[1:])
        vals = scipy.linalg.eigh_tridiagonal(d, e, eigvals_only=True)
        return Spectrum(eigenvalues=vals[::-1].copy(), dim=chain.n)
    if chain.n > max_dense:
        raise ValueError(f"{chain.n} states exceed the dense eigensolver cap {max_dense}")
    if chain.n == 1:
        return Spectrum(eigenvalues=np.array([1.0]), dim=1)
    err = chain.detailed_balance_error()
    if err > reversibility_tol:
        raise NonReversibleError(f"detailed-balance residual {err} exceeds {reversibility_tol}")
    vals = scipy.linalg.eigvalsh(_symmetrize(chain))
    return Spectrum(eigenvalues=vals[::-1].copy(), dim=chain.n)


def eigensystem(kernel: FiniteKernel,
                reversibility_tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """(eigenvalues descending, orthonormal eigenvectors of the symmetrization)."""
    err = kernel.detailed_balance_error()
    if err > reversibility_tol:
        raise NonReversibleError(f"detailed-balance residual {err} exceeds {reversibility_tol}")
    vals, vecs = scipy.linalg.eigh(_symmetrize(kernel))
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def gap(s: Spectrum) -> float:
    """1 - max(lambda_1, |lambda_min|); a one-state chain has gap 1."""
    if s.dim == 1:
        return 1.0
    lam1 = float(s.eigenvalues[1])
    lam_min = float(s.eigenvalues[-1])
    return 1.0 - max(lam1, abs(lam_min))


def spectral_gap(chain: Chain, **kw) -> float:
    return gap(spectrum(chain, **kw))


def spectral_summary(chain: Chain, with_conductance: bool = False,
                     bounds: Sequence[BoundEvaluation] = ()) -> SpectralSummary:
    s = spectrum(chain)
    g = gap(s)
    lam1 = float(s.eigenvalues[1]) if s.dim > 1 else 1.0
    lam_min = float(s.eigenvalues[-1])
    h = lo = hi = None
    if with_conductance:
        if isinstance(chain, BirthDeathChain):
            chain = chain.to_kernel()
        h, _ = conductance_exact(chain)
        lo, hi = cheeger_interval(h)
    return SpectralSummary(
        gap=g, lambda1=lam1, lambda_min=lam_min, dim=s.dim,
        below_resolution=bool(g < GAP_RESOLUTION),
        conductance=h, cheeger_lower=lo, cheeger_upper=hi,
        bounds=tuple(bounds),
    )


# ---------------------------------------------------------------------------
# Conductance.
# ---------------------------------------------------------------------------

def conductance_exact(kernel: FiniteKernel,
                      max_states: int = 24) -> tuple[float, tuple]:
    """Exact conductance h = min_{0 < p(A) <= 1/2} Q(A, A^c)/p(A).

    Exhaustive over all 2^n subsets via a bitmask subset-sum sweep, so
    the state count is capped (default 24).  Returns (h, minimizing set
    of state indices).
    """
    n = kernel.n
    if n > max_states:
        raise ValueError(f"exhaustive conductance is capped at {max_states} states, got {n}")
    if n < 2:
        raise ValueError("conductance needs at least two states")
    pi = kernel.stationary()
    Q = pi[:, None] * kernel.P
    Q = 0.5 * (Q + Q.T)
    rowsum = Q.sum(axis=1)
    size = 1 << n
    pA = np.zeros(size)
    FA = np.zeros(size)
    for b in range(n):
        step = 1 << b
        pA.reshape(-1, 2 * step)[:, step:] += pi[b]
        FA.reshape(-1, 2 * step)[:, step:] += rowsum[b]
    # subtract W(A) = sum_{x,y in A} Q(x,y), assembled per highest bit
    for b in range(n):
        step = 1 << b
        Tb = np.zeros(step)
        for c in range(b):
            cstep = 1 << c
            Tb.reshape(-1, 2 * cstep)[:, cstep:] += Q[c, b]
        FA.reshape(-1, 2 * step)[:, step:] -= 2.0 * Tb + Q[b, b]
    valid = (pA > 0) & (pA <= 0.5 * (1 + 1e-12))
    valid[0] = False
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(FA, pA, out=FA)
    FA[~valid] = np.inf
    best = int(np.argmin(FA))
    h = max(float(FA[best]), 0.0)
    members = tuple(i for i in range(n) if best >> i & 1)
    return h, members


def interval_conductance(kernel: FiniteKernel) -> tuple[float, int]:
    """Bottleneck over the n-1 interval cuts in the kernel's state order.

    For the cut between k and k+1 the admissible side is the one with
    mass <= 1/2, so the candidate ratio is flow(k) / min(m_k, 1 - m_k).
    Minimizing over a subfamily of sets only, the result is an upper
    bound on the true conductance h, not h itself; it is the honest
    bottleneck diagnostic for birth--death orderings.  Returns
    (bound, cut index k).
    """
    n = kernel.n
    if n < 2:
        raise ValueError("conductance needs at least two states")
    pi = kernel.stationary()
    Q = pi[:, None] * kernel.P
    Q = 0.5 * (Q + Q.T)
    best = math.inf
    best_k = 0
    flow = 0.0
    mass = 0.0
    rowsum = Q.sum(axis=1)
    for k in range(n - 1):
        # extend the prefix by state k; flow across the cut updates by
        # the new state's outward mass minus what now stays inside
        cross_in = Q[:k, k].sum() if k else 0.0
        flow = flow + rowsum[k] - Q[k, k] - 2 * cross_in
        mass += pi[k]
        side = min(mass, 1.0 - mass)
        if side > 0 and flow / side < best:
            best = flow / side
            best_k = k
    return max(best, 0.0), best_k


def cut_bottleneck_log(kernel: FiniteKernel, subset: Sequence[int]) -> float:
    """log of Q(A, A^c)/p(A) for one cut, computed entirely in log space.

    The value upper-bounds log h whenever p(A) <= 1/2 (checked exactly by
    comparing log masses), and log(2) more upper-bounds log(1 - lambda_1)
    through the Cheeger inequality.  Stays finite far below the floating
    floor, which is what makes the deep slow-mixing cells auditable.
    """
    from scipy.special import logsumexp

    n = kernel.n
    inA = np.zeros(n, dtype=bool)
    inA[np.asarray(list(subset), dtype=np.intp)] = True
    if not inA.any() or inA.all():
        raise ValueError("cut must be a proper nonempty subset")
    lw = kernel.log_pi
    log_mass = logsumexp(lw[inA])
    log_comp = logsumexp(lw[~inA])
    if log_mass > log_comp:
        raise ValueError("subset carries more than half the stationary mass")
    terms = []
    for i in np.flatnonzero(inA):
        row = kernel.P[i]
        for j in np.flatnonzero(~inA):
            if row[j] > 0:
                terms.append(lw[i] + math.log(row[j]))
    if not terms:
        return -math.inf
    return float(logsumexp(terms)) - float(log_mass)


def cheeger_interval(h: float) -> tuple[float, float]:
    """The two-sided Cheeger bound on lambda_1: (1 - 2h, 1 - h^2/2)."""
    if not 0 <= h <= 1:
        raise ValueError(f"conductance must lie in [0,1], got {h}")
    return 1.0 - 2.0 * h, 1.0 - h * h / 2.0


# ---------------------------------------------------------------------------
# Bounds.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionBound:
    """Gap(P) >= 1/2 Gap(P_H) min_i Gap(P_{A_i}): the right-hand side."""

    value: float
    projection_gap: float
    min_restriction_gap: float
    restriction_gaps: tuple


def decomposition_bound(kernel: FiniteKernel, parts: Partition) -> DecompositionBound:
    """Evaluate the decomposition lower bound for the given partition."""
    H = lumped_projection(kernel, parts)
    gap_H = gap(spectrum(H))
    gaps = []
    for block in parts.blocks:
        R = restriction(kernel, block)
        gaps.append(gap(spectrum(R)))
    min_gap = min(gaps)
    return DecompositionBound(
        value=0.5 * gap_H * min_gap,
        projection_gap=gap_H,
        min_restriction_gap=min_gap,
        restriction_gaps=tuple(gaps),
    )


def log_profile_peak(log_pi: np.ndarray) -> int:
    """Index of the maximal stationary weight (first one on ties)."""
    return int(np.argmax(log_pi))


def bd_path_bound(chain: BirthDeathChain, A: float, q: float, B: float, k: int,
                  strict: bool = True) -> BoundEvaluation:
    """Path bound lambda_1 <= 1 - (A/B) n^{-(q+2)} for a birth--death chain.

    Hypotheses, checked programmatically: every defined up/down rate is
    >= A n^{-q}, and the stationary weights are B-unimodal around index
    k (pi_i <= B pi_j for i <= j <= k, pi_j <= B pi_i for k <= i <= j).
    With strict=True a violation raises HypothesisError naming the
    offending rate or pair; otherwise the returned record carries
    hypotheses_ok=False and the violation text.
    """
    n = chain.n
    if not 0 <= k < n:
        raise ValueError(f"peak index {k} outside 0..{n - 1}")
    threshold = A * float(n) ** (-q)
    logB = math.log(B)
    lp = chain.log_pi
    tol = 1e-12
    violation = None
    rates = [("up", i, chain.up[i]) for i in range(n - 1)]
    rates += [("down", i, chain.down[i]) for i in range(1, n)]
    for name, i, rate in rates:
        if rate < threshold * (1 - 1e-12):
            violation = (f"{name} rate at index {i} is {rate:.6g} < A n^-q = "
                         f"{threshold:.6g}")
            break
    if violation is None:
        run_max = -math.inf
        for j in range(k + 1):
            run_max = max(run_max, lp[j])
            if run_max > logB + lp[j] + tol:
                i = int(np.argmax(lp[: j + 1]))
                violation = (f"monotone-up condition fails: pi({i}) > B pi({j}) "
                             f"left of the peak k={k}")
                break
    if violation is None:
        run_max = -math.inf
        for i in range(n - 1, k - 1, -1):
            run_max = max(run_max, lp[i])
            if run_max > logB + lp[i] + tol:
                j = int(k + np.argmax(lp[k:]))
                violation = (f"monotone-down condition fails: pi({j}) > B pi({i}) "
                             f"right of the peak k={k}")
                break
    value = 1.0 - (A / B) * float(n) ** (-(q + 2.0))
    if violation is not None and strict:
        raise HypothesisError(violation)
    return BoundEvaluation(name="bd-path", value=value,
                           hypotheses_ok=violation is None, detail=violation)


def gershgorin_bound(chain: Chain) -> float:
    """lambda_min >= -1 + 2 min_i P(i,i)."""
    diag = chain.hold if isinstance(chain, BirthDeathChain) else np.diag(chain.P)
    return -1.0 + 2.0 * float(diag.min())


def lazy_mixture_bound(gap_of_p: float, epsilon: float) -> float:
    """Gap((1-eps) P + eps I) >= (1-eps) Gap(P)."""
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0,1], got {epsilon}")
    return (1.0 - epsilon) * gap_of_p


# ---------------------------------------------------------------------------
# Asymptotic variance and convergence.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticVariance:
    avar: float
    gap_bound: float      # 2 Var_pi(f) / (1 - lambda_1)
    variance: float
    degenerate: bool = False


def avar_spectral(kernel: FiniteKernel, f: Sequence[float]) -> AsymptoticVariance:
    """Asymptotic variance of the trajectory average of f.

    AVar = sum_{k>=1} a_k^2 (1+lambda_k)/(1-lambda_k) over the
    eigenexpansion; also evaluates the gap bound 2 Var_pi(f)/(1-lambda_1)
    and verifies AVar does not exceed it.  A constant f yields 0 with the
    degenerate flag; a reducible chain (second unit eigenvalue) raises.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (kernel.n,):
        raise ValueError(f"observable has shape {f.shape}, expected ({kernel.n},)")
    pi = kernel.stationary()
    mu = float(pi @ f)
    var = float(pi @ (f - mu) ** 2)
    if var < 1e-28:
        return AsymptoticVariance(avar=0.0, gap_bound=0.0, variance=0.0, degenerate=True)
    vals, vecs = eigensystem(kernel)
    if vals[1] > 1 - 1e-12:
        raise ReducibleChainError(f"second eigenvalue {vals[1]} is numerically 1")
    coeff = vecs.T @ (f * np.sqrt(pi))
    lam = vals[1:]
    a2 = coeff[1:] ** 2
    avar = float(np.sum(a2 * (1 + lam) / (1 - lam)))
    bound = 2.0 * var / (1.0 - float(vals[1]))
    if avar > bound * (1 + 1e-10) + 1e-12:
        raise AssertionError(f"spectral AVar {avar} exceeds its gap bound {bound}")
    return AsymptoticVariance(avar=avar, gap_bound=bound, variance=var)


def tv_bound(kernel: FiniteKernel, x: int, k: int) -> float:
    """Total-variation convergence bound from state index x after k steps.

    sqrt((1 - p(x)) / (4 p(x))) * max(lambda_1, |lambda_min|)^k.
    """
    if k < 0:
        raise ValueError("step count must be nonnegative")
    pi = kernel.stationary()
    px = float(pi[x])
    if px <= 0.0:
        raise ValueError(f"state {x} has zero stationary mass")
    s = spectrum(kernel)
    rho = max(float(s.eigenvalues[1]), abs(float(s.eigenvalues[-1]))) if s.dim > 1 else 0.0
    rho = max(rho, 0.0)
    return math.sqrt((1.0 - px) / (4.0 * px)) * rho ** k
