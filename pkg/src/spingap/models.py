"""Mean-field spin models: statistics, symmetry classes, exact class tables.

Three model families share one interface:

* ``warmup`` -- a single integer coordinate on {-N, ..., N} with weight
  theta^|x|; the symmetry orbit of x is {x, -x}.
* ``ising`` -- N spins in {-1, +1} (N even) with weight
  exp(beta * S^2 / (2N)), S the total magnetization; orbits are the
  level sets of |S| under coordinate permutations and the global flip.
* ``beg`` -- N spins in {-1, 0, +1} (N even) with weight
  exp(-beta * R + K * beta * S^2 / N), R the number of nonzero spins;
  orbits are the level sets of (|S|, R).

All weights are held in log space; partition functions come from
log-sum-exp over class weights, never from summing raw exponentials,
so tables stay finite for N in the hundreds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

KINDS = ("warmup", "ising", "beg")

# exact integer binomials stay cheap up to here; lgamma beyond
_EXACT_BINOM_LIMIT = 60

State = Union[int, Sequence[int], np.ndarray]


class OddSizeError(ValueError):
    """The ising and beg models are defined for even N only."""


class AlphabetError(ValueError):
    """A configuration entry lies outside the model alphabet."""


@dataclass(frozen=True)
class ModelSpec:
    """Which model plus every parameter it needs, validated on construction.

    Unused parameters for a given kind are None.  ``a`` records the
    scaled-parameter mode (p1, p2 derived from a and N) when one of the
    ``scaled_*`` helpers produced this spec; it is informational only.
    """

    kind: str
    N: int
    beta: Optional[float] = None
    K: Optional[float] = None
    theta: Optional[float] = None
    p1: Optional[float] = None
    p2: Optional[float] = None
    epsilon: Optional[float] = None
    a: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}, expected one of {KINDS}")
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")
        if self.kind in ("ising", "beg"):
            if self.N % 2 != 0:
                raise OddSizeError(f"{self.kind} model requires even N, got {self.N}")
            if self.beta is None or self.beta < 0:
                raise ValueError("beta must be a nonnegative real")
            if self.p1 is not None or self.p2 is not None:
                if self.p1 is None or self.p2 is None:
                    raise ValueError("p1 and p2 must be set together")
                if not (0 < self.p1 < 1 and 0 < self.p2 < 1):
                    raise ValueError(f"p1, p2 must lie in (0,1), got {self.p1}, {self.p2}")
                if self.p1 + self.p2 >= 1:
                    raise ValueError(f"p1 + p2 must be < 1, got {self.p1 + self.p2}")
        if self.kind == "beg":
            if self.K is None or self.K <= 0:
                raise ValueError("K must be a positive real")
        if self.kind == "warmup":
            if self.theta is None or self.theta <= 1:
                raise ValueError(f"theta must be > 1, got {self.theta}")
            if self.epsilon is not None and not (0 < self.epsilon < 1):
                raise ValueError(f"epsilon must lie in (0,1), got {self.epsilon}")


def warmup(N: int, theta: float, epsilon: Optional[float] = None) -> ModelSpec:
    """Two-sided geometric-peak model on {-N, ..., N}."""
    return ModelSpec(kind="warmup", N=N, theta=theta, epsilon=epsilon)


def ising(N: int, beta: float, p1: Optional[float] = None, p2: Optional[float] = None) -> ModelSpec:
    """Mean-field Ising (Curie-Weiss) model on {-1,+1}^N."""
    return ModelSpec(kind="ising", N=N, beta=beta, p1=p1, p2=p2)


def beg(N: int, beta: float, K: float, p1: Optional[float] = None,
        p2: Optional[float] = None) -> ModelSpec:
    """Mean-field Blume-Emery-Griffiths model on {-1,0,+1}^N."""
    return ModelSpec(kind="beg", N=N, beta=beta, K=K, p1=p1, p2=p2)


class EnergyClass(NamedTuple):
    """Orbit label: (|S|, sign) for warmup/ising, (|S|, R, sign) for beg.

    ``sign`` is +1 or -1 for the two signed halves of an orbit and 0 when
    s == 0 (the orbit is its own mirror image).  ``r`` is None outside beg.
    """

    s: int
    r: Optional[int]
    sign: int


def _as_spins(spec: ModelSpec, x: State) -> np.ndarray:
    arr = np.asarray(x)
    if arr.shape != (spec.N,):
        raise AlphabetError(f"expected {spec.N} spins, got shape {arr.shape}")
    return arr


def validate_state(spec: ModelSpec, x: State) -> None:
    """Raise AlphabetError unless x is a valid configuration for spec."""
    if spec.kind == "warmup":
        xi = int(np.asarray(x))
        if not -spec.N <= xi <= spec.N:
            raise AlphabetError(f"warmup state {xi} outside [-{spec.N}, {spec.N}]")
        return
    arr = _as_spins(spec, x)
    allowed = (-1, 1) if spec.kind == "ising" else (-1, 0, 1)
    if not np.isin(arr, allowed).all():
        raise AlphabetError(f"spins must lie in {allowed}")


def magnetization(x: State) -> int:
    """Total magnetization S = sum of spins (warmup: the coordinate itself)."""
    arr = np.asarray(x)
    if arr.ndim == 0:
        return int(arr)
    return int(arr.sum())


def quadrupole(spec: ModelSpec, x: State) -> int:
    """Number of nonzero spins R = sum of x_i^2; beg only."""
    if spec.kind != "beg":
        raise ValueError(f"quadrupole is defined for the beg model, not {spec.kind}")
    return int(np.count_nonzero(_as_spins(spec, x)))


def log_weight(spec: ModelSpec, x: State) -> float:
    """Unnormalized log stationary weight of configuration x."""
    validate_state(spec, x)
    if spec.kind == "warmup":
        return abs(int(np.asarray(x))) * math.log(spec.theta)
    s = magnetization(x)
    if spec.kind == "ising":
        return spec.beta * s * s / (2 * spec.N)
    r = quadrupole(spec, x)
    return -spec.beta * r + spec.K * spec.beta * s * s / spec.N


def class_of(spec: ModelSpec, x: State) -> EnergyClass:
    """Orbit label of x under coordinate permutations and the global flip."""
    validate_state(spec, x)
    s = magnetization(x)
    sign = 0 if s == 0 else (1 if s > 0 else -1)
    if spec.kind == "beg":
        return EnergyClass(abs(s), quadrupole(spec, x), sign)
    return EnergyClass(abs(s), None, sign)


def class_log_state_weight(spec: ModelSpec, c: EnergyClass) -> float:
    """Log weight shared by every configuration in class c."""
    if spec.kind == "warmup":
        return c.s * math.log(spec.theta)
    if spec.kind == "ising":
        return spec.beta * c.s * c.s / (2 * spec.N)
    return -spec.beta * c.r + spec.K * spec.beta * c.s * c.s / spec.N


def log_binom(n: int, k: int) -> float:
    """log C(n, k); exact integer arithmetic for small n, lgamma beyond."""
    if k < 0 or k > n:
        return -math.inf
    if n <= _EXACT_BINOM_LIMIT:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def class_log_cardinality(spec: ModelSpec, c: EnergyClass) -> float:
    """Log size of the signed class c (sign 0 means the full orbit)."""
    if spec.kind == "warmup":
        return 0.0
    if spec.kind == "ising":
        return log_binom(spec.N, (spec.N - c.s) // 2)
    return log_binom(spec.N, c.r) + log_binom(c.r, (c.r - c.s) // 2)


def enumerate_beg_classes(N: int) -> list[tuple[int, int]]:
    """All (s, r) with 0 <= s <= r <= N and s = r (mod 2), sorted by (r, s)."""
    if N % 2 != 0 or N < 2:
        raise OddSizeError(f"beg class enumeration requires even N >= 2, got {N}")
    pairs = []
    for r in range(N + 1):
        start = 0 if r % 2 == 0 else 1
        for s in range(start, r + 1, 2):
            pairs.append((s, r))
    return pairs


def signed_classes(spec: ModelSpec) -> list[EnergyClass]:
    """Canonical ordered list of signed classes.

    Warmup/ising: s ascending, minus before plus.  Beg: (r, s)
    lexicographic, minus before plus.  This fixed order makes every
    matrix and CSV built on top reproducible bit for bit.
    """
    out = []
    if spec.kind == "beg":
        for s, r in enumerate_beg_classes(spec.N):
            if s == 0:
                out.append(EnergyClass(0, r, 0))
            else:
                out.append(EnergyClass(s, r, -1))
                out.append(EnergyClass(s, r, +1))
        return out
    step = 1 if spec.kind == "warmup" else 2
    for s in range(0, spec.N + 1, step):
        if s == 0:
            out.append(EnergyClass(0, None, 0))
        else:
            out.append(EnergyClass(s, None, -1))
            out.append(EnergyClass(s, None, +1))
    return out


@dataclass(frozen=True)
class ClassTable:
    """Exact signed-class weight table in log space.

    log_class_weight = log_cardinality + log_state_weight, and
    exp(log_class_weight - log_partition) sums to one.
    """

    spec: ModelSpec
    classes: tuple
    log_cardinality: np.ndarray
    log_state_weight: np.ndarray
    log_class_weight: np.ndarray
    log_partition: float

    @cached_property
    def _index(self) -> dict:
        return {c: i for i, c in enumerate(self.classes)}

    def index(self, c: EnergyClass) -> int:
        return self._index[c]

    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_class_weight - self.log_partition)

    def __len__(self) -> int:
        return len(self.classes)


def class_table(spec: ModelSpec, max_classes: int = 2_000_000) -> ClassTable:
    """Build the exact signed-class table for spec.

    The limit is on the class count (ising has N/2+1 unsigned classes,
    beg O(N^2)), never on the 2^N or 3^N configuration count.
    """
    classes = signed_classes(spec)
    if len(classes) > max_classes:
        raise ValueError(f"{len(classes)} classes exceed the limit {max_classes}")
    log_card = np.array([class_log_cardinality(spec, c) for c in classes])
    log_sw = np.array([class_log_state_weight(spec, c) for c in classes])
    log_cw = log_card + log_sw
    return ClassTable(
        spec=spec,
        classes=tuple(classes),
        log_cardinality=log_card,
        log_state_weight=log_sw,
        log_class_weight=log_cw,
        log_partition=float(logsumexp(log_cw)),
    )


# ---------------------------------------------------------------------------
# Full configuration space enumeration (small N only).
# ---------------------------------------------------------------------------

def enumerate_states(spec: ModelSpec, max_states: int = 1 << 16) -> np.ndarray:
    """All configurations in canonical index order.

    warmup: shape (2N+1,), values -N..N ascending.
    ising:  shape (2^N, N); index b has spin_j = +1 iff bit j of b is set.
    beg:    shape (3^N, N); index b has spin_j = (j-th base-3 digit) - 1.
    """
    if spec.kind == "warmup":
        return np.arange(-spec.N, spec.N + 1)
    base = 2 if spec.kind == "ising" else 3
    n_states = base ** spec.N
    if n_states > max_states:
        raise ValueError(f"{n_states} states exceed the enumeration limit {max_states}")
    idx = np.arange(n_states)
    digits = (idx[:, None] // base ** np.arange(spec.N)[None, :]) % base
    if spec.kind == "ising":
        return (2 * digits - 1).astype(np.int8)
    return (digits - 1).astype(np.int8)


def state_index(spec: ModelSpec, x: State) -> int:
    """Inverse of enumerate_states ordering."""
    if spec.kind == "warmup":
        return int(np.asarray(x)) + spec.N
    arr = _as_spins(spec, x)
    base = 2 if spec.kind == "ising" else 3
    digits = (arr + 1) // 2 if spec.kind == "ising" else arr + 1
    return int((digits * base ** np.arange(spec.N)).sum())


def log_weights_all(spec: ModelSpec) -> np.ndarray:
    """Unnormalized log weights of every enumerated configuration."""
    states = enumerate_states(spec)
    if spec.kind == "warmup":
        return np.abs(states) * math.log(spec.theta)
    s = states.sum(axis=1, dtype=np.int64)
    if spec.kind == "ising":
        return spec.beta * s.astype(float) ** 2 / (2 * spec.N)
    r = np.count_nonzero(states, axis=1)
    return -spec.beta * r.astype(float) + spec.K * spec.beta * s.astype(float) ** 2 / spec.N


# ---------------------------------------------------------------------------
# Closed-form class-weight profiles used by the unimodality machinery.
# ---------------------------------------------------------------------------

def ising_magnetization_log_profile(N: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """(i, log q(i)) with q(i) = C(N, (N-i)/2) * exp(beta i^2 / 2N), i = 0,2,..,N.

    q is the per-orbit weight before the factor 2 that the two signed
    halves contribute for i != 0.
    """
    if N % 2 != 0:
        raise OddSizeError(f"even N required, got {N}")
    i = np.arange(0, N + 1, 2)
    logq = np.array([log_binom(N, (N - ii) // 2) + beta * ii * ii / (2 * N) for ii in i])
    return i, logq


def ising_unsigned_log_weights(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """(i, log pi_bar(i)) up to normalization: the weight of the orbit X_i."""
    i, logq = ising_magnetization_log_profile(spec.N, spec.beta)
    two = np.where(i == 0, 0.0, math.log(2.0))
    return i, logq + two


def beg_row_log_profile(N: int, beta: float, K: float) -> np.ndarray:
    """log q(r) for r = 0..N, the total class weight at fixed quadrupole r.

    q(r) = C(N,r) e^{-beta r} [ C(r, r/2) + 2 sum_{s>0} C(r,(r-s)/2) e^{K beta s^2/N} ]
    with s running over 2,4,..,r for even r and 1,3,..,r for odd r.
    Valid for every N >= 1 (odd N included); the class-table route only
    exists for even N and must agree with this closed form there.
    """
    out = np.empty(N + 1)
    for r in range(N + 1):
        start = 0 if r % 2 == 0 else 1
        terms = []
        for s in range(start, r + 1, 2):
            t = log_binom(r, (r - s) // 2) + K * beta * s * s / N
            if s > 0:
                t += math.log(2.0)
            terms.append(t)
        out[r] = log_binom(N, r) - beta * r + logsumexp(terms)
    return out


def beg_row_log_weights(table: ClassTable) -> np.ndarray:
    """log q(r) reconstructed by summing the signed class table at fixed r."""
    spec = table.spec
    if spec.kind != "beg":
        raise ValueError("row weights are a beg concept")
    out = np.full(spec.N + 1, -np.inf)
    for r in range(spec.N + 1):
        sel = [i for i, c in enumerate(table.classes) if c.r == r]
        if sel:
            out[r] = logsumexp(table.log_class_weight[sel])
    return out


def beg_conditional_log_weights(table: ClassTable, r: int) -> tuple[np.ndarray, np.ndarray]:
    """(s, log weight) of the orbits at fixed quadrupole r, s ascending."""
    spec = table.spec
    svals = []
    logs = []
    start = 0 if r % 2 == 0 else 1
    for s in range(start, r + 1, 2):
        sel = [i for i, c in enumerate(table.classes) if c.r == r and c.s == s]
        svals.append(s)
        logs.append(logsumexp(table.log_class_weight[sel]))
    return np.array(svals), np.array(logs)
