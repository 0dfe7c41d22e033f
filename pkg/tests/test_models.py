import math
from collections import Counter

import numpy as np
import pytest
from scipy.special import logsumexp

from spingap import models
from spingap.models import (
    AlphabetError,
    EnergyClass,
    OddSizeError,
    beg,
    class_of,
    class_table,
    enumerate_beg_classes,
    enumerate_states,
    ising,
    log_weight,
    magnetization,
    quadrupole,
    state_index,
    warmup,
)


def test_spec_validation():
    with pytest.raises(OddSizeError):
        ising(5, beta=1.0)
    with pytest.raises(OddSizeError):
        beg(7, beta=1.0, K=1.0)
    with pytest.raises(ValueError):
        warmup(4, theta=1.0)
    with pytest.raises(ValueError):
        ising(4, beta=1.0, p1=0.8, p2=0.3)
    with pytest.raises(ValueError):
        ising(4, beta=1.0, p1=0.5, p2=None)
    with pytest.raises(ValueError):
        beg(4, beta=1.0, K=-2.0)
    with pytest.raises(ValueError):
        warmup(4, theta=2.0, epsilon=1.0)


def test_magnetization():
    assert magnetization([1, 1, -1, -1]) == 0
    assert magnetization([1, 1, 1, 1]) == 4
    assert magnetization([1, 0, -1, 1]) == 1
    assert magnetization(-3) == -3


def test_quadrupole():
    m = beg(4, beta=1.0, K=1.0)
    assert quadrupole(m, [1, 0, -1, 1]) == 3
    assert quadrupole(m, [0, 0, 0, 0]) == 0
    assert quadrupole(m, [-1, -1, -1, -1]) == 4
    with pytest.raises(ValueError):
        quadrupole(ising(4, beta=1.0), [1, 1, -1, -1])


def test_log_weight_values():
    m = ising(4, beta=1.0)
    assert log_weight(m, [1, 1, -1, -1]) == 0.0
    # S = 4: beta * 16 / (2*4) = 2.0
    assert log_weight(m, [1, 1, 1, 1]) == pytest.approx(2.0, abs=1e-15)
    b = beg(4, beta=1.0, K=1.0)
    # S = 0, R = 2: -beta*R + K*beta*S^2/N = -2
    assert log_weight(b, [1, -1, 0, 0]) == pytest.approx(-2.0, abs=1e-15)
    with pytest.raises(AlphabetError):
        log_weight(m, [1, 0, -1, 1])
    with pytest.raises(AlphabetError):
        log_weight(b, [2, 0, 0, 0])


def test_log_weight_vs_exhaustive_enumeration():
    # oracle: evaluate the exponent directly on every enumerated state
    b = beg(4, beta=1.3, K=0.7)
    states = enumerate_states(b)
    for x in states:
        s = int(x.sum())
        r = int(np.count_nonzero(x))
        expected = -b.beta * r + b.K * b.beta * s * s / b.N
        assert log_weight(b, x) == pytest.approx(expected, abs=1e-14)


def test_class_of():
    m = ising(4, beta=1.0)
    assert class_of(m, [1, -1, 1, 1]) == EnergyClass(2, None, 1)
    b = beg(4, beta=1.0, K=1.0)
    assert class_of(b, [-1, -1, 0, 0]) == EnergyClass(2, 2, -1)
    w = warmup(5, theta=2.0)
    assert class_of(w, -3) == EnergyClass(3, None, -1)


def _orbit_key(x):
    # multiset of spins up to global sign: the S_N x {+1,-1} orbit invariant
    a = tuple(sorted(x))
    b = tuple(sorted(-v for v in x))
    return min(a, b)


@pytest.mark.parametrize("spec", [ising(6, beta=0.8), beg(4, beta=1.1, K=0.9)])
def test_class_equals_orbit(spec):
    # two states share a class label iff one lies in the other's orbit
    states = enumerate_states(spec)
    by_class = {}
    by_orbit = {}
    for x in states:
        by_class.setdefault(class_of(spec, x), set()).add(tuple(x))
        by_orbit.setdefault(_orbit_key(x), set()).add(tuple(x))
    unsigned = {}
    for c, members in by_class.items():
        unsigned.setdefault((c.s, c.r), set()).update(members)
    assert set(map(frozenset, unsigned.values())) == set(map(frozenset, by_orbit.values()))


@pytest.mark.parametrize("spec", [ising(8, beta=1.7), beg(6, beta=0.6, K=2.0)])
def test_log_weight_constant_on_classes(spec):
    states = enumerate_states(spec)
    seen = {}
    for x in states:
        c = class_of(spec, x)
        lw = log_weight(spec, x)
        if c in seen:
            assert lw == seen[c]  # integer statistics: exactly equal
        else:
            seen[c] = lw


def test_enumerate_beg_classes():
    assert enumerate_beg_classes(2) == [(0, 0), (1, 1), (0, 2), (2, 2)]
    pairs4 = enumerate_beg_classes(4)
    assert len(pairs4) == 9
    assert (2, 4) in pairs4 and (0, 4) in pairs4
    with pytest.raises(OddSizeError):
        enumerate_beg_classes(5)
    # brute-force oracle: collect distinct (|S|, R) over all states
    spec = beg(4, beta=1.0, K=1.0)
    states = enumerate_states(spec)
    found = sorted(
        {(abs(int(x.sum())), int(np.count_nonzero(x))) for x in states},
        key=lambda t: (t[1], t[0]),
    )
    assert found == pairs4


@pytest.mark.parametrize("N", [2, 4, 6, 8, 10, 12])
def test_beg_class_count_closed_form(N):
    count = sum(r // 2 + 1 for r in range(0, N + 1, 2)) + sum(
        (r + 1) // 2 for r in range(1, N + 1, 2)
    )
    assert len(enumerate_beg_classes(N)) == count


@pytest.mark.parametrize("N", [2, 4, 6, 8, 10])
def test_ising_cardinalities_vs_enumeration(N):
    spec = ising(N, beta=1.0)
    table = class_table(spec)
    states = enumerate_states(spec)
    counts = Counter(class_of(spec, x) for x in states)
    for c, logcard in zip(table.classes, table.log_cardinality):
        assert math.exp(logcard) == pytest.approx(counts[c], rel=1e-12)
    # spot check the printed binomial: |X_2^+| = C(4,1) = 4
    t4 = class_table(ising(4, beta=1.0))
    assert math.exp(t4.log_cardinality[t4.index(EnergyClass(2, None, 1))]) == pytest.approx(4.0)


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_beg_cardinalities_vs_enumeration(N):
    spec = beg(N, beta=0.9, K=1.4)
    table = class_table(spec)
    states = enumerate_states(spec)
    counts = Counter(class_of(spec, x) for x in states)
    assert set(counts) == set(table.classes)
    for c, logcard in zip(table.classes, table.log_cardinality):
        assert math.exp(logcard) == pytest.approx(counts[c], rel=1e-12)


def test_class_table_normalization_and_partition():
    for spec in (ising(12, beta=2.0), beg(8, beta=1.5, K=3.0), warmup(30, theta=2.0)):
        table = class_table(spec)
        probs = table.probabilities()
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(table.log_class_weight == table.log_cardinality + table.log_state_weight)


def test_class_table_matches_brute_force_partition():
    spec = ising(4, beta=1.0)
    table = class_table(spec)
    # enumerate all 16 states and lump
    lws = models.log_weights_all(spec)
    assert table.log_partition == pytest.approx(logsumexp(lws), abs=1e-12)
    # class X_0 has 6 states of weight 1 -> class weight 6
    i0 = table.index(EnergyClass(0, None, 0))
    assert math.exp(table.log_class_weight[i0]) == pytest.approx(6.0, rel=1e-12)


def test_warmup_table_and_states():
    spec = warmup(6, theta=2.0)
    table = class_table(spec)
    assert len(table) == 2 * spec.N + 1
    states = enumerate_states(spec)
    assert states[0] == -6 and states[-1] == 6
    # singleton classes: exact geometric weights
    iplus = table.index(EnergyClass(4, None, 1))
    assert table.log_class_weight[iplus] == pytest.approx(4 * math.log(2.0), abs=1e-14)


def test_state_index_roundtrip():
    for spec in (ising(6, beta=1.0), beg(4, beta=1.0, K=1.0), warmup(5, theta=1.5)):
        states = enumerate_states(spec)
        for i in np.linspace(0, len(states) - 1, 17).astype(int):
            assert state_index(spec, states[i]) == i


@pytest.mark.parametrize("N", [2, 4, 8, 14, 20])
def test_beg_row_profile_matches_table(N):
    # closed-form row profile vs summing the signed class table over s
    spec = beg(N, beta=1.2, K=0.8)
    table = class_table(spec)
    direct = models.beg_row_log_profile(N, spec.beta, spec.K)
    from_table = models.beg_row_log_weights(table)
    assert np.allclose(direct, from_table, rtol=1e-12, atol=1e-12)


def test_beg_row_profile_odd_N_runs():
    # the closed form stays meaningful at odd N (table route requires even)
    prof = models.beg_row_log_profile(15, beta=1.0, K=1.0)
    assert prof.shape == (16,)
    assert np.isfinite(prof).all()


def test_log_binom_exact_and_lgamma_agree():
    for n in (40, 60, 61, 200):
        for k in (0, 1, n // 3, n // 2, n):
            exact = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
            assert models.log_binom(n, k) == pytest.approx(exact, rel=1e-12, abs=1e-12)
    assert models.log_binom(5, 7) == -math.inf
