import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from y00sim.constellation import (
    Constellation,
    amplitudes,
    decode,
    encode,
    state_amplitude,
)
from y00sim.errors import DomainError

powers = st.integers(min_value=2, max_value=12).map(lambda k: 1 << k)


def naive_table(M):
    """State index for every (bit, basis) pair, spelled out case by case."""
    half = M // 2
    table = {}
    for r in range(half):
        if r % 2 == 0:
            table[(0, r)], table[(1, r)] = r, r + half
        else:
            table[(0, r)], table[(1, r)] = r + half, r
    return table


@pytest.mark.parametrize("M, alpha0, ell, want", [
    (16, 5.0, 0, (5.0, 0.0)),
    (16, 5.0, 8, (-5.0, 0.0)),
    (4, 2.0, 1, (0.0, 2.0)),
])
def test_state_amplitude_examples(M, alpha0, ell, want):
    a = state_amplitude(Constellation(M, alpha0), ell)
    assert a.real == pytest.approx(want[0], abs=1e-12)
    assert a.imag == pytest.approx(want[1], abs=1e-12)


@pytest.mark.parametrize("b, r, ell", [(0, 0, 0), (0, 1, 9), (1, 2, 10)])
def test_encode_decode_examples(b, r, ell):
    c = Constellation(16, 1.0)
    assert encode(c, b, r) == ell
    assert decode(c, ell) == (b, r)


@pytest.mark.parametrize("M", [4, 8, 16, 64, 4096])
def test_encode_matches_case_table(M):
    c = Constellation(M, 1.0)
    for (b, r), ell in naive_table(M).items():
        assert encode(c, b, r) == ell


@given(powers)
def test_encode_is_bijection_and_decode_inverts(M):
    c = Constellation(M, 1.0)
    b = np.repeat([0, 1], M // 2)
    r = np.tile(np.arange(M // 2), 2)
    ell = encode(c, b, r)
    assert sorted(ell.tolist()) == list(range(M))
    b2, r2 = decode(c, ell)
    assert np.array_equal(b2, b) and np.array_equal(r2, r)


@given(powers)
def test_basis_pairs_antipodal_states(M):
    c = Constellation(M, 1.0)
    for r in range(M // 2):
        pair = {encode(c, 0, r), encode(c, 1, r)}
        assert pair == {r, r + M // 2}


@given(powers)
def test_neighbours_alternate_bits_away_from_seams(M):
    c = Constellation(M, 1.0)
    bits, _ = decode(c, np.arange(M))
    half = M // 2
    for ell in range(M):
        nxt = (ell + 1) % M
        if ell in (half - 1, M - 1):
            # the two seams where the ring wraps past a half turn
            assert bits[ell] == bits[nxt]
        else:
            assert bits[ell] != bits[nxt]


@given(powers, st.floats(min_value=0.0, max_value=1e4, allow_nan=False))
def test_amplitudes_on_ring(M, alpha0):
    c = Constellation(M, alpha0)
    a = amplitudes(c, np.arange(M))
    assert np.allclose(np.abs(a) ** 2, alpha0 ** 2, rtol=1e-12, atol=1e-300)
    assert c.S == alpha0 ** 2
    theta = np.angle(a) % (2 * math.pi)
    if alpha0 > 0:
        assert np.allclose(np.exp(1j * theta), np.exp(2j * math.pi * np.arange(M) / M))


def test_scalar_and_array_agree():
    c = Constellation(32, 3.0)
    ell = np.arange(32)
    vec = amplitudes(c, ell)
    for k in ell:
        assert vec[k] == pytest.approx(state_amplitude(c, int(k)), abs=1e-12)


def test_from_photon_number():
    c = Constellation.from_photon_number(64, 7.0)
    assert c.alpha0 == pytest.approx(math.sqrt(7.0))
    assert c.n_bases == 32 and c.bits_per_basis == 5


@pytest.mark.parametrize("M", [2, 3, 6, 12, 0, -4, 4.5])
def test_rejects_bad_M(M):
    with pytest.raises(DomainError):
        Constellation(M, 1.0)


@pytest.mark.parametrize("alpha0", [-1.0, float("nan"), float("inf")])
def test_rejects_bad_alpha0(alpha0):
    with pytest.raises(DomainError):
        Constellation(8, alpha0)


def test_rejects_out_of_range_indices():
    c = Constellation(8, 1.0)
    with pytest.raises(DomainError):
        encode(c, 2, 0)
    with pytest.raises(DomainError):
        encode(c, 0, 4)
    with pytest.raises(DomainError):
        decode(c, 8)
    with pytest.raises(DomainError):
        state_amplitude(c, -1)
    with pytest.raises(DomainError):
        amplitudes(c, [0, 9])
