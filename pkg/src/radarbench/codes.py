"""Pulse-compression code families.

Code sequences are returned as 1-D complex arrays of chip values. Phase
codes (Barker, Frank, P1-P4, Px, Zadoff-Chu) are unit modulus; Huffman
chips vary in modulus and are normalized to unit energy.

Phase laws follow the standard radar literature definitions (Lewis &
Kretschmer step-approximation codes; Levanon & Mozeson, "Radar Signals",
ch. 6), written out in each docstring. Indices i, j below run 0..M-1.
"""

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

# Binary Barker codes with peak autocorrelation sidelobe magnitude 1.
BARKER_CODES = {
    5: (1, 1, 1, -1, 1),
    7: (1, 1, 1, -1, -1, 1, -1),
    11: (1, 1, 1, -1, -1, -1, 1, -1, -1, 1, -1),
    13: (1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1),
}

POLYPHASE_VARIANTS = ("frank", "p1", "p2", "p3", "p4", "px")


def barker_sequence(lc: int) -> np.ndarray:
    """Binary +/-1 Barker code of length lc (5, 7, 11 or 13)."""
    if lc not in BARKER_CODES:
        raise ValueError(f"no Barker code of length {lc}; supported: {sorted(BARKER_CODES)}")
    return np.asarray(BARKER_CODES[lc], dtype=np.complex128)


def polyphase_code(variant: str, m: int) -> np.ndarray:
    """Polyphase code chips for one of frank/p1/p2/p3/p4/px.

    Frank, P1, P2 and Px are two-index codes of length M^2 flattened in
    group-major order (group j, element i); P3 and P4 are single-index
    codes of length M:

        frank  phi(i,j) = 2*pi*i*j/M                      (group j = i index)
        p1     phi(i,j) = -(pi/M) * (M - (2j+1)) * (j*M + i)
        p2     phi(i,j) = -(pi/(2M)) * (2i+1-M) * (2j+1-M)   (M even)
        px     phi(i,j) = +(pi/(2M)) * (2i+1-M) * (2j+1-M)
        p3     phi(j)   = pi * j^2 / M
        p4     phi(j)   = pi * j^2 / M - pi * j
    """
    if m < 2:
        raise ValueError("polyphase codes need m >= 2")
    if variant == "frank":
        i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        phase = 2.0 * np.pi * i * j / m
        return np.exp(1j * phase).ravel()
    if variant == "p1":
        j, i = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        phase = -(np.pi / m) * (m - (2 * j + 1)) * (j * m + i)
        return np.exp(1j * phase).ravel()
    if variant in ("p2", "px"):
        if variant == "p2" and m % 2:
            raise ValueError("p2 is defined for even m only")
        j, i = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        sign = -1.0 if variant == "p2" else 1.0
        phase = sign * (np.pi / (2 * m)) * (2 * i + 1 - m) * (2 * j + 1 - m)
        return np.exp(1j * phase).ravel()
    if variant == "p3":
        j = np.arange(m)
        return np.exp(1j * np.pi * j**2 / m)
    if variant == "p4":
        j = np.arange(m)
        return np.exp(1j * (np.pi * j**2 / m - np.pi * j))
    raise ValueError(f"unknown polyphase variant {variant!r}")


def zadoff_chu(m: int, r: int) -> np.ndarray:
    """Zadoff-Chu CAZAC sequence of length m with root r, gcd(r, m) = 1.

    x[n] = exp(-j*pi*r*n^2/m) for even m, exp(-j*pi*r*n*(n+1)/m) for odd.
    Constant amplitude with zero periodic autocorrelation at all nonzero
    lags.
    """
    if m < 2:
        raise ValueError("Zadoff-Chu length must be at least 2")
    if math.gcd(r, m) != 1:
        raise ValueError(f"Zadoff-Chu root {r} is not coprime with length {m}")
    n = np.arange(m)
    quad = n * n if m % 2 == 0 else n * (n + 1)
    return np.exp(-1j * np.pi * r * quad / m)


# -- Huffman codes -----------------------------------------------------------
#
# A Huffman sequence of length M has zero aperiodic autocorrelation at all
# lags except 0 and +/-(M-1). Its code polynomial's M-1 roots sit on two
# circles of radius rho and 1/rho at angles 2*pi*k/(M-1); each angle takes
# exactly one of the two radii. The end-lobe-to-peak ratio is set by rho,
# which is solved numerically for the requested level. The radius search
# runs in float64; the final coefficient expansion runs at 60 decimal
# digits because expanding 63 roots in double precision leaves interior
# sidelobe residue well above the construction's nominal floor.

def _huffman_coeffs(m: int, rho: float) -> np.ndarray:
    k = np.arange(m - 1)
    radii = np.where(k % 2 == 0, rho, 1.0 / rho)  # alternating shell selection
    roots = radii * np.exp(2j * np.pi * k / (m - 1))
    return np.poly(roots)


def _end_lobe_db(m: int, rho: float) -> float:
    c = _huffman_coeffs(m, rho)
    end = abs(c[0]) * abs(c[-1])
    peak = float(np.sum(np.abs(c) ** 2))
    return 20.0 * math.log10(end / peak)


@lru_cache(maxsize=None)
def _huffman_rho(m: int, s_db: float) -> float:
    lo, hi = 1.0 + 1e-6, 1.5
    while _end_lobe_db(m, hi) > s_db:
        hi *= 1.5
        if hi > 1e3:
            raise ValueError(f"no Huffman radius reaches {s_db} dB for length {m}")
    return brentq(lambda rho: _end_lobe_db(m, rho) - s_db, lo, hi, xtol=1e-12)


@lru_cache(maxsize=None)
def _huffman_code_cached(m: int, s_db: float) -> tuple:
    import mpmath as mp

    rho = _huffman_rho(m, s_db)
    with mp.workdps(60):
        coeffs = [mp.mpc(1)]
        for k in range(m - 1):
            radius = mp.mpf(rho) if k % 2 == 0 else 1 / mp.mpf(rho)
            root = radius * mp.exp(mp.mpc(0, 2 * mp.pi * k / (m - 1)))
            nxt = [mp.mpc(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i] += c          # multiply by z
                nxt[i + 1] -= root * c
            coeffs = nxt
        code = np.array([complex(c) for c in coeffs], dtype=np.complex128)
    return tuple(code / np.sqrt(np.sum(np.abs(code) ** 2)))


def huffman_sequence(m: int, s_db: float) -> np.ndarray:
    """Huffman code of length m with end-lobe level s_db (dB, amplitude).

    The returned chips are normalized to unit energy; interior
    autocorrelation sidelobes vanish up to float rounding.
    """
    if m < 4:
        raise ValueError("Huffman codes need m >= 4")
    if s_db >= 0:
        raise ValueError("end-lobe level must be negative dB")
    return np.asarray(_huffman_code_cached(int(m), float(s_db)))


# -- Costas arrays -----------------------------------------------------------

def _is_costas(perm) -> bool:
    n = len(perm)
    for row in range(1, n):
        diffs = [perm[i + row] - perm[i] for i in range(n - row)]
        if len(set(diffs)) != len(diffs):
            return False
    return True


@lru_cache(maxsize=None)
def enumerate_costas_arrays(m: int):
    """All Costas permutations of 1..m, found by exhaustive search.

    Orders up to 6 are tiny (720 permutations at most), so the exhaustive
    enumeration doubles as correctness oracle and sampling pool.
    """
    if m < 1:
        raise ValueError("Costas order must be positive")
    found = tuple(
        perm for perm in itertools.permutations(range(1, m + 1)) if _is_costas(perm)
    )
    if not found:
        raise ValueError(f"no Costas arrays of order {m}")
    return found


def costas_array(m: int, rng: np.random.Generator | None = None) -> tuple:
    """One Costas permutation of 1..m, sampled uniformly when rng is given.

    Without a generator the lexicographically first valid array is
    returned.
    """
    pool = enumerate_costas_arrays(m)
    if rng is None:
        return pool[0]
    return pool[int(rng.integers(len(pool)))]
