"""Deterministic, order-independent random streams.

Every stochastic draw in this package comes from a Philox counter-based
bit generator whose 128-bit key is derived by hashing integer coordinates
(master seed, purpose tag, cell indices, ...) with BLAKE2b.  Streams are
therefore a pure function of their coordinates: generation order, worker
count and process layout never change the output, and two runs with the
same seed are bit-identical.

Gaussian samples are produced with the Box-Muller transform applied to
Philox uniforms instead of the generator's built-in normal method, so the
noise byte stream is pinned down exactly:

    u     = stream.random(2 * n)           # float64 in [0, 1)
    r     = sqrt(-2 * log(1 - u[0::2]))
    theta = 2 * pi * u[1::2]
    z     = r * (cos(theta) + 1j * sin(theta))

``1 - u`` keeps the logarithm argument inside (0, 1].
"""

import hashlib
import struct

import numpy as np

# Purpose tags keep unrelated streams (dataset examples, weight init,
# epoch shuffles) in disjoint key spaces even for equal seeds.
DOMAIN_EXAMPLE = 1
DOMAIN_INIT = 2
DOMAIN_SHUFFLE = 3
DOMAIN_MISC = 4


def derive_key(*fields: int) -> np.ndarray:
    """Map integer coordinates to a 128-bit Philox key.

    Fields are packed as little-endian signed 64-bit integers and hashed
    with BLAKE2b (digest_size=16); the digest is read back as two uint64
    words. Stable across platforms and Python versions.
    """
    data = struct.pack("<%dq" % len(fields), *fields)
    digest = hashlib.blake2b(data, digest_size=16).digest()
    return np.frombuffer(digest, dtype="<u8")


def stream(*fields: int) -> np.random.Generator:
    """Return the generator addressed by the given integer coordinates."""
    return np.random.Generator(np.random.Philox(key=derive_key(*fields)))


def complex_normal(rng: np.random.Generator, n: int, sigma: float = 1.0) -> np.ndarray:
    """Draw n complex Gaussian samples, real/imag i.i.d. Normal(0, sigma^2).

    Uses the documented Box-Muller construction on 2n uniforms so the
    result depends only on the generator state, not on library internals.
    """
    u = rng.random(2 * n)
    r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    theta = (2.0 * np.pi) * u[1::2]
    return sigma * (r * np.cos(theta) + 1j * (r * np.sin(theta)))
