"""Counter-based deterministic random number generation.

All randomness in this package flows through a Philox4x64-10 counter
generator.  A stream is identified by a 128-bit key ``(master_seed,
stream_id)`` plus a substream word, and the t-th uniform of a stream is a
pure function of (key, substream, t).  That gives three properties the
Monte Carlo driver relies on:

* per-sample substreams: sample i of a run draws from ``substream(i)``,
  so results are independent of chunking and of which backend consumes
  the numbers;
* random access: a whole chunk of substreams can be generated in one
  vectorized pass (`batch_substream_uniforms`);
* reproducibility: the base stream of ``SeededRng(seed, stream)`` emits
  bit-for-bit the output of ``numpy.random.Philox(counter=[0, 0, 0, 0],
  key=[seed, stream])``, which the test suite checks.

Layout: block j of substream s is the Philox permutation of counter
``(j + 1, 0, s, 0)`` (low word first; the +1 mirrors numpy's buffering so
the sequences coincide).  Word t % 4 of block t // 4 is uniform t.
Uniforms are mapped to (0, 1] via ``((x >> 11) + 1) * 2**-53`` so that
``log(u)`` is always finite.  Gaussians use the trigonometric Box-Muller
transform: uniform pair (2p, 2p + 1) yields Gaussian pair (2p, 2p + 1),
a fixed consumption rule that every consumer of the stream shares.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_WEYL0 = 0x9E3779B97F4A7C15
_WEYL1 = 0xBB67AE8584CAA73B
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ROUNDS = 10

# 2**-53; uniforms are ((x >> 11) + 1) * 2**-53 in (0, 1]
_U53 = 1.0 / 9007199254740992.0


def _round_keys(key0: int, key1: int) -> list[tuple[np.uint64, np.uint64]]:
    """Key schedule: the Weyl-incremented key pair for each round."""
    return [
        (
            np.uint64((key0 + r * _WEYL0) & _MASK64),
            np.uint64((key1 + r * _WEYL1) & _MASK64),
        )
        for r in range(_ROUNDS)
    ]


def _mulhilo(a: np.uint64, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """128-bit product of a scalar and a uint64 array, as (high, low) words."""
    lo = a * b
    ah = a >> _S32
    al = a & _MASK32
    bh = b >> _S32
    bl = b & _MASK32
    albh = al * bh
    ahbl = ah * bl
    carry = (((al * bl) >> _S32) + (albh & _MASK32) + (ahbl & _MASK32)) >> _S32
    hi = ah * bh + (albh >> _S32) + (ahbl >> _S32) + carry
    return hi, lo


def _philox_blocks(c0: np.ndarray, c2: np.ndarray, rks) -> np.ndarray:
    """Philox4x64-10 blocks for counters (c0, 0, c2, 0).

    Returns an (n, 4) uint64 array, one row per counter, words in output
    order.
    """
    x0 = c0.astype(np.uint64, copy=True)
    x1 = np.zeros_like(x0)
    x2 = c2.astype(np.uint64, copy=True)
    x3 = np.zeros_like(x0)
    for k0, k1 in rks:
        hi0, lo0 = _mulhilo(_M0, x0)
        hi1, lo1 = _mulhilo(_M1, x2)
        x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
    return np.stack([x0, x1, x2, x3], axis=-1)


def _words_to_uniform(words: np.ndarray) -> np.ndarray:
    return ((words >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53


def gaussian_pairs(uniforms: np.ndarray) -> np.ndarray:
    """Box-Muller transform, trigonometric form.

    Consumes uniforms in (0, 1] two at a time along the last axis and
    returns the same shape of standard normals: pair (u1, u2) maps to
    (r cos θ, r sin θ) with r = sqrt(-2 ln u1), θ = 2π u2.
    """
    if uniforms.shape[-1] % 2:
        raise ValueError("need an even number of uniforms")
    u1 = uniforms[..., 0::2]
    u2 = uniforms[..., 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = (2.0 * np.pi) * u2
    out = np.empty_like(uniforms)
    out[..., 0::2] = r * np.cos(theta)
    out[..., 1::2] = r * np.sin(theta)
    return out


def _stream_uniforms(rks, sub: int, start: int, n: int) -> np.ndarray:
    """Uniforms [start, start + n) of one substream."""
    if n == 0:
        return np.empty(0)
    b0 = start // 4
    b1 = (start + n - 1) // 4
    blocks = np.arange(b0 + 1, b1 + 2, dtype=np.uint64)
    subs = np.full_like(blocks, sub)
    words = _philox_blocks(blocks, subs, rks).ravel()
    return _words_to_uniform(words[start - 4 * b0 : start - 4 * b0 + n])


class SeededRng:
    """Deterministic random stream addressed by (master_seed, stream_id).

    Instances hold a cursor, so repeated draws continue the stream;
    recreating the object replays it from the start.  `substream(i)`
    opens an independent stream derived from the same key, used by the
    Monte Carlo driver to give every sample its own stream.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        self._rks = _round_keys(self.master_seed, self.stream_id)
        self._sub = 0
        self._cursor = 0

    def substream(self, index: int) -> "SeededRng":
        """Independent stream index >= 0 under the same key, fresh cursor."""
        if index < 0:
            raise ValueError("substream index must be nonnegative")
        child = SeededRng.__new__(SeededRng)
        child.master_seed = self.master_seed
        child.stream_id = self.stream_id
        child._rks = self._rks
        child._sub = index + 1
        child._cursor = 0
        return child

    def uniforms(self, n: int) -> np.ndarray:
        """Next n uniforms in (0, 1]."""
        out = _stream_uniforms(self._rks, self._sub, self._cursor, int(n))
        self._cursor += int(n)
        return out

    def gaussians(self, n: int) -> np.ndarray:
        """Next n standard normals (consumes 2 * ceil(n / 2) uniforms)."""
        n = int(n)
        m = n + (n % 2)
        z = gaussian_pairs(self.uniforms(m))
        return z[:n]


def batch_substream_uniforms(
    master_seed: int,
    stream_id: int,
    first_sample: int,
    n_samples: int,
    count: int,
) -> np.ndarray:
    """First `count` uniforms of `n_samples` consecutive per-sample substreams.

    Row i equals ``SeededRng(master_seed, stream_id).substream(first_sample
    + i).uniforms(count)``; the driver uses this to generate a whole chunk
    in one vectorized pass.
    """
    rks = _round_keys(int(master_seed) & _MASK64, int(stream_id) & _MASK64)
    nb = (count + 3) // 4
    blocks = np.tile(np.arange(1, nb + 1, dtype=np.uint64), n_samples)
    subs = np.repeat(
        np.arange(first_sample + 1, first_sample + n_samples + 1, dtype=np.uint64), nb
    )
    words = _philox_blocks(blocks, subs, rks).reshape(n_samples, 4 * nb)
    return _words_to_uniform(words[:, :count])
