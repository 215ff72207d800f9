"""Counter-based RNG: bit-exactness against numpy's Philox, stream layout.

numpy.random.Philox is the reference implementation here: our stream
(seed, stream_id) must reproduce Philox(counter=[0,0,0,0], key=[seed,
stream_id]) word for word, and substream(i) the same with counter
[0,0,i+1,0].  The uniform map is ((word >> 11) + 1) * 2^-53, open at 0,
closed at 1.
"""

import numpy as np

from qndtradeoff.rng import SeededRng, batch_substream_uniforms, gaussian_pairs


def _numpy_uniforms(seed, stream, sub, n):
    bg = np.random.Philox(counter=[0, 0, sub, 0], key=[seed, stream])
    raw = bg.random_raw(n)
    return ((raw >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * 2.0**-53


def test_base_stream_matches_numpy_philox():
    seed, stream = 987654321, 5
    mine = SeededRng(seed, stream_id=stream).uniforms(40)
    assert np.array_equal(mine, _numpy_uniforms(seed, stream, 0, 40))


def test_substream_matches_numpy_philox():
    seed, stream = 20240601, 0
    for sub in (0, 7, 17):
        mine = SeededRng(seed, stream_id=stream).substream(sub).uniforms(33)
        assert np.array_equal(mine, _numpy_uniforms(seed, stream, sub + 1, 33))


def test_frozen_first_uniforms():
    got = SeededRng(123456789, 0).uniforms(3)
    expect = [0.8262541908585189, 0.44034082526674356, 0.37586353079897306]
    assert np.array_equal(got, expect)


def test_sequential_draws_continue_the_stream():
    a = SeededRng(99, 3)
    first = a.uniforms(7)
    second = a.uniforms(9)
    whole = SeededRng(99, 3).uniforms(16)
    assert np.array_equal(np.concatenate([first, second]), whole)


def test_streams_and_seeds_are_independent():
    base = SeededRng(5, 0).uniforms(32)
    assert not np.array_equal(base, SeededRng(5, 1).uniforms(32))
    assert not np.array_equal(base, SeededRng(6, 0).uniforms(32))
    assert not np.array_equal(base, SeededRng(5, 0).substream(0).uniforms(32))


def test_batch_rows_equal_per_substream_draws():
    seed, stream = 31337, 2
    batch = batch_substream_uniforms(seed, stream, 4, 6, 29)
    assert batch.shape == (6, 29)
    base = SeededRng(seed, stream_id=stream)
    for i in range(6):
        assert np.array_equal(batch[i], base.substream(4 + i).uniforms(29))


def test_uniform_range_open_zero_closed_one():
    u = SeededRng(1, 0).uniforms(100_000)
    assert u.min() > 0.0
    assert u.max() <= 1.0


def test_gaussian_pairs_formula():
    # Box-Muller on consecutive pairs: r cos(theta), r sin(theta)
    u = SeededRng(77, 0).uniforms(10)
    g = gaussian_pairs(u)
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    assert np.array_equal(g[0::2], r * np.cos(theta))
    assert np.array_equal(g[1::2], r * np.sin(theta))


def test_gaussians_consume_whole_pairs():
    a = SeededRng(11, 4)
    a.gaussians(3)  # consumes 4 uniforms
    tail = a.uniforms(5)
    b = SeededRng(11, 4)
    b.uniforms(4)
    assert np.array_equal(tail, b.uniforms(5))


def test_gaussian_moments():
    g = SeededRng(2024, 0).gaussians(200_000)
    n = len(g)
    assert abs(g.mean()) < 4.0 / np.sqrt(n)
    assert abs(g.var(ddof=1) - 1.0) < 4.0 * np.sqrt(2.0 / n)
    # lag-1 correlation of the pair structure stays at noise level
    corr = np.corrcoef(g[:-1], g[1:])[0, 1]
    assert abs(corr) < 4.0 / np.sqrt(n)


def test_substream_attributes():
    r = SeededRng(42, 9)
    assert (r.master_seed, r.stream_id) == (42, 9)
    s = r.substream(3)
    assert s.master_seed == 42
