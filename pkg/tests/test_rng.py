import numpy as np

from illumkit.rng import CounterStream, _derive_key, mix64

from _oracles import splitmix64_reference


def test_matches_pure_python_reference():
    for seed, stream in [(0, 0), (1, 0), (0, 1), (12345, 678), (2**63, 2**62)]:
        rng = CounterStream(seed, stream)
        got = rng.raw(32).tolist()
        want = splitmix64_reference(int(_derive_key(seed, stream)), 32)
        assert got == want


def test_frozen_vector_seed0():
    # Regression pin: first raw words of (seed=0, stream=0). Any change here
    # silently invalidates every emitted dataset.
    got = CounterStream(0, 0).raw(4).tolist()
    assert got == [
        12035550249420947055,
        12935080325729570654,
        7141179953334974231,
        12108695660851890438,
    ]


def test_deterministic_and_stateless_core():
    a = CounterStream(7, 3).random(100)
    b = CounterStream(7, 3).random(100)
    assert np.array_equal(a, b)
    # Draw batching does not change the sequence.
    rng = CounterStream(7, 3)
    c = np.concatenate([rng.random(13), rng.random(87)])
    assert np.array_equal(a, c)


def test_streams_are_distinct():
    a = CounterStream(7, 0).random(64)
    b = CounterStream(7, 1).random(64)
    c = CounterStream(8, 0).random(64)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_uniform_range_and_shape():
    rng = CounterStream(3)
    v = rng.uniform(0.2, 0.8, 50, 3)
    assert v.shape == (50, 3)
    assert v.min() >= 0.2 and v.max() < 0.8
    scalar = rng.random()
    assert isinstance(scalar, float) and 0.0 <= scalar < 1.0


def test_mix64_accepts_arrays():
    out = mix64(np.arange(4, dtype=np.uint64))
    assert out.dtype == np.uint64 and len(set(out.tolist())) == 4
