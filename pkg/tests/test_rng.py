import numpy as np

from topomatch.rng import derive_seed, fresh_seed, make_rng


def test_streams_reproducible():
    a = make_rng(7, 1, 2).random(5)
    b = make_rng(7, 1, 2).random(5)
    assert np.array_equal(a, b)


def test_keys_split_streams():
    assert not np.array_equal(make_rng(7, 1, 2).random(5), make_rng(7, 2, 1).random(5))
    assert not np.array_equal(make_rng(7).random(5), make_rng(8).random(5))


def test_bit_generator_is_philox():
    assert isinstance(make_rng(0).bit_generator, np.random.Philox)


def test_derived_seeds():
    s = derive_seed(0, 3, 4)
    assert s == derive_seed(0, 3, 4)
    assert 0 <= s < 2**63
    assert s != derive_seed(0, 4, 3)
    assert 0 <= fresh_seed() < 2**63
