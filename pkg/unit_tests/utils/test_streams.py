import numpy as np

from utils.streams import MASK_STREAM, client_rng, derived_seed, init_rng


def test_derived_streams_never_replay_the_data_stream():
    for seed in range(20):
        data = np.random.default_rng(seed).random(8)
        assert not np.allclose(init_rng(seed).random(8), data)
        assert not np.allclose(np.random.default_rng(derived_seed(seed, MASK_STREAM)).random(8), data)


def test_client_streams_depend_on_client_and_round_only():
    first = client_rng(5, 2, 7).random(4)
    assert np.array_equal(first, client_rng(5, 2, 7).random(4))
    assert not np.allclose(first, client_rng(5, 3, 7).random(4))
    assert not np.allclose(first, client_rng(5, 2, 8).random(4))
    assert not np.allclose(first, client_rng(6, 2, 7).random(4))
