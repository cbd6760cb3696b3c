import numpy as np

# data generation draws from the bare run seed; every other stream is derived
INIT_STREAM = 0
CLIENT_STREAM = 1
MASK_STREAM = 3


def derived_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


def init_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, INIT_STREAM]))


def client_rng(seed: int, client_id: int, round_index: int) -> np.random.Generator:
    """
    Independent stream per (seed, client, round), so client scheduling never
    changes what a client draws.
    """
    return np.random.default_rng(np.random.SeedSequence([seed, CLIENT_STREAM, client_id, round_index]))
