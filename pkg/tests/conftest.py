import numpy as np
import pytest

from aoi_bandits import BanditInstance, LatentDistribution, builtin_instance, classify_arms


@pytest.fixture(scope="session")
def i1():
    return builtin_instance("i1")


@pytest.fixture(scope="session")
def i2():
    return builtin_instance("i2")


@pytest.fixture(scope="session")
def i1_summary(i1):
    return classify_arms(i1)


@pytest.fixture(scope="session")
def i2_summary(i2):
    return classify_arms(i2)


def random_instance(rng, max_arms=5, max_states=8, name="random", unique_optimum=False):
    """Random valid instance; optionally retries until the best arm is unique."""
    while True:
        n_arms = int(rng.integers(2, max_arms + 1))
        n_states = int(rng.integers(2, max_states + 1))
        probs = rng.dirichlet(np.ones(n_states))
        rewards = rng.integers(0, 2, size=(n_arms, n_states))
        inst = BanditInstance(
            name=name,
            latent=LatentDistribution(
                state_labels=tuple(f"s{i}" for i in range(n_states)), probs=probs
            ),
            rewards=rewards,
        )
        if not unique_optimum:
            return inst
        means = inst.rewards.astype(float) @ inst.latent.probs
        if np.count_nonzero(means == means.max()) == 1:
            return inst
