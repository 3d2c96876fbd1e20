import pytest

from occuthresh.cycles import census_samples

from tests.oracles import exhaustive_k4_d2_n4

CENSUS_SEED = 11
CENSUS_SAMPLES = 10_000


@pytest.fixture(scope="session")
def exhaustive():
    """Exact statistics of every (k=4, d=2, n=4) configuration."""
    return exhaustive_k4_d2_n4()


@pytest.fixture(scope="session")
def census_10k():
    """10^4 cycle censuses at (k=4, d=3, n=400), l <= 2, fixed seed."""
    return census_samples(
        k=4, d=3, n=400, samples=CENSUS_SAMPLES, seed=CENSUS_SEED, l_max=2, threads=2
    )
