import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import bilayercc as b


@pytest.fixture(scope="session")
def small_bilayer():
    """Bilayer graph reused by codec tests: N = 1000, unit-offset."""
    params = b.BilayerParams(l1=3, r1=10, L=20, w=2, l2=2, r2=10, M=50,
                             kind=b.UNIT_OFFSET)
    return b.build_graph(params, 11)


@pytest.fixture(scope="session")
def threshold_cache():
    """Memoized bp_threshold lookups shared across test modules."""
    cache = {}

    def get(params, bracket_tol=1e-4):
        key = (params, bracket_tol)
        if key not in cache:
            cache[key] = b.bp_threshold(params, bracket_tol=bracket_tol)
        return cache[key]

    return get
