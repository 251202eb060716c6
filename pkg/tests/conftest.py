import numpy as np
import pytest

from loewner import DriverSpec, SimulationConfig, integrate_multi_le_down, simulate_hull


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the JIT kernels once so timed tests measure the algorithm only."""
    cfg = SimulationConfig(T=1.0, N=4, drivers=(DriverSpec.constant(0.0, 1.0),))
    simulate_hull(cfg)
    integrate_multi_le_down(5j, cfg.drivers, (1.0,), 1.0, 8)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(20260810))
