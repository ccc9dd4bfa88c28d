import numpy as np
import pytest

from fiberspdc import FiberChannel, SpdcSource


@pytest.fixture
def source() -> SpdcSource:
    # 0.5 mm crystal, 0.16 ps/mm group-velocity mismatch -> tau0 = 40 fs
    return SpdcSource(crystal_length_mm=0.5, gv_mismatch_s_per_mm=0.16e-12)


@pytest.fixture
def fiber_1km() -> FiberChannel:
    return FiberChannel(length_cm=1.0e5, gvd_s2_per_cm=3.2e-28)


@pytest.fixture
def fiber_240m() -> FiberChannel:
    return FiberChannel(length_cm=2.4e4, gvd_s2_per_cm=3.2e-28)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
