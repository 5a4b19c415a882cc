import numpy as np
import pytest

from cfaging import (HardwareConfig, HardwareProfile, ScenarioConfig,
                     build_scenario)

# desk-scale acceptance scenario: small enough for laptop-speed Monte Carlo.
# The sample period is 10 us so that the 54 km/h UEs stay inside the 0.5 dB
# aging budget over the 50-sample block while 212 km/h UEs decorrelate
# visibly; the default 66.7 us period would age even slow UEs by ~10 dB.
DESK_D = dict(M=16, N=2, K=8, tau_p=4, tau_c=50, sample_period_s=1e-5,
              ue_velocities_kmh=[54.0, 212.0] * 4, seed=1)


@pytest.fixture(scope="session")
def desk_scenario():
    return build_scenario(ScenarioConfig(**DESK_D))


@pytest.fixture(scope="session")
def small_scenario():
    cfg = ScenarioConfig(M=4, N=2, K=4, tau_p=2, tau_c=12, sample_period_s=1e-5,
                         ue_velocities_kmh=[54, 212, 54, 212], area_side_m=400,
                         seed=3)
    return build_scenario(cfg)


@pytest.fixture(scope="session")
def small_profile(small_scenario):
    cfg = small_scenario.cfg
    hw = HardwareConfig(kappa_t=0.1, kappa_r=0.15, dac_bits=3,
                        adc_bits=[[2, 3], [3, 4], [2, 2], [4, 4]])
    return HardwareProfile.from_config(hw, cfg.M, cfg.N, cfg.K)


def rng(seed=0):
    return np.random.default_rng(seed)
