import os
from pathlib import Path

import pytest

from elastweyl.material import make_material
from elastweyl.spectrum import elastic_spectrum_cached, scalar_disk_spectrum

PRODUCTION_TAU_MAX = 4.0e4

# (ct2, cl2) for the named alpha values used by the acceptance experiments
MATERIALS = {"1": (1.0, 1.0), "0.9": (1.0, 1.0 / 0.9), "1/3": (1.0, 3.0)}


def _cache_root() -> Path:
    env = os.environ.get("WEYL_CACHE_DIR")
    return Path(env) if env else Path(__file__).resolve().parent.parent / ".weyl_cache"


@pytest.fixture(scope="session")
def spectrum_cache() -> Path:
    root = _cache_root()
    root.mkdir(parents=True, exist_ok=True)
    return root


@pytest.fixture(scope="session")
def production_spectrum(spectrum_cache):
    """Certified elastic disk spectra at tau_max = 4e4, computed once and cached on disk."""
    memo = {}

    def get(alpha: str, bc: str):
        if (alpha, bc) not in memo:
            mat = make_material(*MATERIALS[alpha])
            memo[alpha, bc] = elastic_spectrum_cached(mat, bc, PRODUCTION_TAU_MAX,
                                                      cache_dir=spectrum_cache)[0]
        return memo[alpha, bc]

    return get


@pytest.fixture(scope="session")
def scalar_spectra():
    memo = {}

    def get(bc: str, components: int = 1, tau_max: float = PRODUCTION_TAU_MAX):
        key = (bc, components, tau_max)
        if key not in memo:
            memo[key] = scalar_disk_spectrum(1.0, bc, tau_max, components)
        return memo[key]

    return get
