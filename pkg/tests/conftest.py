import numpy as np
import pytest

from mdpp import RandomSource
from mdpp.kernel import Kernel, KernelForm, random_ensemble_kernel


def random_kernel(n: int, seed: int, lambda_max: float | None = None, decay: float = 1.0) -> Kernel:
    return random_ensemble_kernel(n, RandomSource(seed), lambda_max=lambda_max, decay=decay)


def diag_kernel(values, form=KernelForm.ENSEMBLE) -> Kernel:
    return Kernel(np.diag(np.asarray(values, dtype=float)), form)


@pytest.fixture
def rng():
    return RandomSource(20240817)
