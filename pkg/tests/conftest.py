import numpy as np
import pytest

from hyperbasis import _fallback, kernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _backends():
    out = [pytest.param(_fallback, id="python")]
    try:
        from hyperbasis import _kernels
    except ImportError:
        out.append(pytest.param(None, id="cython", marks=pytest.mark.skip("extension not built")))
    else:
        out.append(pytest.param(_kernels, id="cython"))
    return out


@pytest.fixture(params=_backends())
def backend(request):
    return request.param


@pytest.fixture
def active_backend():
    return kernels.BACKEND
