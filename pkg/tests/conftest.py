import pytest

from induced_pressure._accel import ENV_FLAG, HAVE_NUMBA

BACKENDS = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    if request.param == "numpy":
        monkeypatch.setenv(ENV_FLAG, "1")
    else:
        monkeypatch.delenv(ENV_FLAG, raising=False)
    return request.param
