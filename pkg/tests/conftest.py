import pytest

from hydroham import Workspace


@pytest.fixture
def ws3():
    """Three variables plus the parameter functions used across the suite."""
    ws = Workspace()
    ws.add_variables("u1", "u2", "u3")
    ws.add_function("f", ["u2", "u3"])
    ws.add_function("q", ["u3"])
    return ws.freeze()
