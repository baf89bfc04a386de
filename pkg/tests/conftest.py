import numpy as np
import pytest

from autoqec.spaces import CompositeSpace, Operator


@pytest.fixture(scope="session")
def two_qubit_space() -> CompositeSpace:
    return CompositeSpace.of(("A", 2), ("B", 2))


def assert_op_close(a: Operator, b: Operator, tol: float = 1e-12) -> None:
    diff = a.max_abs_diff(b)
    assert diff <= tol, f"operators differ by {diff:.3e} (tol {tol:.1e})"


def assert_matrix_close(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> None:
    diff = np.max(np.abs(np.asarray(a) - np.asarray(b)))
    assert diff <= tol, f"matrices differ by {diff:.3e} (tol {tol:.1e})"
