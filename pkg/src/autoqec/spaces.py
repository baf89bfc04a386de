"""Operator algebra over labeled composite Hilbert spaces.

A :class:`CompositeSpace` is an ordered list of labeled subsystems; its
global basis is the lexicographic tensor order of the subsystem list
(first subsystem most significant, matching ``numpy.kron``).  Operators
on a single subsystem are lifted to the global space with :func:`embed`,
which tensors identities onto every other factor.

Two-level subsystems use the basis convention (g, h): index 0 is |g>,
index 1 is |h>, and the Pauli Z returned by :func:`pauli_library` is
``Pi_h - Pi_g``.  All sign conventions downstream follow from this.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

__all__ = [
    "SubsystemLabel",
    "CompositeSpace",
    "Operator",
    "QubitOps",
    "SpaceMismatchError",
    "embed",
    "transition",
    "level_projector",
    "pauli_library",
    "commutator",
    "operator_im",
    "product_state",
]

#: Entrywise absolute tolerance for operator-equality oracles.  All
#: constructions in this package are exact rational/sqrt(2) arithmetic
#: plus rounding, so equality holds far below this.
EQ_TOL = 1e-12


class SpaceMismatchError(ValueError):
    """Raised when operands live on different composite spaces."""


@dataclass(frozen=True)
class SubsystemLabel:
    """A named tensor factor with a fixed local dimension."""

    name: str
    dim: int

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"subsystem {self.name!r} needs dim >= 2, got {self.dim}")


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered registry of labeled subsystems defining a tensor-product basis."""

    subsystems: tuple[SubsystemLabel, ...]

    def __post_init__(self) -> None:
        names = [s.name for s in self.subsystems]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate subsystem names: {names}")

    @staticmethod
    def of(*parts: tuple[str, int]) -> "CompositeSpace":
        """Build a space from (name, dim) pairs in tensor order."""
        return CompositeSpace(tuple(SubsystemLabel(n, d) for n, d in parts))

    @property
    def total_dim(self) -> int:
        out = 1
        for s in self.subsystems:
            out *= s.dim
        return out

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.subsystems)

    def index(self, name: str) -> int:
        for i, s in enumerate(self.subsystems):
            if s.name == name:
                return i
        raise KeyError(f"no subsystem {name!r} in space {self.names}")

    def dim_of(self, name: str) -> int:
        return self.subsystems[self.index(name)].dim

    def identity(self) -> "Operator":
        return Operator(self, np.eye(self.total_dim, dtype=complex))

    def zero(self) -> "Operator":
        return Operator(self, np.zeros((self.total_dim, self.total_dim), dtype=complex))


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix acting on a :class:`CompositeSpace`.

    Immutable after construction; all algebra returns new instances.
    """

    space: CompositeSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match space dim {d}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def _require_same_space(self, other: "Operator") -> None:
        if self.space != other.space:
            raise SpaceMismatchError(
                f"operands on different spaces: {self.space.names} vs {other.space.names}"
            )

    def __add__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix / complex(scalar))

    def __matmul__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def adjoint(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = EQ_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def is_unitary(self, tol: float = EQ_TOL) -> bool:
        d = self.space.total_dim
        prod = self.matrix.conj().T @ self.matrix
        return bool(np.max(np.abs(prod - np.eye(d))) <= tol)

    def allclose(self, other: "Operator", tol: float = EQ_TOL) -> bool:
        self._require_same_space(other)
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= tol)

    def max_abs_diff(self, other: "Operator") -> float:
        self._require_same_space(other)
        return float(np.max(np.abs(self.matrix - other.matrix)))


def commutator(a: Operator, b: Operator) -> Operator:
    """[a, b] = ab - ba."""
    return a @ b - b @ a


def operator_im(m: Operator) -> Operator:
    """Operator-valued imaginary part, (M - M†)/2i."""
    return Operator(m.space, (m.matrix - m.matrix.conj().T) / 2j)


def embed(local: np.ndarray, name: str, space: CompositeSpace) -> Operator:
    """Lift a single-subsystem matrix to the full space.

    Returns I ⊗ ... ⊗ local ⊗ ... ⊗ I with ``local`` in the slot of the
    named subsystem and identities everywhere else, so the identity
    operation on all other factors is implicit.
    """
    idx = space.index(name)
    d_local = space.subsystems[idx].dim
    local = np.asarray(local, dtype=complex)
    if local.shape != (d_local, d_local):
        raise ValueError(
            f"local operator shape {local.shape} does not match dim {d_local} "
            f"of subsystem {name!r}"
        )
    factors = [
        local if i == idx else np.eye(s.dim, dtype=complex)
        for i, s in enumerate(space.subsystems)
    ]
    return Operator(space, reduce(np.kron, factors))


def transition(space: CompositeSpace, name: str, to_level: int, from_level: int) -> Operator:
    """Embedded matrix unit |to><from| on the named subsystem."""
    d = space.dim_of(name)
    if not (0 <= to_level < d and 0 <= from_level < d):
        raise ValueError(f"levels ({to_level}, {from_level}) out of range for dim {d}")
    local = np.zeros((d, d), dtype=complex)
    local[to_level, from_level] = 1.0
    return embed(local, name, space)


def level_projector(space: CompositeSpace, name: str, level: int) -> Operator:
    """Embedded projector |level><level| on the named subsystem."""
    return transition(space, name, level, level)


@dataclass(frozen=True)
class QubitOps:
    """Embedded single-qubit operator set in the (g, h) basis."""

    x: Operator
    z: Operator
    pi_g: Operator
    pi_h: Operator
    sigma_gh: Operator  # |g><h|
    sigma_hg: Operator  # |h><g|


def pauli_library(space: CompositeSpace, names: tuple[str, ...] | None = None) -> dict[str, QubitOps]:
    """Embedded X, Z, projectors and raising/lowering ops per qubit label.

    Basis order within each two-level subsystem is (g, h), so
    Z = Pi_h - Pi_g and X = sigma_gh + sigma_hg.  Raises if a requested
    subsystem is not two-dimensional.
    """
    if names is None:
        names = tuple(s.name for s in space.subsystems if s.dim == 2)
    lib = {}
    for name in names:
        if space.dim_of(name) != 2:
            raise ValueError(f"subsystem {name!r} is not a qubit (dim {space.dim_of(name)})")
        pi_g = level_projector(space, name, 0)
        pi_h = level_projector(space, name, 1)
        sigma_gh = transition(space, name, 0, 1)
        sigma_hg = transition(space, name, 1, 0)
        lib[name] = QubitOps(
            x=sigma_gh + sigma_hg,
            z=pi_h - pi_g,
            pi_g=pi_g,
            pi_h=pi_h,
            sigma_gh=sigma_gh,
            sigma_hg=sigma_hg,
        )
    return lib


def product_state(space: CompositeSpace, levels: dict[str, int]) -> np.ndarray:
    """Basis vector with each subsystem in the given level.

    ``levels`` must assign a level to every subsystem of the space.
    """
    missing = set(space.names) - set(levels)
    extra = set(levels) - set(space.names)
    if missing or extra:
        raise ValueError(f"levels must cover the space exactly (missing {missing}, extra {extra})")
    vec = np.array([1.0 + 0j])
    for s in space.subsystems:
        lv = levels[s.name]
        if not 0 <= lv < s.dim:
            raise ValueError(f"level {lv} out of range for {s.name!r} (dim {s.dim})")
        local = np.zeros(s.dim, dtype=complex)
        local[lv] = 1.0
        vec = np.kron(vec, local)
    return vec
