"""SLH triples and their composition algebra.

An open Markov quantum component is specified by a triple
``(S, L, H)``: an n-by-n scattering matrix with operator-valued
entries, an n-vector of coupling operators, and a Hamiltonian.  The two
composition products are

* concatenation -- side-by-side grouping of channels: block-diagonal S,
  stacked L, summed H;
* series -- feeding one component's outputs into another's inputs:
  ``(S2 S1, S2 L1 + L2, H1 + H2 + Im{L2† S2 L1})``,

with the operator imaginary part ``Im{M} = (M - M†)/2i``.  Coherent
drives, channel padding/permutation, and the displacement-extraction
rearrangement are all expressed through these two products.

Entries may be passed as scalars, bare matrices, or :class:`Operator`
instances; scalars are stored as full operators since operator-valued
scattering (e.g. state-controlled routing) is the common case here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .lindblad import LindbladModel
from .spaces import CompositeSpace, Operator, SpaceMismatchError, operator_im

__all__ = [
    "SlhTriple",
    "Displacement",
    "identity_triple",
    "concatenate",
    "series",
    "coherent_drive",
    "pad",
    "permutation",
    "permute_channels",
    "extract_displacements",
    "to_lindblad",
    "allclose",
]

#: Construction-time tolerance for S unitarity and H hermiticity.
CONSTRUCT_TOL = 1e-10


def _as_operator(entry, space: CompositeSpace) -> Operator:
    if isinstance(entry, Operator):
        if entry.space != space:
            raise SpaceMismatchError("triple entry lives on a different space")
        return entry
    if np.isscalar(entry):
        return Operator(space, complex(entry) * np.eye(space.total_dim))
    return Operator(space, np.asarray(entry, dtype=complex))


@dataclass(frozen=True)
class Displacement:
    """Per-channel coherent amplitudes, units sqrt(photons/time)."""

    amplitudes: tuple[complex, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))

    def __len__(self) -> int:
        return len(self.amplitudes)


def _as_displacement(d, n_channels: int) -> Displacement:
    if not isinstance(d, Displacement):
        d = Displacement(tuple(d))
    if len(d) != n_channels:
        raise ValueError(f"displacement length {len(d)} != channel count {n_channels}")
    return d


@dataclass(frozen=True, eq=False)
class SlhTriple:
    """An (S, L, H) component model on a composite space.

    ``check`` controls construction-time validation of S unitarity and
    H hermiticity: True raises, "warn" warns, False skips.  The warn
    mode exists for truncated models whose scattering is unitary only
    away from the truncation boundary.
    """

    space: CompositeSpace
    s: tuple[tuple[Operator, ...], ...]
    l: tuple[Operator, ...]
    h: Operator
    check: bool | str = field(default=True, compare=False)

    def __post_init__(self) -> None:
        space = self.space
        s = tuple(tuple(_as_operator(e, space) for e in row) for row in self.s)
        l = tuple(_as_operator(e, space) for e in self.l)
        h = _as_operator(self.h, space)
        n = len(s)
        if any(len(row) != n for row in s):
            raise ValueError("S must be square")
        if len(l) != n:
            raise ValueError(f"L length {len(l)} != channel count {n}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "h", h)
        if self.check:
            problems = self._validate()
            if problems:
                msg = "; ".join(problems)
                if self.check == "warn":
                    warnings.warn(msg, stacklevel=2)
                else:
                    raise ValueError(msg)

    def _validate(self) -> list[str]:
        problems = []
        big = self.s_block_matrix()
        nd = big.shape[0]
        err = max(
            np.max(np.abs(big.conj().T @ big - np.eye(nd))),
            np.max(np.abs(big @ big.conj().T - np.eye(nd))),
        )
        if err > CONSTRUCT_TOL:
            problems.append(f"scattering matrix not unitary (error {err:.2e})")
        if not self.h.is_hermitian(CONSTRUCT_TOL):
            problems.append("Hamiltonian not Hermitian")
        return problems

    @property
    def n_channels(self) -> int:
        return len(self.l)

    def s_block_matrix(self) -> np.ndarray:
        """The scattering matrix assembled as one (n*d) x (n*d) array."""
        return np.block([[e.matrix for e in row] for row in self.s])


def identity_triple(space: CompositeSpace, n_channels: int) -> SlhTriple:
    """The trivial pass-through component (I_n, 0, 0)."""
    zero = space.zero()
    ident = space.identity()
    s = tuple(
        tuple(ident if i == j else zero for j in range(n_channels))
        for i in range(n_channels)
    )
    return SlhTriple(space, s, (zero,) * n_channels, zero)


def concatenate(g1: SlhTriple, g2: SlhTriple) -> SlhTriple:
    """Group two components side by side: blockdiag S, stacked L, summed H.

    The entries of the two triples need not commute; they may act on the
    same subsystems of the shared space.
    """
    if g1.space != g2.space:
        raise SpaceMismatchError("concatenation requires a common space")
    zero = g1.space.zero()
    n1, n2 = g1.n_channels, g2.n_channels
    s = tuple(
        tuple(g1.s[i][j] if j < n1 else zero for j in range(n1 + n2))
        for i in range(n1)
    ) + tuple(
        tuple(zero if j < n1 else g2.s[i - n1][j - n1] for j in range(n1 + n2))
        for i in range(n1, n1 + n2)
    )
    return SlhTriple(g1.space, s, g1.l + g2.l, g1.h + g2.h, check=False)


def series(downstream: SlhTriple, upstream: SlhTriple) -> SlhTriple:
    """Feed the outputs of ``upstream`` into the inputs of ``downstream``.

    Returns (S2 S1, S2 L1 + L2, H1 + H2 + Im{L2† S2 L1}) where subscript
    2 is the downstream system.
    """
    g2, g1 = downstream, upstream
    if g1.space != g2.space:
        raise SpaceMismatchError("series requires a common space")
    n = g1.n_channels
    if g2.n_channels != n:
        raise ValueError(f"channel count mismatch: {g2.n_channels} vs {n}")
    zero = g1.space.zero()

    def dot(row: int, col: int) -> Operator:
        acc = zero
        for k in range(n):
            acc = acc + g2.s[row][k] @ g1.s[k][col]
        return acc

    s = tuple(tuple(dot(i, j) for j in range(n)) for i in range(n))
    l = tuple(
        sum((g2.s[i][k] @ g1.l[k] for k in range(n)), start=zero) + g2.l[i]
        for i in range(n)
    )
    cross = zero
    for i in range(n):
        for j in range(n):
            cross = cross + g2.l[i].adjoint() @ g2.s[i][j] @ g1.l[j]
    h = g1.h + g2.h + operator_im(cross)
    return SlhTriple(g1.space, s, l, h, check=False)


def coherent_drive(g: SlhTriple, d) -> SlhTriple:
    """Displace the vacuum inputs of ``g`` into coherent states.

    Algebraically the series product with (I, d, 0), yielding
    (S, L + S d, H + Im{L† S d}).
    """
    d = _as_displacement(d, g.n_channels)
    drive = SlhTriple(
        g.space,
        identity_triple(g.space, g.n_channels).s,
        tuple(a * g.space.identity() for a in d.amplitudes),
        g.space.zero(),
        check=False,
    )
    return series(g, drive)


def pad(g: SlhTriple, at: int, count: int = 1) -> SlhTriple:
    """Insert pass-through channels before 1-based channel position ``at``.

    The new channels scatter to themselves with identity and carry no
    coupling; existing channels keep their order.  Inverse of deleting
    the same channels.
    """
    n = g.n_channels
    if not 1 <= at <= n + 1:
        raise ValueError(f"insertion point {at} out of range [1, {n + 1}]")
    if count < 0:
        raise ValueError("count must be nonnegative")
    zero = g.space.zero()
    ident = g.space.identity()
    m = n + count
    lo = at - 1

    def old_index(i: int) -> int | None:
        if i < lo:
            return i
        if i < lo + count:
            return None
        return i - count

    s = []
    for i in range(m):
        oi = old_index(i)
        row = []
        for j in range(m):
            oj = old_index(j)
            if oi is None or oj is None:
                row.append(ident if i == j else zero)
            else:
                row.append(g.s[oi][oj])
        s.append(tuple(row))
    l = tuple(zero if old_index(i) is None else g.l[old_index(i)] for i in range(m))
    return SlhTriple(g.space, tuple(s), l, g.h, check=False)


def permutation(space: CompositeSpace, perm: tuple[int, ...]) -> SlhTriple:
    """Static channel-rearrangement component with scalar scattering.

    Output channel i carries input channel ``perm[i]``.
    """
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {perm}")
    zero = space.zero()
    ident = space.identity()
    s = tuple(
        tuple(ident if j == perm[i] else zero for j in range(n)) for i in range(n)
    )
    return SlhTriple(space, s, (zero,) * n, zero, check=False)


def permute_channels(g: SlhTriple, perm: tuple[int, ...]) -> SlhTriple:
    """Relabel output channels of ``g`` so new channel i is old channel perm[i]."""
    return series(permutation(g.space, perm), g)


def extract_displacements(g0: SlhTriple, d) -> tuple[SlhTriple, Displacement, SlhTriple]:
    """Factor a driven component into static scattering, drive, and inner parts.

    Given a vacuum-input triple G0 = (S0, L0, H0) and displacement d,
    returns (static, drive, inner) with static = (S0, 0, 0), drive = d,
    and inner = (I, S0† L0, H - Im{d† S0† L0}) where H is the
    Hamiltonian of ``coherent_drive(g0, d)``.  Recomposing
    static ◁ (I, d, 0) ◁ inner reproduces the driven component exactly,
    with every drive amplitude moved into the inner Hamiltonian.
    """
    d = _as_displacement(d, g0.n_channels)
    n = g0.n_channels
    zero = g0.space.zero()
    driven = coherent_drive(g0, d)

    static = SlhTriple(g0.space, g0.s, (zero,) * n, zero, check=False)
    s_adj_l = tuple(
        sum((g0.s[k][i].adjoint() @ g0.l[k] for k in range(n)), start=zero)
        for i in range(n)
    )
    # d† S0† L0 = sum_ij conj(d_i) S0_ji† L0_j
    cross = zero
    for i in range(n):
        for j in range(n):
            cross = cross + np.conj(d.amplitudes[i]) * (g0.s[j][i].adjoint() @ g0.l[j])
    inner_h = driven.h - operator_im(cross)
    inner = SlhTriple(
        g0.space, identity_triple(g0.space, n).s, s_adj_l, inner_h, check=False
    )
    return static, d, inner


def to_lindblad(g: SlhTriple) -> LindbladModel:
    """Extract the master-equation generator (H, [L_1..L_n]) of a triple.

    The scattering matrix only shapes the output fields, not the internal
    state evolution, so it is discarded here.
    """
    return LindbladModel(g.space, g.h, g.l)


def allclose(a: SlhTriple, b: SlhTriple, tol: float = 1e-12) -> bool:
    """Entrywise comparison of two triples."""
    if a.space != b.space or a.n_channels != b.n_channels:
        return False
    return max_abs_diff(a, b) <= tol


def max_abs_diff(a: SlhTriple, b: SlhTriple) -> float:
    """Largest entrywise deviation across S, L and H."""
    if a.space != b.space:
        raise SpaceMismatchError("triples on different spaces")
    if a.n_channels != b.n_channels:
        raise ValueError("channel count mismatch")
    worst = a.h.max_abs_diff(b.h)
    for la, lb in zip(a.l, b.l):
        worst = max(worst, la.max_abs_diff(lb))
    for ra, rb in zip(a.s, b.s):
        for ea, eb in zip(ra, rb):
            worst = max(worst, ea.max_abs_diff(eb))
    return worst
