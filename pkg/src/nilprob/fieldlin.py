"""Exact linear algebra over small prime fields F_p (p in {2, 3, 5, 7}).

Scalars are plain ints reduced to [0, p); vectors and bilinear forms carry
the modulus.  All values are immutable after construction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DimensionMismatchError

SUPPORTED_PRIMES = (2, 3, 5, 7)


def check_prime(p: int) -> None:
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"unsupported prime {p}; expected one of {SUPPORTED_PRIMES}")


@dataclass(frozen=True)
class FpVector:
    """Vector over F_p with coordinates stored as a tuple of residues."""

    p: int
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        check_prime(self.p)
        if any(not 0 <= c < self.p for c in self.coords):
            object.__setattr__(self, "coords", tuple(c % self.p for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @staticmethod
    def zero(p: int, dim: int) -> "FpVector":
        return FpVector(p, (0,) * dim)

    @staticmethod
    def basis(p: int, dim: int, i: int) -> "FpVector":
        return FpVector(p, tuple(1 if j == i else 0 for j in range(dim)))

    @staticmethod
    def from_ints(p: int, coords: Iterable[int]) -> "FpVector":
        return FpVector(p, tuple(c % p for c in coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def _check(self, other: "FpVector") -> None:
        if self.p != other.p or self.dim != other.dim:
            raise DimensionMismatchError(
                f"vector mismatch: F_{self.p}^{self.dim} vs F_{other.p}^{other.dim}"
            )

    def __add__(self, other: "FpVector") -> "FpVector":
        self._check(other)
        return FpVector(self.p, tuple((a + b) % self.p for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "FpVector") -> "FpVector":
        self._check(other)
        return FpVector(self.p, tuple((a - b) % self.p for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "FpVector":
        return FpVector(self.p, tuple((-a) % self.p for a in self.coords))

    def scale(self, c: int) -> "FpVector":
        c %= self.p
        return FpVector(self.p, tuple(a * c % self.p for a in self.coords))

    def pack_bits(self) -> int:
        """Pack an F_2 vector into an int bitset (bit i = coordinate i)."""
        if self.p != 2:
            raise ValueError("pack_bits requires p = 2")
        bits = 0
        for i, c in enumerate(self.coords):
            bits |= c << i
        return bits

    @staticmethod
    def unpack_bits(bits: int, dim: int) -> "FpVector":
        return FpVector(2, tuple((bits >> i) & 1 for i in range(dim)))


@dataclass(frozen=True)
class BilinearForm:
    """Bilinear form f(x, y) = sum_ij x_i coeffs[i][j] y_j over F_p."""

    p: int
    coeffs: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        check_prime(self.p)
        d = len(self.coeffs)
        if any(len(row) != d for row in self.coeffs):
            raise DimensionMismatchError("form coefficient array must be square")
        if any(not 0 <= c < self.p for row in self.coeffs for c in row):
            object.__setattr__(
                self, "coeffs", tuple(tuple(c % self.p for c in row) for row in self.coeffs)
            )

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @staticmethod
    def from_rows(p: int, rows: Sequence[Sequence[int]]) -> "BilinearForm":
        return BilinearForm(p, tuple(tuple(c % p for c in row) for row in rows))


def form_eval(f: BilinearForm, x: FpVector, y: FpVector) -> int:
    """Evaluate f(x, y) mod p."""
    if x.p != f.p or y.p != f.p or x.dim != f.dim or y.dim != f.dim:
        raise DimensionMismatchError(
            f"form_eval: form is F_{f.p}^{f.dim}, got vectors of dim {x.dim}/{y.dim}"
        )
    total = 0
    for i, xi in enumerate(x.coords):
        if xi:
            row = f.coeffs[i]
            total += xi * sum(cij * yj for cij, yj in zip(row, y.coords))
    return total % f.p


def symm_part(f: BilinearForm) -> BilinearForm:
    """f^S(x, y) = f(x, y) + f(y, x)."""
    d = f.dim
    return BilinearForm(
        f.p, tuple(tuple((f.coeffs[i][j] + f.coeffs[j][i]) % f.p for j in range(d)) for i in range(d))
    )


def antisymm_part(f: BilinearForm) -> BilinearForm:
    """f^A(x, y) = f(x, y) - f(y, x)."""
    d = f.dim
    return BilinearForm(
        f.p, tuple(tuple((f.coeffs[i][j] - f.coeffs[j][i]) % f.p for j in range(d)) for i in range(d))
    )


def hyperbolic_form(p: int, n: int) -> BilinearForm:
    """Form on F_p^(2n) with f(e_i, e'_j) = delta_ij and all other basis pairings 0.

    Coordinates are ordered (e_1 .. e_n, e'_1 .. e'_n).
    """
    check_prime(p)
    if n < 1:
        raise ValueError("hyperbolic_form requires n >= 1")
    d = 2 * n
    rows = [[0] * d for _ in range(d)]
    for i in range(n):
        rows[i][n + i] = 1
    return BilinearForm.from_rows(p, rows)


# Row reduction helpers (dense, exact, small dimensions).


def rref(rows: Sequence[Sequence[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form mod p; returns (nonzero rows, pivot columns)."""
    work = [[c % p for c in row] for row in rows]
    ncols = len(work[0]) if work else 0
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(work)) if work[i][col]), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = pow(work[r][col], p - 2, p) if p > 2 else 1
        work[r] = [c * inv % p for c in work[r]]
        for i in range(len(work)):
            if i != r and work[i][col]:
                m = work[i][col]
                work[i] = [(a - m * b) % p for a, b in zip(work[i], work[r])]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def matrix_rank(rows: Sequence[Sequence[int]], p: int) -> int:
    if not rows:
        return 0
    return len(rref(rows, p)[0])


def nullspace(rows: Sequence[Sequence[int]], p: int, ncols: int) -> list[FpVector]:
    """Basis of {y : rows @ y = 0} over F_p."""
    if not rows:
        return [FpVector.basis(p, ncols, i) for i in range(ncols)]
    reduced, pivots = rref(rows, p)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [0] * ncols
        vec[free] = 1
        for r, col in enumerate(pivots):
            vec[col] = (-reduced[r][free]) % p
        basis.append(FpVector(p, tuple(vec)))
    return basis


def row_space_basis(rows: Sequence[Sequence[int]], p: int) -> list[FpVector]:
    if not rows:
        return []
    reduced, _ = rref(rows, p)
    return [FpVector(p, tuple(r)) for r in reduced]


def rank(f: BilinearForm) -> int:
    """Rank of the coefficient array by Gaussian elimination over F_p."""
    return matrix_rank(f.coeffs, f.p)


def is_nondegenerate(f: BilinearForm) -> bool:
    return rank(f) == f.dim


def slice_kernel(f: BilinearForm, x: FpVector) -> list[FpVector]:
    """Basis of {y : f(x, y) = 0}."""
    if x.p != f.p or x.dim != f.dim:
        raise DimensionMismatchError("slice_kernel: vector does not match form")
    row = [sum(xi * f.coeffs[i][j] for i, xi in enumerate(x.coords)) % f.p for j in range(f.dim)]
    return nullspace([row], f.p, f.dim)


# Packed-bit fast path over F_2.  Semantics match the generic routines and
# are tested for equality against them.


def gf2_rank(rows: list[int], ncols: int) -> int:
    """Rank over GF(2) of rows given as int bitsets."""
    work = rows[:]
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(work)) if (work[i] >> col) & 1), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        for i in range(len(work)):
            if i != r and (work[i] >> col) & 1:
                work[i] ^= work[r]
        r += 1
        if r == len(work):
            break
    return r


def gf2_span(basis: list[int]) -> list[int]:
    """All 2^k combinations of k packed basis vectors (with repeats collapsed)."""
    span = [0]
    for b in basis:
        span += [v ^ b for v in span]
    return sorted(set(span))


# Form file I/O.  Text format: line 1 "p d", then d lines of d residues.
# The keyword "hyperbolic:p:n" is accepted wherever a form file is accepted.


def parse_form(text: str) -> BilinearForm:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("form file must start with 'p d'")
    try:
        p, d = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise ValueError(f"bad form header: {exc}") from exc
    check_prime(p)
    if len(tokens) != 2 + d * d:
        raise ValueError(f"form file needs {d * d} entries, found {len(tokens) - 2}")
    try:
        entries = [int(t) for t in tokens[2:]]
    except ValueError as exc:
        raise ValueError(f"bad form entry: {exc}") from exc
    if any(not 0 <= e < p for e in entries):
        raise ValueError("form entries must lie in [0, p)")
    rows = [entries[i * d : (i + 1) * d] for i in range(d)]
    return BilinearForm.from_rows(p, rows)


def load_form(source: "str | Path | io.TextIOBase") -> BilinearForm:
    """Load a form from a path, file object, or 'hyperbolic:p:n' keyword."""
    if isinstance(source, str) and source.startswith("hyperbolic:"):
        parts = source.split(":")
        if len(parts) != 3:
            raise ValueError("expected hyperbolic:p:n")
        return hyperbolic_form(int(parts[1]), int(parts[2]))
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    return parse_form(text)


def format_form(f: BilinearForm) -> str:
    lines = [f"{f.p} {f.dim}"]
    lines += [" ".join(str(c) for c in row) for row in f.coeffs]
    return "\n".join(lines) + "\n"
