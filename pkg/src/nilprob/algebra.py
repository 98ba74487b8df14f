"""Graded algebra R = R0 + R1 + R2 + R3 + R4 driven by a bilinear form.

R0 = F_p, R1 = V, R2 = V (x) V, R3 = V (identified with R1 by the coordinate
map), R4 = F_p; products landing in grade > 4 vanish.  The generating rules
on pure vectors are

    x * y          = x (x) y                         (R1 x R1 -> R2)
    x * (y (x) z)  = f(y,z) x' + f(x,y) z'           (R1 x R2 -> R3)
    (y (x) z) * x  = f(z,x) y' + f(y,z) x'           (R2 x R1 -> R3)
    x * w'  =  w' * x  =  f(x or w, ...)             (R1 x R3, R3 x R1 -> R4)

where ' marks the R3 copy of a vector; R2 x R2 follows by associativity.
General R2 elements multiply via the contraction identities obtained by
extending these rules bilinearly.  This module keeps everything as exact
tuples; see _batch for the vectorized engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import DimensionMismatchError, ParamsMismatchError
from .fieldlin import BilinearForm, FpVector, antisymm_part, check_prime, hyperbolic_form, symm_part

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class AlgebraParams:
    """Prime p, vector space dimension d, and the driving form on V."""

    p: int
    d: int
    form: BilinearForm

    def __post_init__(self) -> None:
        check_prime(self.p)
        if self.form.p != self.p:
            raise DimensionMismatchError("form modulus does not match params")
        if self.form.dim != self.d:
            raise DimensionMismatchError("form dimension does not match params")

    @staticmethod
    def hyperbolic(p: int, n: int) -> "AlgebraParams":
        return AlgebraParams(p, 2 * n, hyperbolic_form(p, n))

    @property
    def grading_dims(self) -> tuple[int, int, int, int, int]:
        return (1, self.d, self.d * self.d, self.d, 1)

    @property
    def dim_l1(self) -> int:
        """Dimension of L1 = R1 + R2 + R3 + R4."""
        return self.d * self.d + 2 * self.d + 1

    @cached_property
    def symm(self) -> BilinearForm:
        return symm_part(self.form)

    @cached_property
    def antisymm(self) -> BilinearForm:
        return antisymm_part(self.form)


def _zero_matrix(d: int) -> Matrix:
    return tuple((0,) * d for _ in range(d))


class AlgebraElement:
    """Element of R with components (c0, r1, r2, r3, c4), all reduced mod p."""

    __slots__ = ("params", "c0", "r1", "r2", "r3", "c4", "_hash")

    def __init__(
        self,
        params: AlgebraParams,
        c0: int,
        r1: tuple[int, ...],
        r2: Matrix,
        r3: tuple[int, ...],
        c4: int,
    ):
        d, p = params.d, params.p
        if len(r1) != d or len(r3) != d or len(r2) != d or any(len(row) != d for row in r2):
            raise DimensionMismatchError("component dimensions do not match params")
        self.params = params
        self.c0 = c0 % p
        self.r1 = tuple(c % p for c in r1)
        self.r2 = tuple(tuple(c % p for c in row) for row in r2)
        self.r3 = tuple(c % p for c in r3)
        self.c4 = c4 % p
        self._hash: int | None = None

    @staticmethod
    def zero(params: AlgebraParams) -> "AlgebraElement":
        d = params.d
        z = (0,) * d
        return AlgebraElement(params, 0, z, _zero_matrix(d), z, 0)

    @staticmethod
    def one(params: AlgebraParams) -> "AlgebraElement":
        d = params.d
        z = (0,) * d
        return AlgebraElement(params, 1, z, _zero_matrix(d), z, 0)

    @staticmethod
    def from_r1(params: AlgebraParams, vec: FpVector) -> "AlgebraElement":
        if vec.p != params.p or vec.dim != params.d:
            raise DimensionMismatchError("vector does not match params")
        d = params.d
        return AlgebraElement(params, 0, vec.coords, _zero_matrix(d), (0,) * d, 0)

    @staticmethod
    def from_r3(params: AlgebraParams, vec: FpVector) -> "AlgebraElement":
        if vec.p != params.p or vec.dim != params.d:
            raise DimensionMismatchError("vector does not match params")
        d = params.d
        return AlgebraElement(params, 0, (0,) * d, _zero_matrix(d), vec.coords, 0)

    def components(self) -> tuple[int, tuple[int, ...], Matrix, tuple[int, ...], int]:
        return (self.c0, self.r1, self.r2, self.r3, self.c4)

    def grade_components_zero(self, grades: tuple[int, ...]) -> bool:
        """True when every listed graded component vanishes."""
        checks = {
            0: self.c0 == 0,
            1: all(c == 0 for c in self.r1),
            2: all(c == 0 for row in self.r2 for c in row),
            3: all(c == 0 for c in self.r3),
            4: self.c4 == 0,
        }
        return all(checks[g] for g in grades)

    def is_zero(self) -> bool:
        return self.grade_components_zero((0, 1, 2, 3, 4))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.params == other.params and self.components() == other.components()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.c0, self.r1, self.r2, self.r3, self.c4))
        return self._hash

    def __repr__(self) -> str:
        return f"AlgebraElement({to_text(self)!r})"

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return alg_add(self, other)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return alg_sub(self, other)

    def __neg__(self) -> "AlgebraElement":
        return alg_neg(self)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return alg_mul(self, other)


def _same_params(a: AlgebraElement, b: AlgebraElement) -> AlgebraParams:
    if a.params != b.params:
        raise ParamsMismatchError("elements belong to different algebras")
    return a.params


def alg_add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    params = _same_params(a, b)
    p, d = params.p, params.d
    return AlgebraElement(
        params,
        (a.c0 + b.c0) % p,
        tuple((x + y) % p for x, y in zip(a.r1, b.r1)),
        tuple(tuple((a.r2[i][j] + b.r2[i][j]) % p for j in range(d)) for i in range(d)),
        tuple((x + y) % p for x, y in zip(a.r3, b.r3)),
        (a.c4 + b.c4) % p,
    )


def alg_neg(a: AlgebraElement) -> AlgebraElement:
    p, d = a.params.p, a.params.d
    return AlgebraElement(
        a.params,
        -a.c0 % p,
        tuple(-x % p for x in a.r1),
        tuple(tuple(-a.r2[i][j] % p for j in range(d)) for i in range(d)),
        tuple(-x % p for x in a.r3),
        -a.c4 % p,
    )


def alg_sub(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return alg_add(a, alg_neg(b))


def alg_scale(a: AlgebraElement, c: int) -> AlgebraElement:
    p, d = a.params.p, a.params.d
    c %= p
    return AlgebraElement(
        a.params,
        a.c0 * c % p,
        tuple(x * c % p for x in a.r1),
        tuple(tuple(a.r2[i][j] * c % p for j in range(d)) for i in range(d)),
        tuple(x * c % p for x in a.r3),
        a.c4 * c % p,
    )


def _frob(m: Matrix, f: Matrix, d: int) -> int:
    """Entrywise contraction sum_ij m[i][j] f[i][j]."""
    return sum(m[i][j] * f[i][j] for i in range(d) for j in range(d))


def alg_mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Graded product; components of grade > 4 are discarded as zero."""
    params = _same_params(a, b)
    p, d = params.p, params.d
    F = params.form.coeffs
    a0, a1, A2, a3, a4 = a.components()
    b0, b1, B2, b3, b4 = b.components()

    c0 = a0 * b0 % p
    r1 = tuple((a0 * y + b0 * x) % p for x, y in zip(a1, b1))
    r2 = tuple(
        tuple((a0 * B2[i][j] + b0 * A2[i][j] + a1[i] * b1[j]) % p for j in range(d))
        for i in range(d)
    )

    # Contractions shared by the R1xR2 / R2xR1 / R2xR2 rules.
    tA = _frob(A2, F, d)                                     # <A2, F>
    tB = _frob(B2, F, d)                                     # <B2, F>
    a1F = [sum(a1[i] * F[i][j] for i in range(d)) for j in range(d)]   # a1 @ F
    Fb1 = [sum(F[i][j] * b1[j] for j in range(d)) for i in range(d)]   # F @ b1
    a3F = [sum(a3[i] * F[i][j] for i in range(d)) for j in range(d)]   # a3 @ F

    r3 = tuple(
        (
            a0 * b3[j]
            + b0 * a3[j]
            + tB * a1[j]
            + sum(a1F[i] * B2[i][j] for i in range(d))
            + tA * b1[j]
            + sum(A2[j][i] * Fb1[i] for i in range(d))
        )
        % p
        for j in range(d)
    )

    # R2 x R2 lands in R4: <A2,F><B2,F> + <A2 F B2, F>.
    AF = [[sum(A2[i][k] * F[k][j] for k in range(d)) % p for j in range(d)] for i in range(d)]
    AFB = [[sum(AF[i][k] * B2[k][j] for k in range(d)) % p for j in range(d)] for i in range(d)]
    c4 = (
        a0 * b4
        + b0 * a4
        + sum(a1F[j] * b3[j] for j in range(d))
        + sum(a3F[j] * b1[j] for j in range(d))
        + tA * tB
        + sum(AFB[i][j] * F[i][j] for i in range(d) for j in range(d))
    ) % p

    return AlgebraElement(params, c0, r1, r2, r3, c4)


def lie_bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """[a, b] = a*b - b*a."""
    return alg_sub(alg_mul(a, b), alg_mul(b, a))


def lie3_closed(params: AlgebraParams, x: FpVector, y: FpVector, z: FpVector) -> FpVector:
    """Triple bracket of vectors: fS(y,z) x - fS(x,z) y, in R3 coordinates."""
    _check_vecs(params, x, y, z)
    p = params.p
    fs = params.symm.coeffs
    fs_yz = _form_val(fs, y.coords, z.coords, p)
    fs_xz = _form_val(fs, x.coords, z.coords, p)
    return FpVector(p, tuple((fs_yz * xi - fs_xz * yi) % p for xi, yi in zip(x.coords, y.coords)))


def lie4_closed(
    params: AlgebraParams, x: FpVector, y: FpVector, z: FpVector, w: FpVector
) -> int:
    """Quadruple bracket of vectors: fA(x,w) fS(y,z) - fA(y,w) fS(x,z), in R4."""
    _check_vecs(params, x, y, z, w)
    p = params.p
    fs = params.symm.coeffs
    fa = params.antisymm.coeffs
    return (
        _form_val(fa, x.coords, w.coords, p) * _form_val(fs, y.coords, z.coords, p)
        - _form_val(fa, y.coords, w.coords, p) * _form_val(fs, x.coords, z.coords, p)
    ) % p


def _form_val(coeffs: Matrix, x: tuple[int, ...], y: tuple[int, ...], p: int) -> int:
    return sum(xi * cij * yj for xi, row in zip(x, coeffs) for cij, yj in zip(row, y)) % p


def _check_vecs(params: AlgebraParams, *vecs: FpVector) -> None:
    for v in vecs:
        if v.p != params.p or v.dim != params.d:
            raise DimensionMismatchError("vector does not match params")


def basis_elements(params: AlgebraParams) -> list[AlgebraElement]:
    """The graded basis of R: unit, e_i, e_i (x) e_j, e_i', R4 unit."""
    d = params.d
    out = [AlgebraElement.one(params)]
    for i in range(d):
        out.append(AlgebraElement.from_r1(params, FpVector.basis(params.p, d, i)))
    for i in range(d):
        for j in range(d):
            r2 = tuple(
                tuple(1 if (a, b) == (i, j) else 0 for b in range(d)) for a in range(d)
            )
            out.append(AlgebraElement(params, 0, (0,) * d, r2, (0,) * d, 0))
    for i in range(d):
        out.append(AlgebraElement.from_r3(params, FpVector.basis(params.p, d, i)))
    z = (0,) * d
    out.append(AlgebraElement(params, 0, z, _zero_matrix(d), z, 1))
    return out


# Text serialization: "c0 | r1 | r2 rows ; separated | r3 | c4", digits in
# base 10 separated by spaces.  Example (d = 2): "1 | 0 1 | 0 0 ; 1 0 | 0 0 | 1".


def to_text(a: AlgebraElement) -> str:
    r2_text = " ; ".join(" ".join(str(c) for c in row) for row in a.r2)
    return " | ".join(
        [
            str(a.c0),
            " ".join(str(c) for c in a.r1),
            r2_text,
            " ".join(str(c) for c in a.r3),
            str(a.c4),
        ]
    )


def from_text(params: AlgebraParams, text: str) -> AlgebraElement:
    parts = [part.strip() for part in text.split("|")]
    if len(parts) != 5:
        raise ValueError("element text must have 5 '|'-separated fields")
    d = params.d
    c0 = int(parts[0])
    r1 = tuple(int(t) for t in parts[1].split())
    rows = [row.strip() for row in parts[2].split(";")]
    if len(rows) != d:
        raise ValueError(f"expected {d} rows in r2 field")
    r2 = tuple(tuple(int(t) for t in row.split()) for row in rows)
    r3 = tuple(int(t) for t in parts[3].split())
    c4 = int(parts[4])
    return AlgebraElement(params, c0, r1, r2, r3, c4)
