"""Vectorized engine for stacks of graded-algebra elements.

Mirrors the scalar formulas in `algebra` with numpy einsums; the two
implementations are cross-checked by tests.  Stacks hold int64 arrays and
every product reduces mod p, so intermediate values stay tiny.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .algebra import AlgebraElement, AlgebraParams


class Batch(NamedTuple):
    """N stacked elements: c0 (N,), r1 (N,d), r2 (N,d,d), r3 (N,d), c4 (N,)."""

    c0: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    c4: np.ndarray

    @property
    def count(self) -> int:
        return self.c0.shape[0]


class BatchAlg:
    """Algebra arithmetic over stacks, bound to one parameter set."""

    def __init__(self, params: AlgebraParams):
        self.params = params
        self.p = params.p
        self.d = params.d
        self.F = np.array(params.form.coeffs, dtype=np.int64)

    def zeros(self, n: int) -> Batch:
        d = self.d
        return Batch(
            np.zeros(n, dtype=np.int64),
            np.zeros((n, d), dtype=np.int64),
            np.zeros((n, d, d), dtype=np.int64),
            np.zeros((n, d), dtype=np.int64),
            np.zeros(n, dtype=np.int64),
        )

    def ones(self, n: int) -> Batch:
        out = self.zeros(n)
        out.c0[:] = 1
        return out

    def from_elements(self, elems: Sequence[AlgebraElement]) -> Batch:
        return Batch(
            np.array([e.c0 for e in elems], dtype=np.int64),
            np.array([e.r1 for e in elems], dtype=np.int64),
            np.array([e.r2 for e in elems], dtype=np.int64),
            np.array([e.r3 for e in elems], dtype=np.int64),
            np.array([e.c4 for e in elems], dtype=np.int64),
        )

    def to_elements(self, b: Batch) -> list[AlgebraElement]:
        return [
            AlgebraElement(
                self.params,
                int(b.c0[i]),
                tuple(int(v) for v in b.r1[i]),
                tuple(tuple(int(v) for v in row) for row in b.r2[i]),
                tuple(int(v) for v in b.r3[i]),
                int(b.c4[i]),
            )
            for i in range(b.count)
        ]

    def add(self, a: Batch, b: Batch) -> Batch:
        p = self.p
        return Batch(*(np.mod(x + y, p) for x, y in zip(a, b)))

    def neg(self, a: Batch) -> Batch:
        p = self.p
        return Batch(*(np.mod(-x, p) for x in a))

    def sub(self, a: Batch, b: Batch) -> Batch:
        p = self.p
        return Batch(*(np.mod(x - y, p) for x, y in zip(a, b)))

    def mul(self, a: Batch, b: Batch) -> Batch:
        p, F = self.p, self.F
        a0, a1, A2, a3, a4 = a
        b0, b1, B2, b3, b4 = b

        c0 = a0 * b0 % p
        r1 = (a0[:, None] * b1 + b0[:, None] * a1) % p
        r2 = (a0[:, None, None] * B2 + b0[:, None, None] * A2 + a1[:, :, None] * b1[:, None, :]) % p

        tA = np.einsum("nij,ij->n", A2, F) % p
        tB = np.einsum("nij,ij->n", B2, F) % p
        a1F = a1 @ F % p
        Fb1 = b1 @ F.T % p
        a3F = a3 @ F % p

        r3 = (
            a0[:, None] * b3
            + b0[:, None] * a3
            + tB[:, None] * a1
            + np.einsum("ni,nij->nj", a1F, B2)
            + tA[:, None] * b1
            + np.einsum("nji,ni->nj", A2, Fb1)
        ) % p

        AF = np.einsum("nik,kj->nij", A2, F) % p
        AFB = np.einsum("nik,nkj->nij", AF, B2) % p
        c4 = (
            a0 * b4
            + b0 * a4
            + np.einsum("nj,nj->n", a1F, b3)
            + np.einsum("nj,nj->n", a3F, b1)
            + tA * tB
            + np.einsum("nij,ij->n", AFB, F)
        ) % p

        return Batch(c0, r1, r2, r3, c4)

    def lie_bracket(self, a: Batch, b: Batch) -> Batch:
        return self.sub(self.mul(a, b), self.mul(b, a))

    def embed_r1(self, vecs: np.ndarray) -> Batch:
        out = self.zeros(vecs.shape[0])
        out.r1[:] = vecs % self.p
        return out

    # Closed-form brackets on (N, d) vector stacks.

    def _fs(self) -> np.ndarray:
        return (self.F + self.F.T) % self.p

    def _fa(self) -> np.ndarray:
        return (self.F - self.F.T) % self.p

    def lie3(self, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        p = self.p
        FS = self._fs()
        fs_yz = np.einsum("ni,ij,nj->n", y, FS, z) % p
        fs_xz = np.einsum("ni,ij,nj->n", x, FS, z) % p
        return (fs_yz[:, None] * x - fs_xz[:, None] * y) % p

    def lie4(self, x: np.ndarray, y: np.ndarray, z: np.ndarray, w: np.ndarray) -> np.ndarray:
        p = self.p
        FS, FA = self._fs(), self._fa()
        fa_xw = np.einsum("ni,ij,nj->n", x, FA, w) % p
        fs_yz = np.einsum("ni,ij,nj->n", y, FS, z) % p
        fa_yw = np.einsum("ni,ij,nj->n", y, FA, w) % p
        fs_xz = np.einsum("ni,ij,nj->n", x, FS, z) % p
        return (fa_xw * fs_yz - fa_yw * fs_xz) % p

    # Group operations on L1 stacks (c0 identically 0).

    def grp_mul(self, a: Batch, b: Batch) -> Batch:
        return self.add(self.add(a, b), self.mul(a, b))

    def grp_inv(self, a: Batch) -> Batch:
        # (1+a)^-1 = 1 - a + a^2 - a^3 + a^4; the series stops at grade 4.
        sq = self.mul(a, a)
        cube = self.mul(sq, a)
        quad = self.mul(cube, a)
        return self.add(self.sub(self.sub(sq, a), cube), quad)

    def commutator(self, a: Batch, b: Batch) -> Batch:
        ia = self.grp_inv(a)
        ib = self.grp_inv(b)
        return self.grp_mul(self.grp_mul(ia, ib), self.grp_mul(a, b))

    def long_commutator(self, stacks: Sequence[Batch]) -> Batch:
        if len(stacks) < 2:
            raise ValueError("long commutator needs at least 2 entries")
        acc = stacks[0]
        for nxt in stacks[1:]:
            acc = self.commutator(acc, nxt)
        return acc

    def conjugate(self, a: Batch, by: Batch) -> Batch:
        inv = self.grp_inv(by)
        return self.grp_mul(self.grp_mul(inv, a), by)

    def is_identity(self, a: Batch) -> np.ndarray:
        flat = self.coords(a)
        return ~flat.any(axis=1)

    def random_l1(self, rng: np.random.Generator, n: int) -> Batch:
        """Uniform over L1: independent uniform digits in every coordinate."""
        d, p = self.d, self.p
        return Batch(
            np.zeros(n, dtype=np.int64),
            rng.integers(0, p, size=(n, d), dtype=np.int64),
            rng.integers(0, p, size=(n, d, d), dtype=np.int64),
            rng.integers(0, p, size=(n, d), dtype=np.int64),
            rng.integers(0, p, size=n, dtype=np.int64),
        )

    # Flat L1 coordinates in the documented order (r1, r2 row-major, r3, c4).

    def coords(self, a: Batch) -> np.ndarray:
        n, d = a.count, self.d
        return np.concatenate(
            [a.r1, a.r2.reshape(n, d * d), a.r3, a.c4[:, None]], axis=1
        )

    def from_coords(self, flat: np.ndarray) -> Batch:
        n, d = flat.shape[0], self.d
        return Batch(
            np.zeros(n, dtype=np.int64),
            flat[:, :d].astype(np.int64),
            flat[:, d : d + d * d].reshape(n, d, d).astype(np.int64),
            flat[:, d + d * d : 2 * d + d * d].astype(np.int64),
            flat[:, -1].astype(np.int64),
        )
