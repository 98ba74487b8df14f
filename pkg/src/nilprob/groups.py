"""Group arithmetic: the class-4 family G = 1 + L1 and Cayley-table groups.

Family elements are stored by the L1-part a of 1 + a.  Conjugacy orbits in
the family use the fact that conjugation by a fixed element is linear on L1,
so each generator contributes one matrix and orbits close under matrix
application.  Cayley-table groups are validated on load and cache their
inverse array and conjugacy classes.
"""

from __future__ import annotations

import io
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._batch import Batch, BatchAlg
from .algebra import AlgebraElement, AlgebraParams, alg_mul
from .errors import (
    CapExceededError,
    CayleyAssociativityError,
    CayleyIdentityError,
    CayleyParseError,
    CayleyPermutationError,
    DimensionMismatchError,
    OrbitOverflowError,
    ParamsMismatchError,
)

DEFAULT_ORBIT_CAP = 1 << 16
DEFAULT_ENUM_CAP = 1 << 14

Matrix = tuple[tuple[int, ...], ...]


class GroupElement:
    """Element 1 + a of the family group, stored by the L1-part a."""

    __slots__ = ("params", "r1", "r2", "r3", "c4", "_hash")

    def __init__(
        self,
        params: AlgebraParams,
        r1: tuple[int, ...],
        r2: Matrix,
        r3: tuple[int, ...],
        c4: int,
    ):
        d, p = params.d, params.p
        if len(r1) != d or len(r3) != d or len(r2) != d or any(len(row) != d for row in r2):
            raise DimensionMismatchError("component dimensions do not match params")
        self.params = params
        self.r1 = tuple(c % p for c in r1)
        self.r2 = tuple(tuple(c % p for c in row) for row in r2)
        self.r3 = tuple(c % p for c in r3)
        self.c4 = c4 % p
        self._hash: int | None = None

    @staticmethod
    def identity(params: AlgebraParams) -> "GroupElement":
        d = params.d
        z = (0,) * d
        return GroupElement(params, z, tuple((0,) * d for _ in range(d)), z, 0)

    @staticmethod
    def from_l1(a: AlgebraElement) -> "GroupElement":
        if a.c0 != 0:
            raise ValueError("L1-part must have zero grade-0 component")
        return GroupElement(a.params, a.r1, a.r2, a.r3, a.c4)

    def l1_part(self) -> AlgebraElement:
        return AlgebraElement(self.params, 0, self.r1, self.r2, self.r3, self.c4)

    def coords(self) -> tuple[int, ...]:
        """Flat L1 digits in the order (r1, r2 row-major, r3, c4)."""
        flat = list(self.r1)
        for row in self.r2:
            flat.extend(row)
        flat.extend(self.r3)
        flat.append(self.c4)
        return tuple(flat)

    @staticmethod
    def from_coords(params: AlgebraParams, flat: Sequence[int]) -> "GroupElement":
        d = params.d
        if len(flat) != params.dim_l1:
            raise DimensionMismatchError("coordinate length does not match params")
        r1 = tuple(flat[:d])
        r2 = tuple(tuple(flat[d + i * d : d + (i + 1) * d]) for i in range(d))
        r3 = tuple(flat[d + d * d : 2 * d + d * d])
        return GroupElement(params, r1, r2, r3, flat[-1])

    def is_identity(self) -> bool:
        return (
            self.c4 == 0
            and all(c == 0 for c in self.r1)
            and all(c == 0 for c in self.r3)
            and all(c == 0 for row in self.r2 for c in row)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return (
            self.params == other.params
            and self.r1 == other.r1
            and self.r2 == other.r2
            and self.r3 == other.r3
            and self.c4 == other.c4
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.r1, self.r2, self.r3, self.c4))
        return self._hash

    def __repr__(self) -> str:
        return f"GroupElement(coords={self.coords()!r})"


def _same_params(g: GroupElement, h: GroupElement) -> AlgebraParams:
    if g.params != h.params:
        raise ParamsMismatchError("elements belong to different groups")
    return g.params


def grp_mul(g: GroupElement, h: GroupElement) -> GroupElement:
    """(1+a)(1+b) = 1 + a + b + ab."""
    _same_params(g, h)
    a, b = g.l1_part(), h.l1_part()
    return GroupElement.from_l1(a + b + alg_mul(a, b))


def grp_inv(g: GroupElement) -> GroupElement:
    """(1+a)^-1 = 1 - a + a^2 - a^3 + a^4 (the series stops: a^5 = 0)."""
    a = g.l1_part()
    sq = alg_mul(a, a)
    cube = alg_mul(sq, a)
    quad = alg_mul(cube, a)
    return GroupElement.from_l1(-a + sq - cube + quad)


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """[g, h] = g^-1 h^-1 g h."""
    return grp_mul(grp_mul(grp_inv(g), grp_inv(h)), grp_mul(g, h))


def long_commutator(elems: Sequence[GroupElement]) -> GroupElement:
    """Left-normed [g1, ..., gk] = [[g1, ..., g_{k-1}], gk]; needs k >= 2."""
    if len(elems) < 2:
        raise ValueError("long commutator needs at least 2 entries")
    acc = elems[0]
    for nxt in elems[1:]:
        acc = commutator(acc, nxt)
    return acc


def conjugate(g: GroupElement, by: GroupElement) -> GroupElement:
    """g^by = by^-1 g by."""
    return grp_mul(grp_mul(grp_inv(by), g), by)


class AlgebraGroup:
    """The family group G = 1 + L1 for a fixed parameter set.

    Immutable after construction; cached data (conjugation matrices, class
    sizes, class list) is built idempotently and is safe for concurrent
    readers afterwards.
    """

    def __init__(self, params: AlgebraParams, orbit_cap: int = DEFAULT_ORBIT_CAP):
        self.params = params
        self.orbit_cap = orbit_cap
        self.dim_l1 = params.dim_l1
        self.order = params.p ** self.dim_l1
        self.identity = GroupElement.identity(params)
        self._class_size_cache: dict[tuple[int, ...], int] = {}
        self._classes: list[tuple[GroupElement, int]] | None = None

    @cached_property
    def batch(self) -> BatchAlg:
        return BatchAlg(self.params)

    @cached_property
    def generators(self) -> list[GroupElement]:
        """1 + e for e over the graded basis of L1 (r1, r2, r3, c4 order)."""
        out = []
        m = self.dim_l1
        for i in range(m):
            flat = [0] * m
            flat[i] = 1
            out.append(GroupElement.from_coords(self.params, flat))
        return out

    @cached_property
    def _conj_matrices(self) -> np.ndarray:
        """Stack (n_gen, m, m): column image of each basis vector under
        a -> (1+t)^-1 a (1+t), which is linear in a for fixed t."""
        eng = self.batch
        m = self.dim_l1
        basis = eng.from_coords(np.eye(m, dtype=np.int64))
        mats = np.empty((len(self.generators), m, m), dtype=np.int64)
        for k, gen in enumerate(self.generators):
            one = eng.from_elements([gen.l1_part()])
            t = Batch(*(np.repeat(arr, m, axis=0) for arr in one))
            conj = eng.conjugate(basis, t)
            mats[k] = eng.coords(conj).T % self.params.p
        return mats

    # Element-level conveniences mirroring the module functions.

    def mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        return grp_mul(g, h)

    def inverse(self, g: GroupElement) -> GroupElement:
        return grp_inv(g)

    def commutator(self, g: GroupElement, h: GroupElement) -> GroupElement:
        return commutator(g, h)

    def long_commutator(self, elems: Sequence[GroupElement]) -> GroupElement:
        return long_commutator(elems)

    def conjugate(self, g: GroupElement, by: GroupElement) -> GroupElement:
        return conjugate(g, by)

    def random_elements(self, rng: np.random.Generator, count: int) -> list[GroupElement]:
        stack = self.batch.random_l1(rng, count)
        flat = self.batch.coords(stack)
        return [GroupElement.from_coords(self.params, tuple(int(v) for v in row)) for row in flat]

    def elements(self, cap: int = DEFAULT_ENUM_CAP) -> Iterator[GroupElement]:
        """All elements in lexicographic coordinate order (small groups only)."""
        if self.order > cap:
            raise CapExceededError(f"group order {self.order} exceeds enumeration cap {cap}")
        p, m = self.params.p, self.dim_l1
        flat = [0] * m
        while True:
            yield GroupElement.from_coords(self.params, flat)
            i = m - 1
            while i >= 0 and flat[i] == p - 1:
                flat[i] = 0
                i -= 1
            if i < 0:
                return
            flat[i] += 1

    def _orbit_coords(self, start: np.ndarray, cap: int) -> set[bytes]:
        p = self.params.p
        mats = self._conj_matrices
        start = start % p
        seen = {start.astype(np.uint8).tobytes()}
        frontier = [start]
        while frontier:
            stack = np.stack(frontier)
            images = np.einsum("gij,nj->gni", mats, stack) % p
            images = images.reshape(-1, self.dim_l1).astype(np.uint8)
            frontier = []
            for row in np.unique(images, axis=0):
                key = row.tobytes()
                if key not in seen:
                    seen.add(key)
                    frontier.append(row.astype(np.int64))
            if len(seen) > cap:
                raise OrbitOverflowError(f"orbit exceeded cap {cap}")
        return seen

    def conjugacy_orbit(self, g: GroupElement, cap: int | None = None) -> set[GroupElement]:
        cap = self.orbit_cap if cap is None else cap
        start = np.array(g.coords(), dtype=np.int64)
        keys = self._orbit_coords(start, cap)
        out = set()
        for key in keys:
            flat = np.frombuffer(key, dtype=np.uint8)
            out.add(GroupElement.from_coords(self.params, tuple(int(v) for v in flat)))
        return out

    def class_size(self, g: GroupElement, cap: int | None = None) -> int:
        key = g.coords()
        size = self._class_size_cache.get(key)
        if size is None:
            cap = self.orbit_cap if cap is None else cap
            orbit = self._orbit_coords(np.array(key, dtype=np.int64), cap)
            size = len(orbit)
            for member in orbit:
                flat = np.frombuffer(member, dtype=np.uint8)
                self._class_size_cache[tuple(int(v) for v in flat)] = size
        return size

    def centralizer_order(self, g: GroupElement) -> int:
        return self.order // self.class_size(g)

    def conjugacy_classes(self, cap: int = DEFAULT_ENUM_CAP) -> list[tuple[GroupElement, int]]:
        """(representative, size) pairs; requires an enumerable group."""
        if self._classes is not None:
            return self._classes
        if self.order > cap:
            raise CapExceededError(f"group order {self.order} exceeds enumeration cap {cap}")
        seen: set[bytes] = set()
        classes = []
        for g in self.elements(cap):
            key = np.array(g.coords(), dtype=np.uint8).tobytes()
            if key in seen:
                continue
            orbit = self._orbit_coords(np.array(g.coords(), dtype=np.int64), self.orbit_cap)
            seen |= orbit
            size = len(orbit)
            self._class_size_cache.setdefault(g.coords(), size)
            classes.append((g, size))
        self._classes = classes
        return classes

    def sample_batch(self, rng: np.random.Generator, count: int) -> Batch:
        return self.batch.random_l1(rng, count)


class TableGroup:
    """Finite group given by an m x m Cayley table of indices; identity is 0.

    The table is validated on construction (permutation rows/columns,
    two-sided identity, associativity: full check for m <= assoc_full_limit,
    otherwise a deterministic randomized triple check).
    """

    def __init__(
        self,
        table: Sequence[Sequence[int]] | np.ndarray,
        name: str = "table",
        validate: bool = True,
        assoc_full_limit: int = 256,
        assoc_random_triples: int = 10**6,
    ):
        tbl = np.asarray(table, dtype=np.int64)
        if tbl.ndim != 2 or tbl.shape[0] != tbl.shape[1]:
            raise CayleyParseError("table must be square")
        self.table = tbl
        self.order = tbl.shape[0]
        self.name = name
        self.identity = 0
        if validate:
            self._validate(assoc_full_limit, assoc_random_triples)
        self.inv_table = self._build_inverses()
        self._class_sizes: np.ndarray | None = None
        self._classes: list[tuple[int, int]] | None = None

    def _validate(self, full_limit: int, random_triples: int) -> None:
        m, t = self.order, self.table
        if m == 0:
            raise CayleyParseError("empty table")
        if t.min() < 0 or t.max() >= m:
            raise CayleyParseError("table entries must lie in [0, m)")
        full = np.arange(m)
        for i in range(m):
            if not np.array_equal(np.sort(t[i]), full):
                raise CayleyPermutationError(f"row {i} is not a permutation")
            if not np.array_equal(np.sort(t[:, i]), full):
                raise CayleyPermutationError(f"column {i} is not a permutation")
        if not np.array_equal(t[0], full) or not np.array_equal(t[:, 0], full):
            raise CayleyIdentityError("index 0 is not a two-sided identity")
        if m <= full_limit:
            for a in range(m):
                left = t[t[a]]            # left[b, c] = (a b) c
                right = t[a][t]           # right[b, c] = a (b c)
                if not np.array_equal(left, right):
                    raise CayleyAssociativityError(f"associativity fails with a = {a}")
        else:
            rng = np.random.default_rng(0)
            a, b, c = rng.integers(0, m, size=(3, random_triples))
            if not np.array_equal(t[t[a, b], c], t[a, t[b, c]]):
                raise CayleyAssociativityError("randomized associativity check failed")

    def _build_inverses(self) -> np.ndarray:
        m = self.order
        inv = np.empty(m, dtype=np.int64)
        rows, cols = np.nonzero(self.table == 0)
        inv[rows] = cols
        return inv

    # Element operations (elements are indices).

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv_table[a])

    def commutator(self, a: int, b: int) -> int:
        t = self.table
        return int(t[t[self.inv_table[a], self.inv_table[b]], t[a, b]])

    def long_commutator(self, elems: Sequence[int]) -> int:
        if len(elems) < 2:
            raise ValueError("long commutator needs at least 2 entries")
        acc = elems[0]
        for nxt in elems[1:]:
            acc = self.commutator(acc, nxt)
        return acc

    def conjugate(self, a: int, by: int) -> int:
        t = self.table
        return int(t[t[self.inv_table[by], a], by])

    def elements(self) -> range:
        return range(self.order)

    def conjugacy_orbit(self, g: int, cap: int | None = None) -> set[int]:
        t = self.table
        orbit = np.unique(t[t[self.inv_table, g], np.arange(self.order)])
        if cap is not None and len(orbit) > cap:
            raise OrbitOverflowError(f"orbit exceeded cap {cap}")
        return set(int(x) for x in orbit)

    def _ensure_classes(self) -> None:
        if self._classes is not None:
            return
        m, t = self.order, self.table
        sizes = np.zeros(m, dtype=np.int64)
        classes = []
        seen = np.zeros(m, dtype=bool)
        idx = np.arange(m)
        for g in range(m):
            if seen[g]:
                continue
            orbit = np.unique(t[t[self.inv_table, g], idx])
            seen[orbit] = True
            sizes[orbit] = len(orbit)
            classes.append((g, len(orbit)))
        self._class_sizes = sizes
        self._classes = classes

    def conjugacy_classes(self) -> list[tuple[int, int]]:
        self._ensure_classes()
        assert self._classes is not None
        return self._classes

    def class_size(self, g: int) -> int:
        self._ensure_classes()
        assert self._class_sizes is not None
        return int(self._class_sizes[g])

    def centralizer_order(self, g: int) -> int:
        """Exact loop: count h with gh = hg."""
        return int(np.count_nonzero(self.table[g, :] == self.table[:, g]))

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.integers(0, self.order, size=count, dtype=np.int64)

    def __repr__(self) -> str:
        return f"TableGroup({self.name!r}, order={self.order})"


def subgroup_closure(G: TableGroup, seed: Iterable[int]) -> frozenset[int]:
    """Subgroup generated by the given element indices."""
    elems = {0} | set(int(s) for s in seed)
    frontier = list(elems)
    while frontier:
        new = []
        current = list(elems)
        for x in frontier:
            xi = G.inverse(x)
            if xi not in elems:
                elems.add(xi)
                new.append(xi)
            for y in current:
                for z in (G.mul(x, y), G.mul(y, x)):
                    if z not in elems:
                        elems.add(z)
                        new.append(z)
        frontier = new
    return frozenset(elems)


def is_normal(G: TableGroup, H: frozenset[int]) -> bool:
    return all(G.conjugate(h, g) in H for h in H for g in G.elements())


def subgroup_table(G: TableGroup, H: Iterable[int]) -> tuple[TableGroup, list[int]]:
    """Reindex a subgroup as its own TableGroup; returns (group, element list).

    element list maps new indices back to indices in G; index 0 is G's identity.
    """
    members = sorted(set(int(h) for h in H))
    if members[0] != 0:
        raise ValueError("subgroup must contain the identity 0")
    pos = {g: i for i, g in enumerate(members)}
    m = len(members)
    try:
        tbl = [[pos[G.mul(a, b)] for b in members] for a in members]
    except KeyError as exc:
        raise ValueError("element set is not closed under multiplication") from exc
    return TableGroup(np.array(tbl), name=f"{G.name}|sub{m}"), members


def quotient_table(G: TableGroup, N: Iterable[int]) -> tuple[TableGroup, np.ndarray]:
    """Quotient by a normal subgroup; returns (G/N, coset index per element)."""
    Nset = frozenset(int(x) for x in N)
    if not is_normal(G, Nset):
        raise ValueError("subgroup is not normal")
    m = G.order
    coset_of = -np.ones(m, dtype=np.int64)
    reps: list[int] = []
    for g in range(m):
        if coset_of[g] >= 0:
            continue
        members = sorted(G.mul(g, n) for n in Nset)
        coset_of[members] = len(reps)
        reps.append(members[0])
    k = len(reps)
    tbl = [[int(coset_of[G.mul(reps[a], reps[b])]) for b in range(k)] for a in range(k)]
    return TableGroup(np.array(tbl), name=f"{G.name}/N{len(Nset)}"), coset_of


def direct_product(A: TableGroup, B: TableGroup) -> TableGroup:
    """Direct product with index (a, b) -> a * |B| + b."""
    ma, mb = A.order, B.order
    ia, ib = np.divmod(np.arange(ma * mb), mb)
    tbl = A.table[np.ix_(ia, ia)] * mb + B.table[np.ix_(ib, ib)]
    return TableGroup(tbl, name=f"{A.name}x{B.name}")


# Cayley table text format: line 1 "m"; then m lines of m indices in [0, m).


def parse_cayley_table(text: str, name: str = "table") -> TableGroup:
    tokens = text.split()
    if not tokens:
        raise CayleyParseError("empty table source")
    try:
        m = int(tokens[0])
    except ValueError as exc:
        raise CayleyParseError(f"bad order: {tokens[0]!r}") from exc
    if m <= 0:
        raise CayleyParseError("order must be positive")
    if len(tokens) != 1 + m * m:
        raise CayleyParseError(f"expected {m * m} entries, found {len(tokens) - 1}")
    try:
        entries = [int(t) for t in tokens[1:]]
    except ValueError as exc:
        raise CayleyParseError(f"bad entry: {exc}") from exc
    if any(not 0 <= e < m for e in entries):
        raise CayleyParseError("entries must lie in [0, m)")
    rows = [entries[i * m : (i + 1) * m] for i in range(m)]
    return TableGroup(np.array(rows), name=name)


def load_cayley_table(source: "str | Path | io.TextIOBase", name: str | None = None) -> TableGroup:
    if isinstance(source, (str, Path)):
        path = Path(source)
        return parse_cayley_table(path.read_text(), name=name or path.stem)
    return parse_cayley_table(source.read(), name=name or "table")


def format_cayley_table(G: TableGroup) -> str:
    lines = [str(G.order)]
    lines += [" ".join(str(int(x)) for x in row) for row in G.table]
    return "\n".join(lines) + "\n"
