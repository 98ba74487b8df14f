"""Nilpotency-degree statistics, conjugacy-class norms, and covering checks.

All estimators are pure functions of (group, seed).  Exact values are
Fractions; Monte Carlo estimates carry a two-sided 99% Clopper-Pearson
interval and are deterministic for a fixed seed regardless of thread count
(fixed chunking, one child RNG stream per chunk).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.stats import beta as _beta

from .errors import CapExceededError
from .groups import AlgebraGroup, GroupElement, TableGroup, subgroup_table

DEFAULT_SEED = 1729
D1_CAP = 1 << 16
D2_CAP = 1 << 10
COVER_PAIR_CAP = 1 << 24
MC_CHUNK = 1 << 16

Group = Union[AlgebraGroup, TableGroup]


@dataclass
class StatReport:
    """Exact or interval-valued probability statistic with provenance."""

    kind: str                      # "exact" | "monte-carlo"
    value: Fraction | float
    ci_low: float | None = None
    ci_high: float | None = None
    samples: int | None = None
    seed: int | None = None
    elapsed_s: float = 0.0

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "exact":
            frac = Fraction(self.value)
            out["value_num"] = frac.numerator
            out["value_den"] = frac.denominator
        else:
            out["estimate"] = float(self.value)
            out["ci_low"] = self.ci_low
            out["ci_high"] = self.ci_high
            out["samples"] = self.samples
            out["seed"] = self.seed
        out["elapsed_ms"] = round(self.elapsed_s * 1000.0, 3)
        return out


@dataclass
class CoveringWitness:
    """Result of a covering-condition check Comm(G,G) within B*S."""

    n: int
    S: list
    verified_fraction: Fraction
    counterexample: object | None
    exhaustive: bool
    checked: int
    exact_minimum: bool | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def __bool__(self) -> bool:
        return self.ok


def clopper_pearson(hits: int, samples: int, confidence: float = 0.99) -> tuple[float, float]:
    """Two-sided exact binomial confidence interval."""
    alpha = 1.0 - confidence
    lo = 0.0 if hits == 0 else float(_beta.ppf(alpha / 2, hits, samples - hits + 1))
    hi = 1.0 if hits == samples else float(_beta.ppf(1 - alpha / 2, hits + 1, samples - hits))
    return lo, hi


def d1_exact(G: Group, cap: int = D1_CAP) -> StatReport:
    """Commuting probability: number of conjugacy classes over |G|."""
    t0 = time.perf_counter()
    if G.order > cap:
        raise CapExceededError(f"|G| = {G.order} exceeds d1 cap {cap}")
    k = len(G.conjugacy_classes())
    return StatReport("exact", Fraction(k, G.order), elapsed_s=time.perf_counter() - t0)


def d2_exact(G: Group, cap: int = D2_CAP) -> StatReport:
    """P([x,y,z] = 1) via sum of centralizer orders of commutators, with the
    outer variable reduced to class representatives weighted by class size."""
    t0 = time.perf_counter()
    if G.order > cap:
        raise CapExceededError(f"|G| = {G.order} exceeds d2 cap {cap}")
    order = G.order
    total = 0
    if isinstance(G, TableGroup):
        t, inv = G.table, G.inv_table
        idx = np.arange(order)
        sizes = np.array([G.class_size(g) for g in range(order)], dtype=np.int64)
        cent = order // sizes
        for rep, size in G.conjugacy_classes():
            comms = t[t[inv[rep], inv[idx]], t[rep, idx]]
            total += size * int(cent[comms].sum())
    else:
        eng = G.batch
        elems = list(G.elements(cap))
        flat = np.array([e.coords() for e in elems], dtype=np.int64)
        stack = eng.from_coords(flat)
        for rep, size in G.conjugacy_classes(cap):
            rep_stack = eng.from_coords(np.tile(np.array(rep.coords(), dtype=np.int64), (order, 1)))
            comms = eng.coords(eng.commutator(rep_stack, stack)).astype(np.uint8)
            row = 0
            for key, cnt in zip(*np.unique(comms, axis=0, return_counts=True)):
                g = GroupElement.from_coords(G.params, tuple(int(v) for v in key))
                row += int(cnt) * (order // G.class_size(g))
            total += size * row
    return StatReport("exact", Fraction(total, order**3), elapsed_s=time.perf_counter() - t0)


def _mc_chunk_hits(G: Group, k: int, size: int, rng: np.random.Generator) -> int:
    if isinstance(G, TableGroup):
        t, inv = G.table, G.inv_table
        acc = G.sample_batch(rng, size)
        for _ in range(k):
            nxt = G.sample_batch(rng, size)
            acc = t[t[inv[acc], inv[nxt]], t[acc, nxt]]
        return int(np.count_nonzero(acc == 0))
    eng = G.batch
    acc = G.sample_batch(rng, size)
    for _ in range(k):
        acc = eng.commutator(acc, G.sample_batch(rng, size))
    return int(np.count_nonzero(eng.is_identity(acc)))


def dk_monte_carlo(
    G: Group,
    k: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    confidence: float = 0.99,
    threads: int = 1,
) -> StatReport:
    """Estimate P([x_1, ..., x_{k+1}] = 1) from uniform (k+1)-tuples."""
    if k < 1 or samples < 1:
        raise ValueError("need k >= 1 and samples >= 1")
    t0 = time.perf_counter()
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i: int) -> int:
        return _mc_chunk_hits(G, k, sizes[i], np.random.default_rng(streams[i]))

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(run, range(len(sizes))))
    else:
        hits = sum(run(i) for i in range(len(sizes)))
    lo, hi = clopper_pearson(hits, samples, confidence)
    return StatReport(
        "monte-carlo",
        hits / samples,
        ci_low=lo,
        ci_high=hi,
        samples=samples,
        seed=seed,
        elapsed_s=time.perf_counter() - t0,
    )


def conjugacy_norm(G: Group, g) -> float:
    """log of the conjugacy class size: base p for family groups (class sizes
    are p-powers), natural log for table groups."""
    size = G.class_size(g)
    if isinstance(G, AlgebraGroup):
        return math.log(size, G.params.p)
    return math.log(size)


def commutator_set(G: Group, cap: int = COVER_PAIR_CAP) -> list:
    """The full set Comm(G, G) of commutator values.

    Table groups enumerate all pairs (requires |G|^2 <= cap).  Family groups
    take commutators of class representatives against everything and close
    under conjugation.
    """
    if isinstance(G, TableGroup):
        if G.order**2 > cap:
            raise CapExceededError(f"|G|^2 = {G.order ** 2} exceeds cap {cap}")
        t, inv = G.table, G.inv_table
        a = np.repeat(np.arange(G.order), G.order)
        b = np.tile(np.arange(G.order), G.order)
        comms = t[t[inv[a], inv[b]], t[a, b]]
        return [int(x) for x in np.unique(comms)]
    if G.order**2 > cap:
        raise CapExceededError(f"|G|^2 = {G.order ** 2} exceeds cap {cap}")
    eng = G.batch
    elems = list(G.elements())
    flat = np.array([e.coords() for e in elems], dtype=np.int64)
    stack = eng.from_coords(flat)
    seen: set[bytes] = set()
    base: list[GroupElement] = []
    for rep, _ in G.conjugacy_classes():
        rep_stack = eng.from_coords(np.tile(np.array(rep.coords(), dtype=np.int64), (G.order, 1)))
        comms = eng.coords(eng.commutator(rep_stack, stack)).astype(np.uint8)
        for key in np.unique(comms, axis=0):
            kb = key.tobytes()
            if kb not in seen:
                seen.add(kb)
                base.append(GroupElement.from_coords(G.params, tuple(int(v) for v in key)))
    # conjugation closure: commutator values of arbitrary pairs are conjugates
    # of values on class-representative pairs
    out: set[GroupElement] = set()
    for g in base:
        out |= G.conjugacy_orbit(g)
    return sorted(out, key=lambda e: e.coords())


def _in_ball_s(G: Group, x, s, n: int) -> bool:
    """x within B*s, i.e. class_size(x * s^-1) <= n."""
    return G.class_size(G.mul(x, G.inverse(s))) <= n


def covering_check(
    G: Group,
    n: int,
    S: Sequence,
    mode: str = "exhaustive",
    samples: int = 10000,
    seed: int = DEFAULT_SEED,
    cap: int = COVER_PAIR_CAP,
) -> CoveringWitness:
    """Check Comm(G,G) within B*S where B = {x : |x^G| <= n}."""
    S = list(S)
    if mode == "exhaustive":
        comms = commutator_set(G, cap)
        checked = 0
        for c in comms:
            if not any(_in_ball_s(G, c, s, n) for s in S):
                return CoveringWitness(
                    n, S, Fraction(checked, len(comms)), c, True, len(comms)
                )
            checked += 1
        return CoveringWitness(n, S, Fraction(1), None, True, len(comms))
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    checked = 0
    for _ in range(samples):
        if isinstance(G, TableGroup):
            g, h = (int(v) for v in rng.integers(0, G.order, size=2))
            c = G.commutator(g, h)
        else:
            g, h = G.random_elements(rng, 2)
            c = G.commutator(g, h)
        if not any(_in_ball_s(G, c, s, n) for s in S):
            return CoveringWitness(n, S, Fraction(checked, samples), c, False, samples)
        checked += 1
    return CoveringWitness(n, S, Fraction(1), None, False, samples)


def covering_minimal_S(
    G: Group,
    n: int,
    cap: int = COVER_PAIR_CAP,
    exact_limit: int = 20,
) -> CoveringWitness:
    """Greedy ball cover of Comm(G,G) by translates B*s with s a commutator
    value; exact minimum confirmed when there are few distinct ball classes."""
    comms = commutator_set(G, cap)
    universe = set(range(len(comms)))
    balls = []
    for s in comms:
        covered = frozenset(i for i, c in enumerate(comms) if _in_ball_s(G, c, s, n))
        balls.append(covered)

    if n < 1:
        raise ValueError("covering bound n must be >= 1")
    chosen: list[int] = []
    uncovered = set(universe)
    while uncovered:
        # every value c is inside its own translate ball (c * c^-1 = 1), so
        # the greedy loop always terminates with a full cover
        best = max(range(len(comms)), key=lambda i: (len(balls[i] & uncovered), -i))
        chosen.append(best)
        uncovered -= balls[best]

    result = [comms[i] for i in chosen]
    exact: bool | None = None
    distinct = sorted(set(balls), key=lambda b: (-len(b), sorted(b)))
    if len(distinct) <= exact_limit:
        best_subset = _exact_min_cover(distinct, universe)
        if len(best_subset) < len(result):
            result = [comms[balls.index(b)] for b in best_subset]
        exact = True
    return CoveringWitness(
        n, result, Fraction(1), None, True, len(comms), exact_minimum=exact
    )


def _exact_min_cover(balls: list[frozenset[int]], universe: set[int]) -> list[frozenset[int]]:
    from itertools import combinations

    for size in range(len(balls) + 1):
        for combo in combinations(balls, size):
            union: set[int] = set()
            for b in combo:
                union |= b
            if union >= universe:
                return list(combo)
    raise RuntimeError("universe not coverable by the full ball list")  # pragma: no cover


def covering_for_subgroup(
    G: TableGroup, H: Iterable[int], n: int, S: Sequence[int]
) -> tuple[int, TableGroup, list[int]]:
    """Transfer a covering certificate of G to a subgroup H.

    Returns (n^2, H as TableGroup, S' in H's indices): S' keeps one point of
    B*s intersected with H for each s where that intersection is nonempty.
    """
    members = sorted(set(int(h) for h in H))
    Hgrp, mapping = subgroup_table(G, members)
    pos = {g: i for i, g in enumerate(mapping)}
    s_prime: list[int] = []
    for s in S:
        hit = next((h for h in members if _in_ball_s(G, h, s, n)), None)
        if hit is not None:
            s_prime.append(pos[hit])
    return n * n, Hgrp, s_prime
