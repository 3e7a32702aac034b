"""Chain-rule upper bounds on log-counts and their finite-sum rates.

For a uniformly random design and a random reveal order, the sum of
log N over all ordered pairs (trivial reveals contribute log 1 = 0)
upper-bounds the log of the number of designs.  `entropy_upper_estimate`
evaluates that sum exactly (full enumeration, tiny instances) or by
Monte Carlo with a standard error.

Monte Carlo sampling is organized in fixed-size blocks, each with its
own substream spawned from (seed, block-index), and block accumulators
are merged in index order; the result is therefore byte-identical for
any worker count, not just any schedule.

`finite_sum_rate` evaluates the closed finite sums that the per-pair
expectations produce and compares them against their limit log n - 1.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..core import DesignError
from ..enumeration import EmptyPoolError, Pool, enumerate_pool
from .reveal import TooLargeError

BLOCK_SIZE = 4096
EXACT_CAP = 2_000_000   # pool x vertex orders x star orders


@dataclass(frozen=True)
class EntropyEstimate:
    """A chain-rule upper estimate of a log-count."""

    variant: str
    n: int
    samples: int          # 0 means exact full enumeration
    seed: int | None
    estimate: float
    se: float
    exact: bool


@dataclass(frozen=True)
class RateValue:
    """A finite sum next to its limiting value log n - 1."""

    variant: str
    n: int
    value: float
    reference: float
    gap: float


# ---------------------------------------------------------------------------
# Per-sample sum of log N over ordered pairs
# ---------------------------------------------------------------------------

def _sum_log_n(variant: str, table, n: int, vertex_order, star_orders) -> float:
    """Sum of log N over all non-trivial ordered pairs of one reveal."""
    log = math.log
    total = 0.0
    if variant == "1f":
        ec = [0] * (n + 1)           # colors exposed at v by earlier vertices
        for p in range(n):
            i = vertex_order[p]
            ti = table[i]
            eci = ec[i]
            pref = 0                 # colors exposed by earlier edges of i's star
            for u in star_orders[i]:
                a = eci | ec[u]
                nv = (n - 1) - a.bit_count() - (pref & ~a).bit_count()
                total += log(nv)
                pref |= 1 << ti[u]
            for u in star_orders[i]:
                ec[u] |= 1 << ti[u]
        return total

    full = ((1 << (n + 1)) - 1) & ~1
    earlier = 0                      # vertices already scanned
    ruled = [0] * (n + 1)            # ruled[v]: t whose pair with v closed early
    for p in range(n):
        i = vertex_order[p]
        ti = table[i]
        star = star_orders[i]
        rank = {u: r for r, u in enumerate(star)}
        base = earlier | ruled[i]
        pref = 0                     # points closed by earlier edges of i's star
        for u in star:
            k = ti[u]
            rk = rank.get(k)
            if rk is not None and rk > rank[u]:
                amask = base | ruled[u]
                mmask = full & ~(amask | (1 << i) | (1 << u))
                total += log((mmask & ~pref).bit_count())
            pref |= (1 << u) | (1 << k)
        earlier |= 1 << i
        for v in range(1, n + 1):
            if v != i:
                ruled[v] |= 1 << table[v][i]
    return total


def _star_orders_from_priorities(n, vo, prio):
    pos_of = {v: p for p, v in enumerate(vo)}
    orders = {}
    for p, v in enumerate(vo):
        fw = sorted(vo[p + 1:], key=lambda u: prio[v][u])
        orders[v] = fw
    return orders


def _mc_block(args):
    variant, tables, n, seed, block, count = args
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(block,))))
    edge_list = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    nedges = len(edge_list)
    acc_n, mean, m2 = 0, 0.0, 0.0
    for _ in range(count):
        t_idx = int(rng.integers(len(tables)))
        table = tables[t_idx]
        vo = tuple(int(v) + 1 for v in rng.permutation(n))
        prio_flat = rng.permutation(nedges)
        prio = [[0] * (n + 1) for _ in range(n + 1)]
        for e, (a, b) in enumerate(edge_list):
            pr = int(prio_flat[e])
            prio[a][b] = pr
            prio[b][a] = pr
        x = _sum_log_n(variant, table, n, vo,
                       _star_orders_from_priorities(n, vo, prio))
        acc_n += 1
        delta = x - mean
        mean += delta / acc_n
        m2 += delta * (x - mean)
    return acc_n, mean, m2


def _merge(a, b):
    na, ma, m2a = a
    nb, mb, m2b = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = mb - ma
    return n, ma + delta * (nb / n), m2a + m2b + delta * delta * (na * nb / n)


def _exact_enumeration(variant, tables, n):
    """Average the reveal sum over every design, vertex order, star order."""
    star_orderings = 1
    for p in range(n):
        star_orderings *= math.factorial(n - 1 - p)
    work = len(tables) * math.factorial(n) * star_orderings
    if work > EXACT_CAP:
        raise TooLargeError(
            f"exact evaluation needs {work} reveals, above the cap {EXACT_CAP}")
    total = 0.0
    count = 0
    for table in tables:
        for vo in itertools.permutations(range(1, n + 1)):
            forward = [vo[p + 1:] for p in range(n)]
            for combo in itertools.product(
                    *[itertools.permutations(fw) for fw in forward]):
                orders = {vo[p]: combo[p] for p in range(n)}
                total += _sum_log_n(variant, table, n, vo, orders)
                count += 1
    return total / count, count


def entropy_upper_estimate(variant: str, n: int, samples: int,
                           seed: int | None = 0, jobs: int = 1,
                           pool: Pool | None = None) -> EntropyEstimate:
    """Estimate the reveal-sum upper bound on a log-count.

    samples=0 switches to exact full enumeration (guarded by size).
    Designs are drawn uniformly from the complete pool; pass ``pool``
    to reuse one already enumerated.
    """
    if variant not in ("1f", "sts"):
        raise DesignError(f"unknown variant {variant!r}")
    if pool is None:
        pool = enumerate_pool("sts" if variant == "sts" else "1f-labeled", n)
    if len(pool) == 0:
        raise EmptyPoolError(f"no designs to sample at n={n}")
    tables = tuple(x.table for x in pool.items)

    if samples == 0:
        value, count = _exact_enumeration(variant, tables, n)
        return EntropyEstimate(variant, n, 0, seed, value, 0.0, exact=True)

    if samples < 2:
        raise DesignError("need at least 2 samples for a standard error")
    blocks = []
    start = 0
    b = 0
    while start < samples:
        cnt = min(BLOCK_SIZE, samples - start)
        blocks.append((variant, tables, n, seed, b, cnt))
        start += cnt
        b += 1
    if jobs <= 1:
        results = [_mc_block(args) for args in blocks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_mc_block, blocks))
    acc = (0, 0.0, 0.0)
    for r in results:
        acc = _merge(acc, r)
    count, mean, m2 = acc
    se = math.sqrt(m2 / (count - 1) / count)
    return EntropyEstimate(variant, n, count, seed, mean, se, exact=False)


# ---------------------------------------------------------------------------
# Finite sums and their limit
# ---------------------------------------------------------------------------

def finite_sum_rate(variant: str, n: int) -> RateValue:
    """The per-pair expectation sum against its limit log n - 1.

    Edge-coloring variant:
      (2/(n(n-1))) sum_{r=1}^{n-2} r log(1 + r(r-1)/(n-1));
    triple-system variant:
      (3/(n(n-1)(n-2))) sum_{r=2}^{n-1} r(r-1)
            log(1 + (r-2)(r-3)(r-4)/((n-4)(n-5))).
    Compensated summation; exact finite sums, no asymptotic shortcuts.
    """
    if n < 7:
        raise DesignError(f"rate sums need n >= 7, got {n}")
    log = math.log
    total = 0.0
    comp = 0.0
    if variant == "1f":
        scale = 2.0 / (n * (n - 1))
        terms = ((r * log(1.0 + (r * (r - 1)) / (n - 1.0)))
                 for r in range(1, n - 1))
    elif variant == "sts":
        scale = 3.0 / (n * (n - 1) * (n - 2))
        denom = float((n - 4) * (n - 5))
        terms = ((r * (r - 1) * log(1.0 + ((r - 2) * (r - 3) * (r - 4)) / denom))
                 for r in range(2, n))
    else:
        raise DesignError(f"unknown variant {variant!r}")
    for term in terms:
        s = total
        total = s + term
        if abs(s) >= abs(term):
            comp += (s - total) + term
        else:
            comp += (term - total) + s
    value = scale * (total + comp)
    reference = math.log(n) - 1.0
    return RateValue(variant, n, value, reference, abs(value - reference))
