"""Compiled inner loops.

Every kernel works on the packed array layout owned by :class:`Network`:
rows ``0..n-1`` hold live nodes in ascending birth order, ``nbr[i, :degree[i]]``
lists the row indices of node ``i``'s neighbours. Strategies are 1 for
cooperate and 0 for defect.

Random draws go through ``next_double(state)``: the PCG64 C entry point and
state address of a numpy ``Generator`` (see :func:`coopflux.rng.bitgen`), so
compiled code and Python code consume one shared stream.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def accumulate_fitness(n, strategy, degree, nbr, b, fitness):
    # C earns 1 per C neighbour, D earns b per C neighbour, nothing else pays.
    for i in range(n):
        coop = 0
        for t in range(degree[i]):
            coop += strategy[nbr[i, t]]
        if strategy[i] == 1:
            fitness[i] = float(coop)
        else:
            fitness[i] = b * coop


@nb.njit(cache=True)
def update_strategies(n, strategy, fitness, degree, nbr, b, next_double, state, scratch):
    for i in range(n):
        scratch[i] = strategy[i]
    for i in range(n):
        k_i = degree[i]
        if k_i == 0:
            continue
        slot = int(next_double(state) * k_i)
        if slot >= k_i:
            slot = k_i - 1
        j = nbr[i, slot]
        f_i = fitness[i]
        f_j = fitness[j]
        if f_i < f_j:
            k_j = degree[j]
            denom = b * (k_i if k_i > k_j else k_j)
            if next_double(state) < (f_j - f_i) / denom:
                scratch[i] = strategy[j]
    changed = 0
    for i in range(n):
        if scratch[i] != strategy[i]:
            strategy[i] = scratch[i]
            changed += 1
    return changed


@nb.njit(cache=True)
def grow(n, count, m, epsilon, newcomers_are_targets, strategy, fitness, birth, degree, nbr,
         next_birth, next_double, state):
    """Append ``count`` nodes, each wired to ``m`` distinct fitness-weighted targets.

    Targets come from the ``n`` nodes present before the step; with
    ``newcomers_are_targets`` the nodes appended earlier in the same step
    (fitness 0) are candidates too. Per new node the draws are: one for the
    strategy, then one per edge.
    """
    base = 1.0 - epsilon
    total = 0.0
    for i in range(n):
        total += base + epsilon * fitness[i]
    chosen = np.empty(m, dtype=np.int64)
    for c in range(count):
        new = n + c
        pool = new if newcomers_are_targets else n
        strategy[new] = 1 if next_double(state) < 0.5 else 0
        fitness[new] = 0.0
        birth[new] = next_birth + c
        degree[new] = 0
        remaining = total
        for e in range(m):
            u = next_double(state) * remaining
            acc = 0.0
            pick = -1
            last = -1
            for i in range(pool):
                taken = False
                for q in range(e):
                    if chosen[q] == i:
                        taken = True
                        break
                if taken:
                    continue
                last = i
                acc += base + epsilon * fitness[i]
                if u < acc:
                    pick = i
                    break
            if pick < 0:
                # roundoff pushed u past the running sum
                pick = last
            chosen[e] = pick
            remaining -= base + epsilon * fitness[pick]
        for e in range(m):
            t = chosen[e]
            nbr[new, degree[new]] = t
            degree[new] += 1
            nbr[t, degree[t]] = new
            degree[t] += 1
        if newcomers_are_targets:
            total += base


@nb.njit(cache=True)
def least_fit_victims(n, fitness, d):
    # stable sort keeps row (= birth) order among equal fitness: oldest first
    order = np.argsort(fitness[:n], kind="mergesort")
    return order[:d].copy()


@nb.njit(cache=True)
def random_victims(n, d, next_double, state):
    idx = np.arange(n)
    for t in range(d):
        r = t + int(next_double(state) * (n - t))
        if r >= n:
            r = n - 1
        tmp = idx[t]
        idx[t] = idx[r]
        idx[r] = tmp
    return idx[:d].copy()


@nb.njit(cache=True)
def mark_isolated(n, degree, nbr, keep):
    """Drop kept nodes left with no kept neighbour; returns how many were dropped.

    Removing an isolated node removes no edges, so one pass reaches the fixed point.
    """
    dropped = 0
    for i in range(n):
        if not keep[i]:
            continue
        alive = 0
        for t in range(degree[i]):
            if keep[nbr[i, t]]:
                alive += 1
                break
        if alive == 0:
            keep[i] = False
            dropped += 1
    return dropped


@nb.njit(cache=True)
def keep_fittest_component(n, fitness, degree, nbr, keep):
    """Restrict ``keep`` to the component holding the fittest kept node (oldest on ties)."""
    root = -1
    for i in range(n):
        if keep[i] and (root < 0 or fitness[i] > fitness[root]):
            root = i
    if root < 0:
        return 0
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    queue[0] = root
    seen[root] = True
    head = 0
    tail = 1
    while head < tail:
        i = queue[head]
        head += 1
        for t in range(degree[i]):
            j = nbr[i, t]
            if keep[j] and not seen[j]:
                seen[j] = True
                queue[tail] = j
                tail += 1
    dropped = 0
    for i in range(n):
        if keep[i] and not seen[i]:
            keep[i] = False
            dropped += 1
    return dropped


@nb.njit(cache=True)
def compact(n, strategy, fitness, birth, degree, nbr, keep):
    """Remove rows with ``keep[i] == False`` in place, preserving order.

    Returns the new node count and the new edge count.
    """
    newidx = np.full(n, -1, dtype=np.int64)
    c = 0
    for i in range(n):
        if keep[i]:
            newidx[i] = c
            c += 1
    deg_sum = 0
    for i in range(n):
        if not keep[i]:
            continue
        ni = newidx[i]
        d = 0
        # ni <= i and d <= t, so reads always run ahead of writes
        for t in range(degree[i]):
            j = nbr[i, t]
            if keep[j]:
                nbr[ni, d] = newidx[j]
                d += 1
        degree[ni] = d
        strategy[ni] = strategy[i]
        fitness[ni] = fitness[i]
        birth[ni] = birth[i]
        deg_sum += d
    return c, deg_sum // 2
