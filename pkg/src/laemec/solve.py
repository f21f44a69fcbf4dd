"""Objective, constraints and the four solvers.

The problem: every user either executes its task locally or offloads it
over exactly one of its edges; offloaded tasks receive a fraction of the
target server's frequency.  Minimized is the sum of weighted costs,
where an offloaded task pays its transmission cost plus the full-load
execution cost divided by its allocation ratio.

Solvers: exact enumeration (the labeling oracle at small scale), a
two-stage alternating heuristic, best-of-k random assignment, and a
min-cost max-flow heuristic over quantized allocation levels (the
labeler for large scales).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .flow import MinCostMaxFlow
from .instance import ProblemInstance

log = logging.getLogger(__name__)

INFEASIBLE_COST = math.inf

_MU_EPS = 1e-12      # slack when testing sum(mu) <= 1
_C4_TOL = 1e-9


class InfeasibleAllocationError(ValueError):
    """Lower bounds alone exceed the server capacity."""


class EnumerationCapError(RuntimeError):
    """The assignment space is too large for exact enumeration."""


class SolverError(RuntimeError):
    """A solver could not produce a feasible solution."""


@dataclass(frozen=True)
class Solution:
    """Per-edge offloading bits and allocation ratios (length K each);
    y is stored as 0 wherever x is 0."""

    x: tuple
    y: tuple


@dataclass(frozen=True)
class ConstraintReport:
    c1: bool
    c2: bool
    c3: bool
    c4: bool
    c5: bool
    first_violation: dict

    @property
    def passed(self) -> bool:
        return self.c1 and self.c2 and self.c3 and self.c4 and self.c5


def evaluate_objective(instance: ProblemInstance, solution: Solution,
                       mode: str = "per_user") -> float:
    """Total weighted cost of a solution.

    ``per_user`` charges each non-offloading user its local cost once;
    ``literal_edge_sum`` charges the local cost of every unselected
    edge, which double counts users with several edges and is kept only
    for fidelity experiments.  An offloading edge with zero allocation
    yields the infeasible-cost sentinel (inf).
    """
    if len(solution.x) != instance.n_edges \
            or len(solution.y) != instance.n_edges:
        raise ValueError("solution length does not match the edge count")
    if mode not in ("per_user", "literal_edge_sum"):
        raise ValueError(f"unknown objective mode {mode!r}")
    total = 0.0
    if mode == "literal_edge_sum":
        for k, e in enumerate(instance.edges):
            if solution.x[k]:
                if solution.y[k] <= 0:
                    return INFEASIBLE_COST
                total += e.feature.j_tr + e.feature.j_exe / solution.y[k]
            else:
                total += e.feature.j_loc
        return total
    for u in instance.users:
        ks = instance.user_edges[u]
        selected = [k for k in ks if solution.x[k]]
        if not selected:
            total += instance.edges[ks[0]].feature.j_loc
            continue
        for k in selected:
            if solution.y[k] <= 0:
                return INFEASIBLE_COST
            e = instance.edges[k]
            total += e.feature.j_tr + e.feature.j_exe / solution.y[k]
    return total


def check_constraints(instance: ProblemInstance,
                      solution: Solution) -> ConstraintReport:
    """Evaluate C1-C5; violations are reported, never raised.

    ``first_violation`` maps a failed constraint to the first offending
    index: edge for C1/C2, user for C3 and the local branch of C5,
    server for C4, edge for the offload branch of C5.
    """
    if len(solution.x) != instance.n_edges \
            or len(solution.y) != instance.n_edges:
        raise ValueError("solution length does not match the edge count")
    x, y = solution.x, solution.y
    flags = {"c1": True, "c2": True, "c3": True, "c4": True, "c5": True}
    first = {}

    for k in range(instance.n_edges):
        if x[k] not in (0, 1):
            flags["c1"] = False
            first.setdefault("c1", k)
        if not -_C4_TOL <= y[k] <= 1.0 + _C4_TOL:
            flags["c2"] = False
            first.setdefault("c2", k)

    for u in instance.users:
        ks = instance.user_edges[u]
        selected = [k for k in ks if x[k] == 1]
        if len(selected) > 1:
            flags["c3"] = False
            first.setdefault("c3", u)
        if not selected:
            if instance.edges[ks[0]].feature.lam != 1:
                flags["c5"] = False
                first.setdefault("c5", u)
        else:
            for k in selected:
                f = instance.edges[k].feature
                if f.mu <= 0 or y[k] < f.mu - _C4_TOL:
                    flags["c5"] = False
                    first.setdefault("c5", k)

    for s in instance.servers:
        load = sum(y[k] for k in instance.server_edges[s] if x[k] == 1)
        if load > 1.0 + _C4_TOL:
            flags["c4"] = False
            first.setdefault("c4", s)

    return ConstraintReport(first_violation=first, **flags)


# ---------------------------------------------------------------------------
# inner resource allocation (continuous subproblem for fixed offloading)
# ---------------------------------------------------------------------------


def inner_allocation(loads) -> list:
    """Optimal allocation ratios for one server's offloaded tasks.

    ``loads`` is a sequence of (full-load execution cost, minimum ratio)
    pairs.  Minimizes sum(cost_i / y_i) subject to sum(y) <= 1 and
    y_i >= mu_i: the unconstrained optimum allocates proportionally to
    sqrt(cost); ratios falling below their bound are pinned to it and
    the remainder re-solved until no pins change.
    """
    j = np.asarray([c for c, _ in loads], dtype=float)
    mu = np.asarray([m for _, m in loads], dtype=float)
    if len(j) == 0:
        return []
    if (j <= 0).any() or (mu <= 0).any():
        raise ValueError("every load needs positive cost and minimum ratio")
    if mu.sum() > 1.0 + _C4_TOL:
        raise InfeasibleAllocationError(
            f"minimum ratios sum to {mu.sum():.6f} > 1")
    sq = np.sqrt(j)
    pinned = np.zeros(len(j), dtype=bool)
    cap, total = 1.0, sq.sum()
    for _ in range(len(j)):
        y = sq * (cap / total) if total > 0 else np.zeros_like(sq)
        viol = ~pinned & (y < mu - 1e-15)
        if not viol.any():
            break
        pinned |= viol
        cap = 1.0 - mu[pinned].sum()
        total = sq[~pinned].sum()
    y = np.where(pinned, mu, sq * (cap / total) if total > 0 else 0.0)
    return [float(v) for v in y]


# ---------------------------------------------------------------------------
# per-user options shared by all solvers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Option:
    """One choice for one user: local execution or a specific edge."""

    edge: int      # instance edge index, -1 for local
    server: int    # -1 for local
    base: float    # j_loc for local, j_tr for an edge
    j_exe: float   # 0 for local
    mu: float      # 0 for local


def _user_options(instance: ProblemInstance) -> list:
    """Feasible options per user (C5 filtered); raises if a user has none."""
    options = []
    for u in instance.users:
        ks = instance.user_edges[u]
        opts = []
        if instance.edges[ks[0]].feature.lam == 1:
            opts.append(_Option(-1, -1, instance.edges[ks[0]].feature.j_loc,
                                0.0, 0.0))
        for k in ks:
            f = instance.edges[k].feature
            if f.mu > 0:
                opts.append(_Option(k, instance.edges[k].server, f.j_tr,
                                    f.j_exe, f.mu))
        if not opts:
            raise SolverError(f"user {u} has no deadline-feasible option")
        options.append(opts)
    return options


def _solution_from_choice(instance: ProblemInstance, choice) -> Solution:
    """Build a full solution from per-user options, allocating each
    server's capacity optimally."""
    x = [0] * instance.n_edges
    y = [0.0] * instance.n_edges
    per_server = {}
    for opt in choice:
        if opt.edge >= 0:
            x[opt.edge] = 1
            per_server.setdefault(opt.server, []).append(opt)
    for opts in per_server.values():
        opts.sort(key=lambda o: o.edge)
        alloc = inner_allocation([(o.j_exe, o.mu) for o in opts])
        for o, a in zip(opts, alloc):
            y[o.edge] = a
    return Solution(tuple(x), tuple(y))


# ---------------------------------------------------------------------------
# exact oracle: vectorized enumeration
# ---------------------------------------------------------------------------


def _alloc_cost_rows(j_sel, mu_sel, active):
    """Optimal per-server allocation cost for many assignments at once.

    Arrays are (rows, users); ``active`` marks the tasks assigned to
    this server in each row.  Mirrors inner_allocation with the pinning
    loop run synchronously across rows.
    """
    j = np.where(active, j_sel, 0.0)
    mu = np.where(active, mu_sel, 0.0)
    sq = np.sqrt(j)
    pinned = np.zeros_like(active)
    cap = np.ones(active.shape[0])
    total = sq.sum(axis=1)
    for _ in range(active.shape[1]):
        with np.errstate(divide="ignore", invalid="ignore"):
            y = sq * (cap / total)[:, None]
        viol = active & ~pinned & (y < mu - 1e-15)
        if not viol.any():
            break
        pinned |= viol
        cap = 1.0 - np.where(pinned, mu, 0.0).sum(axis=1)
        total = np.where(pinned, 0.0, sq).sum(axis=1)
    cost = np.where(pinned, j / np.maximum(mu, 1e-300), 0.0).sum(axis=1)
    has_free = (active & ~pinned).any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cost += np.where(has_free, total * total / np.maximum(cap, 1e-300),
                         0.0)
    return cost


def _choice_bits(instance, options, picks) -> tuple:
    bits = [0] * instance.n_edges
    for opts, p in zip(options, picks):
        if opts[p].edge >= 0:
            bits[opts[p].edge] = 1
    return tuple(bits)


def solve_bruteforce(instance: ProblemInstance, cap: int = 20_000_000,
                     chunk: int = 16_384) -> Solution:
    """Exact minimum by enumerating every per-user option combination.

    Assignments violating the deadline rules or a server's minimum-ratio
    budget are skipped; each server's continuous allocation is solved in
    closed form.  Ties break toward the lexicographically smallest
    offloading vector.  Raises EnumerationCapError when the option
    product exceeds ``cap`` (use solve_mcmf instead).
    """
    options = _user_options(instance)
    counts = [len(o) for o in options]
    total = math.prod(counts)
    if total > cap:
        raise EnumerationCapError(
            f"{total} assignments exceed the enumeration cap {cap}; "
            "use the mcmf labeler for this scale")
    n_u = len(options)
    maxc = max(counts)
    base = np.zeros((n_u, maxc))
    jexe = np.zeros((n_u, maxc))
    mu = np.zeros((n_u, maxc))
    srv = np.full((n_u, maxc), -1, dtype=np.int64)
    for i, opts in enumerate(options):
        for o, opt in enumerate(opts):
            base[i, o] = opt.base
            jexe[i, o] = opt.j_exe
            mu[i, o] = opt.mu
            srv[i, o] = opt.server
    servers = sorted({opt.server for opts in options for opt in opts
                      if opt.server >= 0})
    rows = np.arange(n_u)

    best_cost = math.inf
    best_bits = None
    best_picks = None
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        picks = np.empty((len(idx), n_u), dtype=np.int64)
        rem = idx.copy()
        for i in range(n_u):
            picks[:, i] = rem % counts[i]
            rem //= counts[i]
        sel_srv = srv[rows[None, :], picks]
        sel_mu = mu[rows[None, :], picks]
        sel_jexe = jexe[rows[None, :], picks]
        cost = base[rows[None, :], picks].sum(axis=1)
        feasible = np.ones(len(idx), dtype=bool)
        for s in servers:
            assigned = sel_srv == s
            feasible &= np.where(assigned, sel_mu, 0.0).sum(axis=1) \
                <= 1.0 + _MU_EPS
            cost += _alloc_cost_rows(sel_jexe, sel_mu, assigned)
        cost[~feasible] = math.inf
        cmin = cost.min()
        if cmin > best_cost or math.isinf(cmin):
            continue
        for r in np.flatnonzero(cost == cmin):
            bits = _choice_bits(instance, options, picks[r])
            if cmin < best_cost or bits < best_bits:
                best_cost, best_bits, best_picks = cmin, bits, picks[r].copy()
    if best_picks is None:
        raise SolverError("no feasible assignment exists")
    choice = [opts[p] for opts, p in zip(options, best_picks)]
    return _solution_from_choice(instance, choice)


# ---------------------------------------------------------------------------
# alternating optimization baseline
# ---------------------------------------------------------------------------


def _dfs_feasible_choice(instance, options):
    """Any C3-C5/C4-budget feasible choice, ignoring cost (fallback)."""
    order = sorted(range(len(options)),
                   key=lambda i: (len(options[i]),
                                  -min(o.mu for o in options[i])))
    load = {s: 0.0 for s in instance.servers}
    choice = [None] * len(options)

    def dfs(pos):
        if pos == len(order):
            return True
        i = order[pos]
        for opt in sorted(options[i], key=lambda o: (o.mu, o.edge)):
            if opt.server < 0:
                choice[i] = opt
                if dfs(pos + 1):
                    return True
                choice[i] = None
            elif load[opt.server] + opt.mu <= 1.0 + _MU_EPS:
                load[opt.server] += opt.mu
                choice[i] = opt
                if dfs(pos + 1):
                    return True
                load[opt.server] -= opt.mu
                choice[i] = None
        return False

    return choice if dfs(0) else None


def _alloc_cost(loads) -> float:
    """Cost of one server's optimally allocated task set."""
    if not loads:
        return 0.0
    y = inner_allocation(loads)
    return sum(j / v for (j, _), v in zip(loads, y))


def solve_alternating(instance: ProblemInstance,
                      max_rounds: int = 20) -> Solution:
    """Two-stage alternating heuristic.

    The first round assigns users greedily in descending local-cost
    order to their cheapest feasible option, pricing each edge at an
    equal split of its server.  Every later round alternates a full
    assignment sweep (each user moves to the option with the lowest
    exact marginal cost given everyone else's placement) with an exact
    re-solve of the allocations, until the cost improves by less than
    1e-6 relative, a sweep changes nothing, or ``max_rounds`` is hit.
    """
    options = _user_options(instance)
    n_users = len(options)
    init_est = [0.0] * instance.n_edges
    for s in instance.servers:
        ks = instance.server_edges[s]
        if ks:
            share = 1.0 / len(ks)
            for k in ks:
                init_est[k] = min(1.0, max(instance.edges[k].feature.mu,
                                           share))

    def user_j_loc(i: int) -> float:
        u = instance.users[i]
        return instance.edges[instance.user_edges[u][0]].feature.j_loc

    order = sorted(range(n_users), key=lambda i: -user_j_loc(i))

    # round 1: greedy assignment under the equal-split price estimates
    load = {s: 0.0 for s in instance.servers}
    choice = [None] * n_users
    stuck = False
    for i in order:
        cand = []
        for opt in options[i]:
            if opt.server < 0:
                cand.append((opt.base, opt.edge, opt))
            elif load[opt.server] + opt.mu <= 1.0 + _MU_EPS:
                y_hat = max(init_est[opt.edge], opt.mu)
                cand.append((opt.base + opt.j_exe / y_hat, opt.edge, opt))
        if not cand:
            stuck = True
            break
        cand.sort(key=lambda t: (t[0], t[1]))
        choice[i] = cand[0][2]
        if cand[0][2].server >= 0:
            load[cand[0][2].server] += cand[0][2].mu

    if stuck:
        choice = _dfs_feasible_choice(instance, options)
        if choice is None:
            raise SolverError("no feasible assignment exists")

    server_tasks = {s: [] for s in instance.servers}
    for i, opt in enumerate(choice):
        if opt.server >= 0:
            server_tasks[opt.server].append((opt.j_exe, opt.mu, i))

    solution = _solution_from_choice(instance, choice)
    prev_cost = evaluate_objective(instance, solution)
    best_cost, best_solution = prev_cost, solution

    for _ in range(max_rounds - 1):
        changed = False
        for i in order:
            current = choice[i]
            if current.server >= 0:
                server_tasks[current.server] = [
                    t for t in server_tasks[current.server] if t[2] != i]
            cand = []
            for opt in options[i]:
                if opt.server < 0:
                    cand.append((opt.base, opt.edge, opt))
                    continue
                others = [(j, m) for j, m, _ in server_tasks[opt.server]]
                if sum(m for _, m in others) + opt.mu > 1.0 + _MU_EPS:
                    continue
                delta = (_alloc_cost(others + [(opt.j_exe, opt.mu)])
                         - _alloc_cost(others))
                cand.append((opt.base + delta, opt.edge, opt))
            cand.sort(key=lambda t: (t[0], t[1]))
            picked = cand[0][2]
            if picked is not current:
                changed = True
            choice[i] = picked
            if picked.server >= 0:
                server_tasks[picked.server].append((picked.j_exe, picked.mu,
                                                    i))
        solution = _solution_from_choice(instance, choice)
        cost = evaluate_objective(instance, solution)
        if cost < best_cost:
            best_cost, best_solution = cost, solution
        if not changed \
                or abs(prev_cost - cost) <= 1e-6 * max(abs(prev_cost), 1e-30):
            break
        prev_cost = cost
    return best_solution


# ---------------------------------------------------------------------------
# random execution baseline
# ---------------------------------------------------------------------------


def solve_random(instance: ProblemInstance, n_candidates: int = 8,
                 seed: int = 0, retry_rounds: int = 20) -> Solution:
    """Best of ``n_candidates`` random assignments.

    Every user picks local or a random deadline-feasible edge, and every
    offloaded task gets a ratio drawn uniformly in (0, 1].  A candidate
    survives only if the constraints hold as drawn: every ratio at least
    its task's minimum and no server oversubscribed.  The cheapest
    surviving candidate wins.  When a whole batch is discarded, fresh
    batches are drawn up to ``retry_rounds`` times before falling back
    to random ratios on a known-feasible assignment.
    """
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    options = _user_options(instance)
    rng = np.random.default_rng(seed)
    all_local = all(opts[0].edge < 0 for opts in options)
    for _ in range(retry_rounds):
        best_cost = math.inf
        best = None
        for _ in range(n_candidates):
            choice = [opts[rng.integers(len(opts))] for opts in options]
            x = [0] * instance.n_edges
            y = [0.0] * instance.n_edges
            ok = True
            for opt in choice:
                if opt.edge >= 0:
                    x[opt.edge] = 1
                    y[opt.edge] = 1.0 - rng.uniform(0.0, 1.0)
                    if y[opt.edge] < opt.mu:
                        ok = False
            if not ok:
                continue
            for s in instance.servers:
                load = sum(y[k] for k in instance.server_edges[s] if x[k])
                if load > 1.0:
                    ok = False
                    break
            if not ok:
                continue
            solution = Solution(tuple(x), tuple(y))
            cost = evaluate_objective(instance, solution)
            if cost < best_cost:
                best_cost, best = cost, solution
        if best is not None:
            return best
        if all_local:
            return Solution((0,) * instance.n_edges,
                            (0.0,) * instance.n_edges)
    # pathological contention: randomize ratios on a known-feasible
    # assignment instead of failing
    choice = _dfs_feasible_choice(instance, options)
    if choice is None:
        raise SolverError("no feasible assignment exists")
    x = [0] * instance.n_edges
    y = [0.0] * instance.n_edges
    for opt in choice:
        if opt.edge >= 0:
            x[opt.edge] = 1
            y[opt.edge] = rng.uniform(opt.mu, 1.0)
    for s in instance.servers:
        ks = [k for k in instance.server_edges[s] if x[k]]
        if not ks:
            continue
        sy = sum(y[k] for k in ks)
        if sy > 1.0:
            smu = sum(instance.edges[k].feature.mu for k in ks)
            scale = (1.0 - smu) / (sy - smu)
            for k in ks:
                mu_k = instance.edges[k].feature.mu
                y[k] = mu_k + (y[k] - mu_k) * scale
    return Solution(tuple(x), tuple(y))


# ---------------------------------------------------------------------------
# min-cost max-flow heuristic labeler
# ---------------------------------------------------------------------------

_MENU_FRACTIONS = [
    [1.0],
    [0.5, 0.5],
    [0.6, 0.4],
    [0.4, 0.3, 0.3],
    [0.3, 0.3, 0.2, 0.2],
    [0.2, 0.2, 0.2, 0.2, 0.2],
    [0.7, 0.3],
]


def _quanta(mu: float, y_quanta: int) -> int:
    return max(1, math.ceil(mu * y_quanta - 1e-9))


def _level_menus(instance, options, y_quanta, weight_grid):
    """Per-variant allocation-level menus, one list of parts per server.

    Parts of a menu partition the server's ``y_quanta`` capacity units,
    so any subset of used levels respects the capacity by construction.
    The last variant derives its parts from a known-feasible assignment
    (it always saturates), the one before it packs the users' largest
    minimum demands; the remaining variants use fixed splits.
    """
    menus = []
    for frac in _MENU_FRACTIONS[:max(0, weight_grid - 2)]:
        parts = [max(1, int(round(f * y_quanta))) for f in frac]
        while sum(parts) > y_quanta:
            parts[parts.index(max(parts))] -= 1
        parts = [p for p in parts if p > 0]
        menus.append({s: list(parts) for s in instance.servers})
    k = 6
    while len(menus) < weight_grid - 2:
        per = max(1, y_quanta // k)
        menus.append({s: [per] * (y_quanta // per) for s in instance.servers})
        k += 1

    if weight_grid >= 2:
        # pack the largest minimum demands first
        adaptive = {}
        for s in instance.servers:
            demands = sorted((_quanta(o.mu, y_quanta)
                              for opts in options for o in opts
                              if o.server == s), reverse=True)
            parts = []
            left = y_quanta
            for q in demands:
                if q <= left:
                    parts.append(q)
                    left -= q
            if not parts:
                parts = [y_quanta]
                left = 0
            parts[0] += left
            adaptive[s] = parts
        menus.append(adaptive)

    # menu carved from a feasible assignment; saturates whenever the
    # rounded-up demands still fit the server
    feasible = _dfs_feasible_choice(instance, options)
    if feasible is not None:
        carved = {}
        for s in instance.servers:
            demands = sorted((_quanta(o.mu, y_quanta) for o in feasible
                              if o.server == s), reverse=True)
            parts = []
            left = y_quanta
            for q in demands:
                if q <= left:
                    parts.append(q)
                    left -= q
            if not parts:
                parts = [y_quanta]
                left = 0
            if left >= 1:
                parts.append(left)
            carved[s] = parts
        menus.append(carved)
    return menus[:weight_grid]


def solve_mcmf(instance: ProblemInstance, y_quanta: int = 10,
               weight_grid: int = 8) -> Solution:
    """Min-cost max-flow over quantized allocation levels.

    Each variant builds a unit-flow network source -> user -> level
    (one node per capacity part of a server, usable by one task at a
    ratio of part/y_quanta) -> sink, plus a local arc for users whose
    local execution meets the deadline.  Costs are scaled to integers
    at 1e-6 of the largest arc cost.  The decoded assignment has its
    ratios re-solved exactly; the best variant wins.  If no variant
    saturates every user, a greedy per-user fallback runs in degraded
    mode.
    """
    if y_quanta < 2:
        raise ValueError("y_quanta must be >= 2")
    if weight_grid < 1:
        raise ValueError("weight_grid must be >= 1")
    options = _user_options(instance)
    n_users = len(options)
    menus = _level_menus(instance, options, y_quanta, weight_grid)

    best_cost = math.inf
    best = None
    for menu in menus:
        arc_costs = []
        for opts in options:
            for o in opts:
                if o.server < 0:
                    arc_costs.append(o.base)
                else:
                    for p in menu[o.server]:
                        if p + 1e-9 >= o.mu * y_quanta:
                            arc_costs.append(o.base + o.j_exe * y_quanta / p)
        if not arc_costs:
            continue
        unit = max(arc_costs) * 1e-6
        if unit <= 0:
            unit = 1.0

        level_ids = {}
        n_nodes = 2 + n_users
        for s, parts in menu.items():
            for pi in range(len(parts)):
                level_ids[(s, pi)] = n_nodes
                n_nodes += 1
        local_id = n_nodes
        n_nodes += 1
        net = MinCostMaxFlow(n_nodes)
        source, sink = 0, 1
        user_arcs = []
        for i, opts in enumerate(options):
            net.add_edge(source, 2 + i, 1, 0)
            arcs = []
            for o in opts:
                if o.server < 0:
                    h = net.add_edge(2 + i, local_id, 1,
                                     int(round(o.base / unit)))
                    arcs.append((h, o, 0))
                else:
                    for pi, p in enumerate(menu[o.server]):
                        if p + 1e-9 < o.mu * y_quanta:
                            continue
                        c = o.base + o.j_exe * y_quanta / p
                        h = net.add_edge(2 + i, level_ids[(o.server, pi)], 1,
                                         int(round(c / unit)))
                        arcs.append((h, o, p))
            user_arcs.append(arcs)
        for (s, pi), node in level_ids.items():
            net.add_edge(node, sink, 1, 0)
        net.add_edge(local_id, sink, n_users, 0)

        flow, _ = net.max_flow(source, sink)
        if flow < n_users:
            continue
        choice = [None] * n_users
        y_raw = {}
        for i, arcs in enumerate(user_arcs):
            for h, o, p in arcs:
                if net.flow_on(h) == 1:
                    choice[i] = o
                    if o.edge >= 0:
                        y_raw[o.edge] = p / y_quanta
                    break
        solution = _solution_from_choice(instance, choice)
        cost = evaluate_objective(instance, solution)
        if cost < best_cost:
            best_cost, best = cost, solution
    if best is not None:
        return best

    log.warning("mcmf: no variant saturated all users; greedy fallback")
    load = {s: 0.0 for s in instance.servers}
    greedy_order = sorted(range(n_users),
                          key=lambda i: -min(o.mu for o in options[i]))
    picked = [None] * n_users
    for i in greedy_order:
        cand = []
        for o in options[i]:
            if o.server < 0:
                cand.append((o.base, o))
            elif load[o.server] + o.mu <= 1.0 + _MU_EPS:
                free = max(o.mu, min(1.0, 1.0 - load[o.server]))
                cand.append((o.base + o.j_exe / free, o))
        if not cand:
            fallback = _dfs_feasible_choice(instance, options)
            if fallback is None:
                raise SolverError("no feasible assignment exists")
            picked = fallback
            break
        cand.sort(key=lambda t: (t[0], t[1].edge))
        picked[i] = cand[0][1]
        if cand[0][1].server >= 0:
            load[cand[0][1].server] += cand[0][1].mu
    return _solution_from_choice(instance, picked)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def get_solver(name: str):
    """Uniform (instance, seed) -> Solution interface for the harness."""
    if name == "oracle":
        return lambda instance, seed=0: solve_bruteforce(instance)
    if name == "ao":
        return lambda instance, seed=0: solve_alternating(instance)
    if name == "re":
        return lambda instance, seed=0: solve_random(instance, seed=seed)
    if name == "mcmf":
        return lambda instance, seed=0: solve_mcmf(instance)
    raise KeyError(f"unknown solver {name!r}")


SOLVER_NAMES = ("oracle", "ao", "re", "mcmf")
