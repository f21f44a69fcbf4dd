"""Solve one sampled scenario with all four solvers.

Prints the virtual graph (users, their candidate servers, edge features)
and then each solver's assignment, allocation and cost next to the
exact optimum.
"""

import time

from laemec.instance import sample_scenario
from laemec.solve import (check_constraints, evaluate_objective,
                          solve_alternating, solve_bruteforce, solve_mcmf,
                          solve_random)


def describe(inst):
    print(f"scale {inst.scale_tag}: {inst.n_servers} servers, "
          f"{inst.n_users} users, {inst.n_edges} edges")
    for u in inst.users:
        node = inst.nodes[u]
        parts = []
        for k in inst.user_edges[u]:
            e = inst.edges[k]
            parts.append(f"s{e.server}(j_tr={e.feature.j_tr:.3f}, "
                         f"j_exe={e.feature.j_exe:.1f}, "
                         f"mu={e.feature.mu:.2f})")
        print(f"  user {u} ({node.node_type.name}, "
              f"workload {node.workload/1e9:.2f} GFLOP): "
              + "; ".join(parts))


def render(inst, sol):
    picks = []
    for u in inst.users:
        chosen = [k for k in inst.user_edges[u] if sol.x[k]]
        if not chosen:
            picks.append(f"u{u}:local")
        else:
            k = chosen[0]
            picks.append(f"u{u}->s{inst.edges[k].server}"
                         f"(y={sol.y[k]:.2f})")
    return " ".join(picks)


def main():
    inst = sample_scenario((2, 4, 2), seed=2026)
    describe(inst)
    print()

    solvers = [
        ("oracle", lambda: solve_bruteforce(inst)),
        ("ao", lambda: solve_alternating(inst)),
        ("re", lambda: solve_random(inst, seed=7)),
        ("mcmf", lambda: solve_mcmf(inst)),
    ]
    reference = None
    for name, run in solvers:
        t0 = time.perf_counter()
        sol = run()
        dt = (time.perf_counter() - t0) * 1e3
        cost = evaluate_objective(inst, sol)
        if reference is None:
            reference = cost
        ok = check_constraints(inst, sol).passed
        print(f"{name:>7}: cost={cost:10.4f}  ratio={cost/reference:6.3f}  "
              f"feasible={ok}  {dt:6.1f} ms")
        print(f"         {render(inst, sol)}")


if __name__ == "__main__":
    main()
