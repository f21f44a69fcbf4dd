"""laemec: simulation, dataset generation and solvers for joint task
offloading and computing-resource allocation in three-layer low-altitude
MEC networks."""

from .channel import ChannelParams, LinkKind, Position3D
from .cost import CostTriple, ServerCompute, Task, UserCompute
from .instance import (DatasetRecord, PaddedGraph, ProblemInstance,
                       SystemParams, build_virtual_graph, pad_edges,
                       sample_scenario)
from .solve import (ConstraintReport, Solution, check_constraints,
                    evaluate_objective, inner_allocation, solve_alternating,
                    solve_bruteforce, solve_mcmf, solve_random)
from .harness import (BenchmarkReport, average_cost_ratio,
                      cost_accuracy_rate, run_evaluate, run_generate)

__version__ = "0.1.0"
