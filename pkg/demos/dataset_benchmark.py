"""End-to-end benchmark pipeline on a small dataset.

Generates an oracle-labeled dataset, evaluates the heuristic solvers
against the labels and prints the benchmark table (the same flow the
CLI drives with `laemec generate` / `laemec evaluate`).
"""

import os
import tempfile

from laemec.harness import format_report_table, run_evaluate, run_generate


def main():
    workdir = tempfile.mkdtemp(prefix="laemec_demo_")
    dataset = os.path.join(workdir, "gs2_gu4_au2.jsonl")

    print("generating 150 oracle-labeled instances at scale gs2_gu4_au2 ...")
    metadata = run_generate("gs2_gu4_au2", 150, 20260810, "oracle", dataset)
    print(f"  penalty maxima: j_loc={metadata['penalty'][0]:.3e}, "
          f"j_tr={metadata['penalty'][1]:.3e}, "
          f"j_exe={metadata['penalty'][2]:.3e}")

    reports = []
    for solver in ("oracle", "ao", "re", "mcmf"):
        out = os.path.join(workdir, f"report_{solver}.jsonl")
        reports.append(run_evaluate(dataset, solver, out, seed=1))
    print()
    print(format_report_table(reports))
    print(f"reports written under {workdir}")


if __name__ == "__main__":
    main()
