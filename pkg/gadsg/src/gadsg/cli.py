"""Command line: train a model, sample solutions, benchmark a checkpoint.

Exit codes: 0 success, 2 configuration error, 3 data error.  Verbosity
via GADSG_LOG=DEBUG|INFO|WARNING.
"""

import argparse
import json
import logging
import os
import sys
import time

from .data import DatasetFormatError, load_dataset
from .encoder import EncoderConfig
from .evaluate import (BenchmarkReport, average_cost_ratio,
                       cost_accuracy_rate, write_report)
from .model import (GADSG, evaluate_records, load_checkpoint,
                    save_checkpoint, train_model)
from .schedule import NoiseSchedule

log = logging.getLogger(__name__)

CONFIGS = {
    "paper": EncoderConfig(),
    "desk": EncoderConfig(n_layers=4, hidden_dim=64, num_heads=4),
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gadsg",
        description="Graph-attention diffusion solution generator")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train on a dataset file")
    tr.add_argument("--data", required=True)
    tr.add_argument("--epochs", type=int, default=50)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--ckpt", required=True)
    tr.add_argument("--config", choices=sorted(CONFIGS), default="paper")
    tr.add_argument("--batch-size", type=int, default=128)
    tr.add_argument("--lr", type=float, default=1e-4)
    tr.add_argument("--diffusion-steps", type=int, default=200)
    tr.add_argument("--mean-pool", action="store_true",
                    help="attention-off ablation (mean pooling)")

    sa = sub.add_parser("sample", help="write solutions for a dataset")
    sa.add_argument("--data", required=True)
    sa.add_argument("--ckpt", required=True)
    sa.add_argument("--out", required=True)
    sa.add_argument("--best-of", type=int, default=4)
    sa.add_argument("--steps", type=int, default=5)
    sa.add_argument("--seed", type=int, default=0)

    ev = sub.add_parser("eval", help="benchmark a checkpoint on a dataset")
    ev.add_argument("--data", required=True)
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--out", default=None)
    ev.add_argument("--best-of", type=int, default=4)
    ev.add_argument("--steps", type=int, default=5)
    ev.add_argument("--threshold", type=float, default=1.1)
    ev.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_train(args) -> int:
    records = load_dataset(args.data)
    config = CONFIGS[args.config]
    schedule = NoiseSchedule.linear(args.diffusion_steps)

    def log_fn(epoch, loss):
        print(f"epoch {epoch + 1}/{args.epochs}: loss {loss:.4f}")

    model, losses = train_model(records, config, schedule,
                                epochs=args.epochs,
                                batch_size=args.batch_size, lr=args.lr,
                                seed=args.seed, mean_pool=args.mean_pool,
                                log_fn=log_fn)
    save_checkpoint(args.ckpt, model,
                    meta={"data": os.path.abspath(args.data),
                          "epochs": args.epochs, "seed": args.seed,
                          "losses": losses, "config": args.config,
                          "mean_pool": args.mean_pool})
    print(f"saved checkpoint to {args.ckpt}")
    return 0


def _cmd_sample(args) -> int:
    records = load_dataset(args.data)
    model = load_checkpoint(args.ckpt)
    costs, refs, feasible, solutions = evaluate_records(
        model, records, best_of=args.best_of, inference_steps=args.steps,
        seed=args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        for r, c, ok, (x, y) in zip(records, costs, feasible, solutions):
            label_like_x = [0] * int(r.slot_edge.max() + 1)
            label_like_y = [0.0] * int(r.slot_edge.max() + 1)
            for row in range(r.n_users):
                for s in range(r.n_servers):
                    k = r.slot_edge[row, s]
                    if k >= 0:
                        label_like_x[k] = int(x[row, s])
                        label_like_y[k] = float(y[row, s])
            fh.write(json.dumps({"kind": "solution", "index": r.index,
                                 "x": label_like_x, "y": label_like_y,
                                 "cost": c, "feasible": ok,
                                 "label_cost": r.label_cost},
                                separators=(",", ":")) + "\n")
    print(f"wrote {len(records)} solutions to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    records = load_dataset(args.data)
    model = load_checkpoint(args.ckpt)
    t0 = time.perf_counter()
    costs, refs, feasible, _ = evaluate_records(
        model, records, best_of=args.best_of, inference_steps=args.steps,
        seed=args.seed)
    elapsed = time.perf_counter() - t0
    report = BenchmarkReport(
        dataset_tag=os.path.basename(args.data),
        solver="gadsg",
        count=len(records),
        average_cost_ratio=average_cost_ratio(costs, refs),
        cost_accuracy_rate=cost_accuracy_rate(costs, refs, args.threshold),
        threshold=args.threshold,
        objective="per_user",
        eval_seed=args.seed,
        wall_time_total=elapsed,
        wall_time_mean=elapsed / len(records),
        config={"ckpt": os.path.abspath(args.ckpt),
                "best_of": args.best_of, "steps": args.steps,
                "feasible": int(sum(feasible))},
    )
    if args.out:
        lines = [{"kind": "record", "index": r.index, "solver_cost": c,
                  "label_cost": r.label_cost, "ratio": c / r.label_cost,
                  "feasible": ok}
                 for r, c, ok in zip(records, costs, feasible)]
        write_report(args.out, report, lines)
    print(f"gadsg on {len(records)} records: "
          f"avg ratio {report.average_cost_ratio:.4f}, "
          f"accuracy {report.cost_accuracy_rate:.4f}, "
          f"feasible {sum(feasible)}/{len(records)}, "
          f"{elapsed:.1f}s")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("GADSG_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "eval":
            return _cmd_eval(args)
    except (DatasetFormatError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
