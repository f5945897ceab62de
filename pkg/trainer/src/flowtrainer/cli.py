"""CLI: train a model on textualized flows, serve it, or evaluate a dir."""

from __future__ import annotations

import argparse
import json
import sys

from .data import TrainSpec
from .train import fine_tune


def cmd_train(args) -> int:
    spec = TrainSpec(train_path=args.train, test_path=args.test,
                     model_name=args.model_name, max_length=args.max_length,
                     batch_size=args.batch_size, learning_rate=args.learning_rate,
                     epochs=args.epochs, seed=args.seed)
    result = fine_tune(spec, args.out)
    best = result["epochs"][result["best_epoch"] - 1]
    print(json.dumps({"model_dir": result["model_dir"],
                      "best_epoch": result["best_epoch"],
                      "accuracy": best["accuracy"],
                      "weighted_f1": best["weighted_f1"]}))
    return 0


def cmd_serve(args) -> int:
    from .serve import run

    run(args.model_dir, args.listen)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowtrainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune on textualized JSON Lines")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--model-name", default="scratch:small")
    p.add_argument("--max-length", type=int, default=512)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="serve a trained model (classify contract)")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--listen", default="127.0.0.1:8742")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
