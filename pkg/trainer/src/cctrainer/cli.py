"""Small CLI: train a model on a synth dataset, then evaluate a checkpoint."""

from __future__ import annotations

import argparse
import json
import sys

from .evaluate import evaluate
from .train import TrainConfig, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cctrainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on an illumkit dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--lambda-l1", type=float, default=100.0)
    p.add_argument("--lambda-ang", type=float, default=1.0)
    p.add_argument("--variant", choices=("v1", "v2"), default="v1")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("evaluate", help="write predictions and score them via illumkit eval")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    ns = parser.parse_args(argv)
    try:
        if ns.command == "train":
            config = TrainConfig(
                dataset_dir=ns.data,
                out_dir=ns.out,
                image_size=ns.image_size,
                epochs=ns.epochs,
                batch_size=ns.batch_size,
                lr=ns.lr,
                lambda_l1=ns.lambda_l1,
                lambda_ang=ns.lambda_ang,
                variant=ns.variant,
                seed=ns.seed,
            )
            record = train(config)
            last = record.epochs[-1] if record.epochs else {}
            print(f"trained {len(record.epochs)} epochs; final losses: "
                  f"adv {last.get('adv', 0):.4f}, l1 {last.get('l1', 0):.4f}, "
                  f"angular {last.get('angular', 0):.4f}")
            print(f"checkpoint: {record.checkpoint}")
        else:
            report = evaluate(ns.checkpoint, ns.data, ns.out)
            doc = json.loads(report.read_text())
            print(f"angular mean {doc['angular']['mean']} deg over {doc['count']} images")
            print(f"report: {report}")
        return 0
    except (OSError, ValueError) as exc:
        print(f"cctrainer {ns.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
