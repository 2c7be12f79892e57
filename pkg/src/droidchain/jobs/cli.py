from __future__ import annotations

import argparse
from typing import Optional

from src.droidchain.config import LOG_LEVEL
from src.droidchain.jobs import analyze, compare, cross_validate, extract_features, synth_corpus
from src.droidchain.jobs.options import guarded
from src.droidchain.logging import setup

COMMANDS = {
    "synth": (synth_corpus, "Generate a synthetic corpus"),
    "features": (extract_features, "Extract Markov-chain features from a manifest"),
    "cv": (cross_validate, "Cross-validate the Random Forest on a feature CSV"),
    "analyze": (analyze, "Coverage, dynamic loading and top-k presence reports"),
    "compare": (compare, "Compare metrics across runs"),
}


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="droidchain", description="Markov-chain malware detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (module, help_text) in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text, description=help_text)
        module.add_arguments(cmd)
        cmd.set_defaults(handler=module.run_from_args)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    setup(LOG_LEVEL)
    args = build_arg_parser().parse_args(argv)
    return guarded(lambda: args.handler(args))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
