from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Optional

from src.droidchain.config import DEFAULT_JOBS, LOG_LEVEL, env_seed
from src.droidchain.errors import ConfigError
from src.droidchain.ingest.manifest import DatasetManifest
from src.droidchain.jobs.options import guarded
from src.droidchain.logging import setup
from src.droidchain.synth.generator import generate_corpus
from src.droidchain.synth.profiles import CorpusSpec, load_corpus_spec

LOG = logging.getLogger(__name__)


def resolve_corpus_spec(
    spec_path: Optional[Path] = None,
    *,
    n_benign: Optional[int] = None,
    n_malware: Optional[int] = None,
    seed: Optional[int] = None,
    noise: Optional[float] = None,
    dynamic_only_fraction: Optional[float] = None,
) -> CorpusSpec:
    """Flags override the spec file; the seed falls back to DROIDCHAIN_SEED."""
    spec = load_corpus_spec(spec_path) if spec_path else CorpusSpec(seed=env_seed())
    benign, malware = spec.benign, spec.malware
    profile_changes = {}
    if noise is not None:
        profile_changes["noise"] = noise
    if dynamic_only_fraction is not None:
        profile_changes["dynamic_only_fraction"] = dynamic_only_fraction
    if profile_changes:
        benign = benign.with_overrides(**profile_changes)
        malware = malware.with_overrides(**profile_changes)
    return CorpusSpec(
        n_benign=spec.n_benign if n_benign is None else n_benign,
        n_malware=spec.n_malware if n_malware is None else n_malware,
        seed=spec.seed if seed is None else seed,
        benign=benign,
        malware=malware,
    )


def run_synth(spec: CorpusSpec, out_dir: Path | str, jobs: int = 1) -> DatasetManifest:
    manifest = generate_corpus(
        spec.n_benign,
        spec.n_malware,
        spec.benign,
        spec.malware,
        spec.seed,
        out_dir,
        jobs=jobs,
    )
    LOG.info("Corpus written apps=%s out=%s", len(manifest), out_dir)
    return manifest


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", type=Path, default=None, help="Corpus spec JSON (default profiles otherwise)")
    parser.add_argument("--out-dir", type=Path, required=True)
    parser.add_argument("--benign", dest="n_benign", type=int, default=None)
    parser.add_argument("--malware", dest="n_malware", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--noise", type=float, default=None, help="Override noise in both profiles")
    parser.add_argument("--dynamic-only-fraction", type=float, default=None)
    parser.add_argument("--jobs", type=int, default=None)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Generate a synthetic labelled corpus")
    add_arguments(parser)
    return parser


def run_from_args(args: argparse.Namespace) -> DatasetManifest:
    spec = resolve_corpus_spec(
        args.spec,
        n_benign=args.n_benign,
        n_malware=args.n_malware,
        seed=args.seed,
        noise=args.noise,
        dynamic_only_fraction=args.dynamic_only_fraction,
    )
    jobs = DEFAULT_JOBS if args.jobs is None else args.jobs
    if jobs < 1:
        raise ConfigError(f"jobs must be positive: {jobs}")
    return run_synth(spec, args.out_dir, jobs=jobs)


def main(argv: Optional[list[str]] = None) -> int:
    setup(LOG_LEVEL)
    args = build_arg_parser().parse_args(argv)
    return guarded(lambda: run_from_args(args))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
