"""Command-line entry point: simulate, estimate, mc and verify."""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from medexc import __version__
from medexc.config import MedexcConfig, setup_logging
from medexc.data.dataset import Dataset
from medexc.data.io import load_csv, save_csv
from medexc.estimator.estimating import estimate
from medexc.exceptions import ConfigurationError, MedexcError
from medexc.models.dgp import DiscreteDGP
from medexc.models.estimand import EstimandConfig, FeatureMap, NuisanceSpec, WeightSpec
from medexc.models.simulation import ExperimentPlan, GM1Params, GM2Params
from medexc.nuisance.base import PropensityFn, constant_propensity
from medexc.oracle.identification import check_identification, random_agreement
from medexc.oracle.robustness import robustness_checks
from medexc.simulation.experiment import run_experiment
from medexc.simulation.gm1 import gm1_generate
from medexc.simulation.gm2 import gm2_generate

logger = logging.getLogger(__name__)


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _folds(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value == 1 or value < 0:
        raise argparse.ArgumentTypeError("--crossfit takes 0 (off) or K >= 2")
    return value


def _parsed(model: type[FeatureMap] | type[WeightSpec]) -> Callable[[str], object]:
    def convert(text: str) -> object:
        try:
            return model.parse(text)
        except (ValueError, ValidationError) as e:
            raise argparse.ArgumentTypeError(str(e)) from None

    return convert


def _existing(text: str) -> Path:
    path = Path(text)
    if not path.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return path


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per workflow."""
    parser = argparse.ArgumentParser(
        prog="medexc",
        description="Natural direct and indirect excursion effects for longitudinal data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level", default=None, help="DEBUG, INFO, WARNING (default) or ERROR"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Draw a dataset from GM-1 or GM-2")
    simulate.add_argument("--gm", choices=["gm1", "gm2"], required=True)
    simulate.add_argument("--n", type=_positive, required=True)
    simulate.add_argument("--seed", type=_seed, required=True)
    simulate.add_argument("--T", type=_positive, default=None, help="Decision points")
    simulate.add_argument("--out", type=Path, required=True)

    est = commands.add_parser("estimate", help="Estimate effect coefficients from a CSV")
    est.add_argument("--data", type=_existing, required=True)
    est.add_argument("--nuisance", type=_existing, help="NuisanceSpec JSON")
    est.add_argument("--config", type=_existing, help="EstimandConfig JSON")
    est.add_argument("--f", type=_parsed(FeatureMap), default=None, help="e.g. linear, bspline:6")
    est.add_argument(
        "--omega", type=_parsed(WeightSpec), default=None, help="uniform, point:t0, custom:w1,..."
    )
    est.add_argument("--effects", choices=["primary", "swapped", "total"], default=None)
    est.add_argument("--crossfit", type=_folds, default=None, help="Folds K (0 = off)")
    est.add_argument("--level", type=float, default=None)
    est.add_argument("--seed", type=_seed, default=None)
    est.add_argument(
        "--known-propensity",
        default=None,
        help="Constant in (0, 1) or a covariate column such as X3",
    )
    est.add_argument("--clip", type=float, default=None)
    est.add_argument("--ridge", type=float, default=None)
    est.add_argument("--threads", type=_positive, default=None)
    est.add_argument("--out", type=Path, required=True)

    mc = commands.add_parser("mc", help="Run a Monte Carlo plan")
    mc.add_argument("--plan", type=_existing, required=True)
    mc.add_argument("--seed", type=_seed, required=True, help="Overrides the plan seed")
    mc.add_argument("--threads", type=_positive, default=None)
    mc.add_argument("--out", type=Path, required=True)

    verify = commands.add_parser("verify", help="Check identification on discrete DGPs")
    source = verify.add_mutually_exclusive_group(required=True)
    source.add_argument("--dgp", type=_existing, help="DiscreteDGP JSON")
    source.add_argument("--random", type=int, metavar="N", help="Number of random DGPs")
    verify.add_argument("--seed", type=_seed, default=None)
    verify.add_argument("--threads", type=_positive, default=None)
    return parser


def known_propensity_from(text: str, ds: Dataset) -> PropensityFn:
    """A constant propensity or one read from a covariate column ``Xj``.

    Raises:
        ConfigurationError: If the text is neither a probability nor a column
    """
    if text.upper().startswith("X") and text[1:].isdigit():
        j = int(text[1:])
        if not 1 <= j <= ds.d:
            raise ConfigurationError(f"known propensity column {text} not in X1..X{ds.d}")

        def component(new: Dataset) -> np.ndarray:
            return np.asarray(new.x[:, :, j - 1], dtype=float)

        return component
    try:
        value = float(text)
    except ValueError:
        raise ConfigurationError(
            f"known propensity must be a constant or Xj, got {text!r}"
        ) from None
    if not 0.0 < value < 1.0:
        raise ConfigurationError(f"known propensity must lie in (0, 1), got {value}")
    return constant_propensity(value)


def cmd_simulate(args: argparse.Namespace, _settings: MedexcConfig) -> int:
    """Write a simulated dataset as CSV and print its shape."""
    if args.gm == "gm1":
        params = GM1Params(T=args.T) if args.T else GM1Params()
        ds = gm1_generate(args.n, args.seed, params)
    else:
        params = GM2Params(T=args.T) if args.T else GM2Params()
        ds = gm2_generate(args.n, args.seed, params)
    save_csv(ds, args.out)
    print(f"n={ds.n} T={ds.T} eligibility={ds.eligibility_rate:.3f}")
    return 0


def _estimand(args: argparse.Namespace) -> EstimandConfig:
    config = (
        EstimandConfig.model_validate_json(args.config.read_text(encoding="utf-8"))
        if args.config
        else EstimandConfig()
    )
    updates = {
        "feature_map": args.f,
        "weights": args.omega,
        "effect_pair": args.effects,
        "folds": args.crossfit,
        "level": args.level,
    }
    return EstimandConfig.model_validate(
        config.model_dump() | {k: v for k, v in updates.items() if v is not None}
    )


def cmd_estimate(args: argparse.Namespace, settings: MedexcConfig) -> int:
    """Estimate from a CSV file and write the result as JSON."""
    config = _estimand(args)
    if config.folds >= 2 and args.seed is None:
        raise ConfigurationError("cross-fitting needs --seed")
    ds = load_csv(args.data)
    spec = (
        NuisanceSpec.model_validate_json(args.nuisance.read_text(encoding="utf-8"))
        if args.nuisance
        else NuisanceSpec()
    )
    known = None
    if args.known_propensity is not None:
        known = known_propensity_from(args.known_propensity, ds)
        spec = spec.model_copy(update={"p": "known"})
    result = estimate(
        ds, spec, config, known_propensity=known, settings=settings, seed=args.seed
    )
    args.out.write_text(result.to_json(), encoding="utf-8")
    print(result.coefficient_table().to_string(index=False))
    return 0


def cmd_mc(args: argparse.Namespace, settings: MedexcConfig) -> int:
    """Run a Monte Carlo plan and write the metrics CSV."""
    plan = ExperimentPlan.from_file(args.plan).model_copy(update={"seed": args.seed})
    table = run_experiment(plan, settings)
    table.to_csv(args.out)
    print(f"{len(table.rows)} metric rows written to {args.out}")
    return 0


def cmd_verify(args: argparse.Namespace, settings: MedexcConfig) -> int:
    """Print the agreement table; exit 1 if any check fails."""
    if args.random is not None:
        report = random_agreement(args.random, args.seed, threads=settings.threads)
        print(report.summary())
        return 0 if report.ok else 1
    dgp = DiscreteDGP.from_file(args.dgp)
    checks = check_identification(dgp)
    robust = robustness_checks(dgp)
    for c in checks:
        status = "ok" if c.ok else "FAIL"
        print(
            f"t={c.t} a={c.a} b={c.b} definition={c.definition:.12g} "
            f"gformula={c.gformula:.12g} weighting={c.weighting:.12g} {status}"
        )
    agreed = sum(c.ok for c in checks)
    passed = sum(c.ok for c in robust)
    print(f"{agreed}/{len(checks)} agree; {passed}/{len(robust)} robustness checks pass")
    return 0 if agreed == len(checks) and all(c.ok for c in robust) else 1


def _require_seed(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Stochastic invocations must name their seed."""
    if args.command == "verify" and args.random is not None and args.seed is None:
        parser.error("verify --random needs --seed")
    if args.command == "estimate" and (args.crossfit or 0) >= 2 and args.seed is None:
        parser.error("estimate --crossfit needs --seed")


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "mc": cmd_mc,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line; returns 0 on success, 1 on failure, 2 on usage errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _require_seed(parser, args)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        settings = MedexcConfig.from_env(
            log_level=args.log_level,
            threads=getattr(args, "threads", None),
            clip=getattr(args, "clip", None),
            ridge=getattr(args, "ridge", None),
        )
        setup_logging(settings.log_level)
        return COMMANDS[args.command](args, settings)
    except (MedexcError, OSError, ValidationError) as e:
        print(f"medexc {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
