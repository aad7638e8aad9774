"""Command-line entry point.

Exit codes: 0 success, 1 validation error (bad arguments, invalid states or
parameters), 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import __version__
from .channels import channel_from_descriptor, make_channel, run_trajectory
from .discord import OptimizerConfig, commutator_criterion, discord
from .exceptions import QDiscordError
from .experiments import EXPERIMENTS, ExperimentConfig, check_writable, default_workers, run_experiment
from .rng import PRNG_ID, SeededSampler
from .sampling import random_mixed_state, random_pure_state, random_zero_discord, write_ensemble
from .states import load_state

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _dims(text):
    try:
        a, b = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 2x3, got {text!r}")
    return (a, b)


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output file")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: $QDISCORD_WORKERS or 1)")
    common.add_argument("--config", default=None, help="JSON file with ExperimentConfig fields")

    p = _Parser(prog="qdiscord", description=__doc__.splitlines()[0],
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version",
                   version=f"qdiscord {__version__} (PRNG: {PRNG_ID})")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    d = sub.add_parser("discord", parents=[common], help="one-way discord of a state file")
    d.add_argument("--state", required=True)
    d.add_argument("--restarts", type=int, default=20)
    d.add_argument("--json", action="store_true", help="print the full result as JSON")

    c = sub.add_parser("commutator", parents=[common], help="Frobenius norm of [rho, rho_A x 1]")
    c.add_argument("--state", required=True)

    s = sub.add_parser("sample", parents=[common], help="write a random ensemble as JSON lines")
    s.add_argument("--kind", choices=("mixed", "pure", "zero-discord"), default="mixed")
    s.add_argument("--dims", type=_dims, default=(2, 2))
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--rank", type=int, default=None)

    e = sub.add_parser("evolve", parents=[common], help="iterate a channel and write a trajectory CSV")
    e.add_argument("--state", required=True)
    e.add_argument("--channel", help="channel descriptor JSON file")
    e.add_argument("--kind", help="built-in channel kind")
    e.add_argument("--param", type=float, help="strength parameter of --kind")
    e.add_argument("--steps", type=int, required=True)
    e.add_argument("--threshold", type=float, default=1e-8)
    e.add_argument("--discord", action="store_true", help="also evaluate discord at every step")

    x = sub.add_parser("experiment", parents=[common], help="run a Monte Carlo experiment")
    x.add_argument("name", choices=[n.replace("_", "-") for n in EXPERIMENTS] + list(EXPERIMENTS))
    x.add_argument("--dims", type=_dims, default=None)
    x.add_argument("--trials", type=int, default=None)
    x.add_argument("--steps", type=int, default=None)
    x.add_argument("--channel", help="channel descriptor JSON file")
    x.add_argument("--kind", help="built-in channel kind")
    x.add_argument("--param", type=float, help="strength parameter of --kind")
    x.add_argument("--state", help="inject this state instead of sampling")
    x.add_argument("--compute-discord", action="store_true", default=None)
    x.add_argument("--c0-tol", type=float, default=None)
    x.add_argument("--discord-tol", type=float, default=None)
    x.add_argument("--crossing-tol", type=float, default=None)
    return p


def _channel_descriptor(args, dims):
    if args.channel:
        with open(args.channel) as fh:
            return json.load(fh)
    if args.kind:
        if args.param is None:
            raise QDiscordError("--kind needs --param")
        ch = make_channel(args.kind, args.param, dims)
        return ch.to_descriptor()
    return None


def _cmd_discord(args):
    rho = load_state(args.state)
    res = discord(rho, OptimizerConfig(restarts=args.restarts, seed=args.seed or 0))
    if args.json:
        text = json.dumps(res.to_dict(), indent=1)
    else:
        text = (
            f"I = {res.mutual_information:.6f}\n"
            f"J = {res.classical_correlations:.6f}\n"
            f"D = {res.discord:.6f}\n"
            f"converged = {res.converged}"
        )
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(res.to_dict(), fh, indent=1)


def _cmd_commutator(args):
    print(repr(commutator_criterion(load_state(args.state))))


def _cmd_sample(args):
    if args.out is None:
        raise QDiscordError("sample needs --out")
    check_writable(args.out)
    seed = args.seed if args.seed is not None else 0
    dim_a, dim_b = args.dims
    d = dim_a * dim_b
    states = []
    for i in range(args.count):
        rng = SeededSampler(seed, i).generator()
        if args.kind == "mixed":
            states.append(random_mixed_state(d, args.rank, rng, dims=args.dims))
        elif args.kind == "pure":
            states.append(random_pure_state(d, rng, dims=args.dims))
        else:
            states.append(random_zero_discord(dim_a, dim_b, rng))
    header = {"seed": seed, "kind": args.kind, "dims": [dim_a, dim_b], "count": args.count, "rank": args.rank}
    write_ensemble(args.out, states, header)


def _cmd_evolve(args):
    rho = load_state(args.state)
    desc = _channel_descriptor(args, rho.dims)
    if desc is None:
        raise QDiscordError("evolve needs --channel or --kind/--param")
    if args.out:
        check_writable(args.out)
    ch = channel_from_descriptor(desc)
    traj = run_trajectory(ch, rho, args.steps, args.threshold, compute_discord=args.discord)
    if args.out:
        traj.to_csv(args.out)
    print(f"steps = {traj.n_max}")
    print(f"final commutator norm = {float(traj.commutator_norms[-1])!r}")
    print(f"runs below threshold = {traj.crossings}")


def _cmd_experiment(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    data["experiment"] = args.name
    overrides = {
        "dims": args.dims,
        "trials": args.trials,
        "seed": args.seed,
        "steps": args.steps,
        "state_path": args.state,
        "compute_discord": args.compute_discord,
        "output_path": args.out,
        "workers": args.workers,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    data.setdefault("workers", default_workers())
    dims = tuple(data.get("dims", (2, 2)))
    desc = _channel_descriptor(args, dims)
    if desc is not None:
        data["channel"] = desc
    cfg = ExperimentConfig.from_dict(data)
    tols = {k: v for k, v in (("c0_tol", args.c0_tol), ("discord_tol", args.discord_tol),
                              ("crossing_tol", args.crossing_tol)) if v is not None}
    if tols:
        cfg = replace(cfg, thresholds=replace(cfg.thresholds, **tols))
    report = run_experiment(cfg)
    print(json.dumps(report.aggregates, indent=1, sort_keys=True))


_COMMANDS = {
    "discord": _cmd_discord,
    "commutator": _cmd_commutator,
    "sample": _cmd_sample,
    "evolve": _cmd_evolve,
    "experiment": _cmd_experiment,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_INVALID
        _COMMANDS[args.command](args)
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"qdiscord: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QDiscordError, ValueError, KeyError, TypeError) as exc:
        print(f"qdiscord: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
