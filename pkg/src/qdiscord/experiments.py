"""Monte Carlo experiments behind the command-line interface.

Trial ``i`` of every experiment draws all of its randomness from
``SeededSampler(seed, i)``, so per-trial records do not depend on how
trials are spread over worker processes.  Reports are folded in trial order.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .channels import (
    asymptotic_state,
    channel_from_descriptor,
    crossing_bound,
    product_crossing_bound,
    run_trajectory,
    spectral_decompose,
    steady_state,
)
from .discord import (
    OptimizerConfig,
    ProjectiveMeasurement,
    commutator_criterion,
    discord,
    make_zero_discord,
    omega0_residual,
)
from .exceptions import InvalidParameterError, NonUniqueSteadyStateError
from .rng import PRNG_ID, SeededSampler, random_unitary
from .sampling import perturb, random_mixed_state, random_simplex, random_zero_discord
from .states import DensityMatrix, load_state

EXPERIMENTS = ("measure_zero", "perturbation", "convexity", "trajectory", "discord_single")
WORKERS_ENV = "QDISCORD_WORKERS"
DEFAULT_ETAS = (0.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def default_workers():
    return int(os.environ.get(WORKERS_ENV, "1"))


@dataclass(frozen=True)
class Thresholds:
    c0_tol: float = 1e-8
    discord_tol: float = 1e-6
    crossing_tol: float = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    dims: tuple = (2, 2)
    trials: int = 100
    seed: int = 0
    thresholds: Thresholds = field(default_factory=Thresholds)
    channel: dict | None = None
    steps: int | None = None
    etas: tuple = DEFAULT_ETAS
    compute_discord: bool = False
    restarts: int = 20
    state_path: str | None = None
    output_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        exp = self.experiment.replace("-", "_")
        if exp not in EXPERIMENTS:
            raise InvalidParameterError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        object.__setattr__(self, "experiment", exp)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))
        object.__setattr__(self, "etas", tuple(float(x) for x in self.etas))
        if isinstance(self.thresholds, dict):
            object.__setattr__(self, "thresholds", Thresholds(**self.thresholds))
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if len(self.dims) != 2 or min(self.dims) < 2:
            raise InvalidParameterError(f"dims must be two integers >= 2, got {self.dims}")
        if min(asdict(self.thresholds).values()) <= 0:
            raise InvalidParameterError("tolerances must be positive")
        if self.workers < 1:
            raise InvalidParameterError("workers must be >= 1")
        if self.experiment == "trajectory":
            if self.channel is None:
                raise InvalidParameterError("the trajectory experiment needs a channel descriptor")
            if self.steps is None or self.steps < 1:
                raise InvalidParameterError("the trajectory experiment needs steps >= 1")
        if any(not 0 <= e <= 1 for e in self.etas):
            raise InvalidParameterError("perturbation strengths must lie in [0, 1]")

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def echo(self):
        """Config fields that determine the results (execution settings excluded)."""
        d = asdict(self)
        d.pop("workers")
        d.pop("output_path")
        d["dims"] = list(self.dims)
        d["etas"] = list(self.etas)
        return d


@dataclass
class ExperimentReport:
    config: dict
    records: list
    aggregates: dict
    wall_clock_seconds: float = 0.0
    workers: int = 1
    library_version: str = __version__
    prng: str = PRNG_ID

    def to_dict(self, timing=True):
        d = {
            "config": self.config,
            "records": self.records,
            "aggregates": self.aggregates,
            "library_version": self.library_version,
            "prng": self.prng,
        }
        if timing:
            d["execution"] = {"wall_clock_seconds": self.wall_clock_seconds, "workers": self.workers}
        return d

    def to_json(self, timing=True):
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=1)

    def write(self, path):
        Path(path).write_text(self.to_json() + "\n")


def _stats(values):
    a = np.asarray(values, dtype=float)
    return {"min": float(a.min()), "max": float(a.max()), "mean": float(a.mean())}


def _trial_generator(cfg, i):
    return SeededSampler(cfg.seed, i).generator()


def _random_state(cfg, rng):
    return random_mixed_state(cfg.dims[0] * cfg.dims[1], random_state=rng, dims=cfg.dims)


def _optimizer(cfg):
    return OptimizerConfig(restarts=cfg.restarts, seed=cfg.seed)


# -- per-trial work (module level so process pools can pickle it) ---------

def _measure_zero_trial(cfg, injected, i):
    rho = injected if injected is not None else _random_state(cfg, _trial_generator(cfg, i))
    norm = commutator_criterion(rho)
    rec = {"trial": i, "commutator_norm": norm, "in_c0": norm < cfg.thresholds.c0_tol}
    if cfg.compute_discord:
        rec["discord"] = discord(rho, _optimizer(cfg)).discord
    return rec


def _perturbation_trial(cfg, i):
    rng = _trial_generator(cfg, i)
    base = random_zero_discord(*cfg.dims, rng)
    direction = random_mixed_state(base.dim, random_state=rng).matrix
    norms = []
    for eta in cfg.etas:
        # eta = 0 is the unperturbed control arm
        rho = perturb(base, eta, direction=direction) if eta > 0 else base
        norms.append(commutator_criterion(rho))
    return {"trial": i, "etas": list(cfg.etas), "commutator_norms": norms}


def _convexity_trial(cfg, i):
    rng = _trial_generator(cfg, i)
    dim_a, dim_b = cfg.dims
    tol = cfg.thresholds.c0_tol

    rho1 = random_zero_discord(dim_a, dim_b, rng)
    rho2 = random_zero_discord(dim_a, dim_b, rng)
    mixed = DensityMatrix(dim_a, dim_b, 0.5 * (rho1.matrix + rho2.matrix))
    random_norm = commutator_criterion(mixed)

    basis = ProjectiveMeasurement(random_unitary(dim_a, rng))
    same = []
    for _ in range(2):
        p = random_simplex(dim_a, rng)
        sigmas = [random_mixed_state(dim_b, random_state=rng).matrix for _ in range(dim_a)]
        same.append(make_zero_discord(p, basis, sigmas))
    same_mix = DensityMatrix(dim_a, dim_b, 0.5 * (same[0].matrix + same[1].matrix))
    same_residual = omega0_residual(same_mix).residual

    with_identity = DensityMatrix(dim_a, dim_b, 0.5 * (rho1.matrix + np.eye(rho1.dim) / rho1.dim))
    identity_residual = omega0_residual(with_identity).residual

    return {
        "trial": i,
        "random_basis_norm": random_norm,
        "random_basis_left_c0": random_norm > tol,
        "same_basis_norm": commutator_criterion(same_mix),
        "same_basis_omega0_residual": same_residual,
        "same_basis_left_omega0": same_residual > 1e-10,
        "identity_mix_omega0_residual": identity_residual,
        "identity_mix_left_omega0": identity_residual > 1e-10,
    }


def _trajectory_trial(cfg, i):
    rng = _trial_generator(cfg, i)
    ch = channel_from_descriptor(cfg.channel)
    sd = spectral_decompose(ch)
    bound = crossing_bound(sd)
    rho0 = _random_state(cfg, rng)
    traj = run_trajectory(ch, rho0, cfg.steps, cfg.thresholds.crossing_tol)
    limit = asymptotic_state(sd, rho0)
    limit_in_c0 = commutator_criterion(limit) <= cfg.thresholds.crossing_tol
    # a run still open at n_max counts as an entry unless the limit itself lies in C0
    entries = traj.entries(include_tail=not limit_in_c0)
    return {
        "trial": i,
        "initial_norm": float(traj.commutator_norms[0]),
        "final_norm": float(traj.commutator_norms[-1]),
        "min_norm": float(traj.commutator_norms.min()),
        "crossings": [list(c) for c in traj.crossings],
        "entries": entries,
        "open_tail": traj.tail is not None,
        "asymptotic_state_in_c0": bool(limit_in_c0),
        "violation": entries > bound,
        "permanent_vanishing": traj.tail is not None and not limit_in_c0 and traj.tail[0] > 0,
    }


def _discord_trial(cfg, injected, i):
    rho = injected if injected is not None else _random_state(cfg, _trial_generator(cfg, i))
    res = discord(rho, _optimizer(cfg))
    rec = {"trial": i, "commutator_norm": commutator_criterion(rho)}
    rec.update(res.to_dict())
    return rec


# -- aggregation -----------------------------------------------------------

def _aggregate_measure_zero(cfg, records):
    norms = [r["commutator_norm"] for r in records]
    agg = {
        "fraction_in_c0": sum(r["in_c0"] for r in records) / len(records),
        "commutator_norm": _stats(norms),
    }
    if cfg.compute_discord:
        ds = [r["discord"] for r in records]
        agg["discord"] = _stats(ds)
        agg["fraction_zero_discord"] = sum(d <= cfg.thresholds.discord_tol for d in ds) / len(ds)
    return agg


def _aggregate_perturbation(cfg, records):
    per_eta = []
    for k, eta in enumerate(cfg.etas):
        norms = [r["commutator_norms"][k] for r in records]
        per_eta.append({
            "eta": eta,
            "escape_fraction": sum(n > cfg.thresholds.crossing_tol for n in norms) / len(norms),
            "commutator_norm": _stats(norms),
        })
    return {"per_eta": per_eta}


def _aggregate_convexity(cfg, records):
    n = len(records)
    return {
        "random_basis_leave_c0_fraction": sum(r["random_basis_left_c0"] for r in records) / n,
        "random_basis_norm": _stats([r["random_basis_norm"] for r in records]),
        "same_basis_leave_omega0_fraction": sum(r["same_basis_left_omega0"] for r in records) / n,
        "identity_mix_leave_omega0_fraction": sum(r["identity_mix_left_omega0"] for r in records) / n,
    }


def _aggregate_trajectory(cfg, records):
    ch = channel_from_descriptor(cfg.channel)
    sd = spectral_decompose(ch)
    try:
        ss = steady_state(sd)
        ss_in_c0 = commutator_criterion(ss) <= cfg.thresholds.crossing_tol
        ss_note = "unique"
    except NonUniqueSteadyStateError as exc:
        ss_in_c0 = None
        ss_note = f"not unique (eigenvalue-1 multiplicity {exc.multiplicity})"
    bound = crossing_bound(sd)
    alt = product_crossing_bound(sd)
    return {
        "n_distinct_eigenvalues": sd.n_distinct,
        "crossing_bound": bound,
        "n_distinct_products": sd.n_distinct_products,
        "product_crossing_bound": alt,
        "bound_discrepancy": alt != bound,
        "max_entries": max(r["entries"] for r in records),
        "violations": sum(r["violation"] for r in records),
        "permanent_vanishing_count": sum(r["permanent_vanishing"] for r in records),
        "fraction_asymptotic_in_c0": sum(r["asymptotic_state_in_c0"] for r in records) / len(records),
        "steady_state": ss_note,
        "steady_state_in_c0": ss_in_c0,
    }


def _aggregate_discord(cfg, records):
    ds = [r["discord"] for r in records]
    return {
        "discord": _stats(ds),
        "fraction_zero_discord": sum(d <= cfg.thresholds.discord_tol for d in ds) / len(ds),
        "all_converged": all(r["converged"] for r in records),
    }


def _map_trials(fn, cfg):
    indices = range(cfg.trials)
    if cfg.workers <= 1 or cfg.trials == 1:
        return [fn(i) for i in indices]
    chunk = max(1, cfg.trials // (4 * cfg.workers))
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, indices, chunksize=chunk))


def check_writable(path):
    """Raise OSError now rather than after a long run."""
    p = Path(path)
    parent = p.parent if str(p.parent) else Path(".")
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory {parent} does not exist")
    if p.exists() and not os.access(p, os.W_OK) or not os.access(parent, os.W_OK):
        raise PermissionError(f"cannot write {p}")


def _injected(cfg):
    if cfg.state_path is None:
        return None
    rho = load_state(cfg.state_path)
    if rho.dims != cfg.dims:
        raise InvalidParameterError(f"injected state has dims {rho.dims}, config says {cfg.dims}")
    return rho


def run_experiment(cfg):
    """Run one configured experiment and return its report (written if output_path is set)."""
    if cfg.output_path is not None:
        check_writable(cfg.output_path)
    start = time.perf_counter()
    exp = cfg.experiment
    if exp == "measure_zero":
        fn, agg = partial(_measure_zero_trial, cfg, _injected(cfg)), _aggregate_measure_zero
    elif exp == "perturbation":
        fn, agg = partial(_perturbation_trial, cfg), _aggregate_perturbation
    elif exp == "convexity":
        fn, agg = partial(_convexity_trial, cfg), _aggregate_convexity
    elif exp == "trajectory":
        channel_from_descriptor(cfg.channel)
        fn, agg = partial(_trajectory_trial, cfg), _aggregate_trajectory
    else:
        fn, agg = partial(_discord_trial, cfg, _injected(cfg)), _aggregate_discord
    records = _map_trials(fn, cfg)
    report = ExperimentReport(
        config=cfg.echo(),
        records=records,
        aggregates=agg(cfg, records),
        wall_clock_seconds=time.perf_counter() - start,
        workers=cfg.workers,
    )
    if cfg.output_path is not None:
        report.write(cfg.output_path)
    return report


def run_measure_zero(cfg):
    return run_experiment(replace(cfg, experiment="measure_zero"))


def run_perturbation(cfg):
    return run_experiment(replace(cfg, experiment="perturbation"))


def run_convexity(cfg):
    return run_experiment(replace(cfg, experiment="convexity"))


def run_trajectory_study(cfg):
    return run_experiment(replace(cfg, experiment="trajectory"))
