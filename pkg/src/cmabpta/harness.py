"""Monte Carlo experiment runner: replications, aggregation, CSV output."""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import CTS as K_CTS, CUCB as K_CUCB, run_cascading
from .analysis import optimal_value
from .environments import DISJUNCTIVE, CascadingInstance, InstanceSpecError, instance_from_dict
from .learners import CTS, CUCB, CUCB_EXPLORATION
from .model import CmabError, InvalidParameterError, ProblemInstance
from .oracles import exact_oracle
from .rng import RNG_NAME, SEED_DERIVATION, check_seed, replication_seed, streams

log = logging.getLogger(__name__)

LEARNERS = ("cts", "cucb")
CSV_HEADER = ("round", "mean_cum_regret", "std_cum_regret")


class ReplicationError(CmabError):
    pass


@dataclass
class ExperimentConfig:
    instance: dict
    learner: str
    T: int
    n_runs: int = 1
    master_seed: int = 0
    record_every: int = 1
    parallelism: int = 1
    exploration: float = CUCB_EXPLORATION

    def __post_init__(self):
        if self.learner not in LEARNERS:
            raise InvalidParameterError(f"learner must be one of {LEARNERS}, got {self.learner!r}")
        for name in ("T", "n_runs", "record_every", "parallelism"):
            if int(getattr(self, name)) < 1:
                raise InvalidParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
            setattr(self, name, int(getattr(self, name)))
        self.master_seed = check_seed(self.master_seed)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise InstanceSpecError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise InstanceSpecError(f"bad experiment config: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise InstanceSpecError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InstanceSpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return asdict(self)

    def n_recorded(self) -> int:
        return -(-self.T // self.record_every)

    def recorded_rounds(self) -> np.ndarray:
        rounds = np.arange(self.record_every, self.T + 1, self.record_every)
        if rounds.size == 0 or rounds[-1] != self.T:
            rounds = np.append(rounds, self.T)
        return rounds


@dataclass
class RegretTrajectory:
    cum_regret: np.ndarray
    seed: int


@dataclass
class ExperimentAggregate:
    rounds: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    n_runs: int
    metadata: dict = field(default_factory=dict)

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_std(self) -> float:
        return float(self.std[-1])


@dataclass
class _Prepared:
    instance: ProblemInstance
    opt_value: float


def prepare(config: ExperimentConfig) -> _Prepared:
    instance = instance_from_dict(config.instance)
    return _Prepared(instance, optimal_value(instance))


def _run_python(config, instance, opt_value, seed):
    env_rng, learner_rng = streams(seed)
    oracle = exact_oracle(instance)
    if config.learner == "cts":
        learner = CTS(instance.m, oracle, learner_rng)
    else:
        learner = CUCB(instance.m, oracle, config.exploration)
    mu = instance.means
    out = np.empty(config.n_recorded())
    cum, rec = 0.0, 0
    for t in range(1, config.T + 1):
        selected = learner.select()
        round_ = instance.play(selected, env_rng)
        learner.update(round_.observation)
        cum += opt_value - instance.expected_reward(selected, mu)
        if t % config.record_every == 0 or t == config.T:
            out[rec] = cum
            rec += 1
    return out


def _run_kernel(config, instance: CascadingInstance, opt_value, seed):
    env_rng, learner_rng = streams(seed)
    out, _, _ = run_cascading(
        instance.means, instance.L, instance.R, instance.K, instance.mode == DISJUNCTIVE,
        K_CTS if config.learner == "cts" else K_CUCB, float(config.exploration),
        config.T, config.record_every, float(opt_value), env_rng, learner_rng)
    return out


def run_replication(config: ExperimentConfig, replication_index: int, prepared: _Prepared = None,
                    engine: str = "auto") -> RegretTrajectory:
    """Simulate one replication and return its cumulative pseudo-regret.

    ``engine`` is ``"kernel"`` (compiled, cascading instances only),
    ``"python"`` (generic reference loop) or ``"auto"``.
    """
    prepared = prepared or prepare(config)
    seed = replication_seed(config.master_seed, replication_index)
    inst = prepared.instance
    if engine == "auto":
        engine = "kernel" if isinstance(inst, CascadingInstance) else "python"
    if engine == "kernel":
        if not isinstance(inst, CascadingInstance):
            raise InvalidParameterError("the compiled engine only supports cascading instances")
        cum = _run_kernel(config, inst, prepared.opt_value, seed)
    elif engine == "python":
        cum = _run_python(config, inst, prepared.opt_value, seed)
    else:
        raise InvalidParameterError(f"unknown engine {engine!r}")
    return RegretTrajectory(cum, seed)


def experiment_metadata(config: ExperimentConfig, prepared: _Prepared) -> dict:
    import numba
    learner = {"name": config.learner}
    if config.learner == "cucb":
        learner["exploration"] = config.exploration
        learner["index"] = "1 if N_i = 0 else min(1, mean_i + sqrt(exploration * ln t / N_i))"
    else:
        learner["prior"] = "Beta(1, 1)"
        learner["rounding"] = "Y ~ Bernoulli(X)"
    return {
        "config": config.to_dict(),
        "learner": learner,
        "opt_value": prepared.opt_value,
        "regret": "pseudo-regret: cumulative sum of r(S*, mu) - r(S(t), mu)",
        "std": "sample standard deviation across replications (ddof=1; 0 for a single run)",
        "rng": {"generator": RNG_NAME, "seed_derivation": SEED_DERIVATION},
        "versions": {"cmabpta": __version__, "numpy": np.__version__, "numba": numba.__version__},
    }


def run_experiment(config: ExperimentConfig, engine: str = "auto") -> ExperimentAggregate:
    """Run ``config.n_runs`` replications and aggregate them in replication order."""
    prepared = prepare(config)

    def one(k):
        try:
            return run_replication(config, k, prepared, engine).cum_regret
        except Exception as exc:
            seed = replication_seed(config.master_seed, k)
            raise ReplicationError(f"replication {k} (seed {seed}) failed: {exc}") from exc

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            trajectories = list(pool.map(one, range(config.n_runs)))
    else:
        trajectories = [one(k) for k in range(config.n_runs)]
    stacked = np.vstack(trajectories)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0, ddof=1) if config.n_runs > 1 else np.zeros_like(mean)
    log.info("%s on %s: final regret %.2f +- %.2f over %d runs", config.learner,
             config.instance.get("type"), mean[-1], std[-1], config.n_runs)
    return ExperimentAggregate(config.recorded_rounds(), mean, std, config.n_runs,
                               experiment_metadata(config, prepared))


def metadata_path(path) -> Path:
    return Path(path).with_suffix(".meta.json")


def write_results(aggregate: ExperimentAggregate, path) -> Path:
    """Write the CSV and its JSON metadata sidecar; returns the CSV path."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r, m, s in zip(aggregate.rounds, aggregate.mean, aggregate.std):
                writer.writerow((int(r), repr(float(m)), repr(float(s))))
        meta = dict(aggregate.metadata, n_runs=aggregate.n_runs)
        metadata_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise CmabError(f"cannot write results to {path}: {exc.strerror}") from None
    return path


def read_results(path) -> ExperimentAggregate:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        meta = json.loads(metadata_path(path).read_text())
    except OSError as exc:
        raise CmabError(f"cannot read results from {path}: {exc.strerror}") from None
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise CmabError(f"{path}: expected header {','.join(CSV_HEADER)}")
    body = rows[1:]
    rounds = np.array([int(r[0]) for r in body], dtype=np.int64)
    mean = np.array([float(r[1]) for r in body])
    std = np.array([float(r[2]) for r in body])
    n_runs = meta.pop("n_runs")
    return ExperimentAggregate(rounds, mean, std, n_runs, meta)
