"""Experiment configuration: nested dataclasses, YAML loading, content hash.

A run is fully described by a :class:`RunConfig`.  Loading is strict —
unknown keys anywhere in the document are rejected so typos cannot
silently fall back to defaults.  ``config_hash`` fingerprints everything
that affects results (seeds and the output directory are excluded), and
is stamped into every result file so runs can only be aggregated with
runs of the identical experiment.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .env import BENCHMARKS, WHEELED_SETTINGS

ARM_BENCHMARKS = ("hlr", "llr")
LEARNERS = ("dqn", "dqn_mc", "reinforce")


@dataclass(frozen=True)
class EnvParams:
    """Environment knobs; fields irrelevant to the chosen benchmark are inert."""

    # arm
    chain_file: str | None = None  # None -> packaged default chain
    n_actions: int = 5  # llr discretization (5 main, 9 ablation)
    illegal_penalty: float = -0.1  # hlr illegal-move reward
    step_size: float = 0.1  # hlr move length, meters
    workspace_center: tuple[float, float, float] = (0.0, 0.0, 0.333)
    workspace_radius: float = 0.855
    workspace_z_min: float = 0.0
    # wheeled
    wheel_separation: float = 0.10
    step_duration: float = 0.1
    spawn_jitter: float = 0.02  # mlf lateral spawn range
    controller_threshold: float = 5.0  # sss controllers (pixels / degrees)
    spawn_distance: float = 0.45  # mpo
    heading_range_deg: float = 18.0  # mpo
    contact_radius: float = 0.06  # mpo

    def __post_init__(self):
        if self.n_actions < 2:
            raise ValueError("env.n_actions must be >= 2")
        if self.step_size <= 0 or self.workspace_radius <= 0:
            raise ValueError("env geometry values must be positive")
        if self.wheel_separation <= 0 or self.step_duration <= 0:
            raise ValueError("drive parameters must be positive")


@dataclass(frozen=True)
class AgentParams:
    learner: str = "dqn"
    hidden: tuple[int, ...] = (128, 64)
    lr: float = 1e-4
    gamma: float = 0.8
    batch_size: int = 32
    buffer_capacity: int = 5000
    target_sync: int = 0  # sync period in updates; 0 disables the target net
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.learner not in LEARNERS:
            raise ValueError(f"agent.learner must be one of {LEARNERS}")
        if self.batch_size < 1 or self.buffer_capacity < 1:
            raise ValueError("agent budgets must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("agent.gamma must lie in [0, 1]")
        if self.lr <= 0:
            raise ValueError("agent.lr must be positive")


@dataclass(frozen=True)
class ExplorationParams:
    """Epsilon-greedy schedule.  kind 'step': per-step linear decay
    (arm protocol); kind 'episode-ramp': per-episode ramp to the minimum
    across each task, starting higher on the first task (wheeled
    protocol)."""

    kind: str = "step"
    start: float = 1.0
    start_later: float = 0.5  # episode-ramp: start on tasks after the first
    minimum: float = 0.2
    delta: float = 0.0002  # step kind: per-step decrement
    reset_per_task: bool = True  # step kind: restart decay at task boundaries

    def __post_init__(self):
        if self.kind not in ("step", "episode-ramp"):
            raise ValueError("exploration.kind must be 'step' or 'episode-ramp'")
        for v in (self.start, self.start_later, self.minimum):
            if not 0.0 <= v <= 1.0:
                raise ValueError("exploration rates must lie in [0, 1]")
        if self.delta < 0:
            raise ValueError("exploration.delta must be >= 0")


@dataclass(frozen=True)
class TrainingParams:
    steps_per_task: int = 5000  # arm benchmarks train by env steps
    episodes_per_task: int | None = None  # wheeled override (else task budget)
    eval_episodes: int = 20
    stop_when_solved: bool = False  # early-stop a task once the probe passes
    probe_every: int = 0  # training steps between probes (0 = never)
    # the probe passes when every evaluation episode succeeds; setting a
    # reward threshold additionally requires the mean greedy episode reward
    # to reach it (used to train until an exact target reward)
    solve_reward_threshold: float | None = None

    def __post_init__(self):
        if self.steps_per_task < 1 or self.eval_episodes < 1:
            raise ValueError("training budgets must be positive")
        if self.episodes_per_task is not None and self.episodes_per_task < 1:
            raise ValueError("training.episodes_per_task must be positive")
        if self.probe_every < 0:
            raise ValueError("training.probe_every must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    benchmark: str
    setting: str = "ss"  # wheeled benchmarks only
    tasks: str = "default"  # 'default' or a task-file path
    n_tasks: int | None = None  # truncate the task sequence
    seeds: tuple[int, ...] = (1, 2, 3)
    out_dir: str | None = None
    env: EnvParams = field(default_factory=EnvParams)
    agent: AgentParams = field(default_factory=AgentParams)
    exploration: ExplorationParams = field(default_factory=ExplorationParams)
    training: TrainingParams = field(default_factory=TrainingParams)

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"benchmark must be one of {BENCHMARKS}")
        if self.setting not in WHEELED_SETTINGS:
            raise ValueError(f"setting must be one of {WHEELED_SETTINGS}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.n_tasks is not None and self.n_tasks < 1:
            raise ValueError("n_tasks must be positive")


_BENCHMARK_DEFAULTS: dict[str, dict] = {
    "hlr": {
        "agent": {"learner": "dqn", "hidden": (128, 64), "buffer_capacity": 5000},
        "exploration": {"kind": "step", "start": 1.0, "minimum": 0.2,
                        "delta": 0.0002, "reset_per_task": True},
        "training": {"steps_per_task": 5000, "eval_episodes": 20},
    },
    "llr": {
        "agent": {"learner": "reinforce", "hidden": (128, 64),
                  "buffer_capacity": 5000},
        "exploration": {"kind": "step", "start": 1.0, "minimum": 0.2,
                        "delta": 0.0002, "reset_per_task": True},
        "training": {"steps_per_task": 20000, "eval_episodes": 20},
    },
    "mlf": {
        "agent": {"learner": "dqn", "hidden": (100, 100, 100),
                  "buffer_capacity": 15000},
        "exploration": {"kind": "episode-ramp", "start": 1.0, "start_later": 0.5,
                        "minimum": 0.2},
        "training": {"eval_episodes": 10},
    },
    "mpo": {
        "agent": {"learner": "dqn", "hidden": (100, 100, 100),
                  "buffer_capacity": 15000},
        "exploration": {"kind": "episode-ramp", "start": 1.0, "start_later": 0.5,
                        "minimum": 0.2},
        "training": {"eval_episodes": 10},
    },
}


def _merge(defaults: dict, overrides: dict, context: str) -> dict:
    merged = dict(defaults)
    for key, value in overrides.items():
        if (
            key in merged
            and isinstance(merged[key], dict)
            and isinstance(value, dict)
        ):
            merged[key] = _merge(merged[key], value, f"{context}.{key}")
        else:
            merged[key] = value
    return merged


def _build_dataclass(cls, doc: dict, context: str):
    field_names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - field_names
    if unknown:
        raise ValueError(f"{context}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for name, value in doc.items():
        if isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(doc: dict) -> RunConfig:
    """Build a RunConfig from a plain mapping, applying benchmark defaults.

    Unknown keys at any level are an error.
    """
    if not isinstance(doc, dict):
        raise ValueError("config document must be a mapping")
    if "benchmark" not in doc:
        raise ValueError("config must name a benchmark")
    benchmark = doc["benchmark"]
    if benchmark not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {benchmark!r}")
    doc = _merge(_BENCHMARK_DEFAULTS[benchmark], doc, "config")
    top_fields = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(doc) - top_fields
    if unknown:
        raise ValueError(f"config: unknown keys {sorted(unknown)}")
    nested = {
        "env": EnvParams,
        "agent": AgentParams,
        "exploration": ExplorationParams,
        "training": TrainingParams,
    }
    kwargs: dict = {}
    for name, value in doc.items():
        if name in nested:
            if not isinstance(value, dict):
                raise ValueError(f"config.{name} must be a mapping")
            kwargs[name] = _build_dataclass(nested[name], value, f"config.{name}")
        elif name == "seeds":
            kwargs[name] = tuple(int(s) for s in value)
        elif name in ("n_tasks",):
            kwargs[name] = None if value is None else int(value)
        else:
            kwargs[name] = value
    return RunConfig(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    """Read a YAML experiment file into a validated RunConfig."""
    path = Path(path)
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config file must contain a mapping")
    try:
        return config_from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{path}: {exc}") from exc


def config_hash(config: RunConfig) -> str:
    """Content hash over everything that shapes results.

    Seeds and the output directory are excluded: runs of the same
    experiment at different seeds share a hash (and may be aggregated);
    any other change produces a new hash.
    """
    doc = dataclasses.asdict(config)
    doc.pop("seeds")
    doc.pop("out_dir")
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
