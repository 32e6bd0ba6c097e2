"""Uniform episodic environment contract shared by all four benchmarks.

Every environment follows the same reset/step protocol:

    obs = env.reset(task, episode_seed)
    while episode active:
        result = env.step(action)

``reset`` re-initializes all episode state deterministically from
``episode_seed``; replaying a (seed, action sequence) pair reproduces the
identical observation/reward trace bit for bit.  ``step`` returns a
:class:`StepResult` whose ``terminated`` flag marks an environment-defined
ending (goal reached, line lost, object touched) and whose ``truncated``
flag marks step-budget exhaustion; the two are never set by the same cause
(termination takes precedence on the final step).  ``info`` carries
ground-truth diagnostics for logging only — learners must not read it.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

BENCHMARKS = ("hlr", "llr", "mlf", "mpo")
WHEELED_SETTINGS = ("ss", "sss")

# Fixed observation lengths for the arm layouts.
ARM_HLR_OBS_LEN = 6
ARM_LLR_OBS_LEN = 14


@dataclass(frozen=True)
class Observation:
    """Flat real vector plus a layout tag identifying its encoding.

    Layouts: ``arm-hlr`` (6 reals), ``arm-llr`` (14 reals),
    ``wheeled-pop-code`` (width x 3 flattened binary raster).  Pop-code
    observations carry ``groups`` — (start, width) spans that tile the
    vector, each containing exactly one 1.0.
    """

    values: np.ndarray
    layout: str
    groups: tuple[tuple[int, int], ...] | None = None

    def validate(self) -> None:
        v = np.asarray(self.values)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("observation must be a finite 1-D vector")
        if self.layout == "arm-hlr":
            if v.shape != (ARM_HLR_OBS_LEN,):
                raise ValueError(f"arm-hlr layout needs {ARM_HLR_OBS_LEN} values")
        elif self.layout == "arm-llr":
            if v.shape != (ARM_LLR_OBS_LEN,):
                raise ValueError(f"arm-llr layout needs {ARM_LLR_OBS_LEN} values")
        elif self.layout == "wheeled-pop-code":
            if not self.groups:
                raise ValueError("pop-code observation needs code groups")
            spans = sorted(self.groups)
            expect_start = 0
            for start, width in spans:
                if start != expect_start or width < 1:
                    raise ValueError("code groups must tile the vector contiguously")
                expect_start = start + width
            if expect_start != v.shape[0]:
                raise ValueError("code groups must cover the whole vector")
            if not np.all((v == 0.0) | (v == 1.0)):
                raise ValueError("pop-code values must be exactly 0.0 or 1.0")
            for start, width in self.groups:
                if np.count_nonzero(v[start : start + width]) != 1:
                    raise ValueError(
                        f"code group at {start} must contain exactly one hot pixel"
                    )
        else:
            raise ValueError(f"unknown observation layout {self.layout!r}")


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    terminated: bool
    truncated: bool
    info: dict = field(default_factory=dict)

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


@dataclass(frozen=True)
class TaskSpec:
    """One task: a goal (arm) or a set of tracks (wheeled), plus budgets."""

    benchmark: str
    name: str
    step_budget: int
    goal: tuple[float, float, float] | None = None
    tracks: tuple[int, ...] | None = None
    episodes: int | None = None  # training episodes per task (wheeled)
    setting: str | None = None  # ss | sss (wheeled)

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.benchmark!r}")
        if self.step_budget < 1:
            raise ValueError("step budget must be >= 1")
        if self.benchmark in ("hlr", "llr"):
            if self.goal is None or len(self.goal) != 3:
                raise ValueError(f"{self.benchmark} task needs a 3-D goal")
        else:
            if not self.tracks:
                raise ValueError(f"{self.benchmark} task needs a non-empty track list")
            if self.setting not in WHEELED_SETTINGS:
                raise ValueError(f"wheeled task needs setting in {WHEELED_SETTINGS}")
            if self.episodes is not None and self.episodes < 1:
                raise ValueError("episodes budget must be >= 1")


@dataclass(frozen=True)
class TaskSequence:
    tasks: tuple[TaskSpec, ...]
    global_seed: int

    def __post_init__(self):
        if not self.tasks:
            raise ValueError("task sequence must be non-empty")

    def __len__(self) -> int:
        return len(self.tasks)

    def __getitem__(self, i: int) -> TaskSpec:
        return self.tasks[i]


class Env(ABC):
    """Episodic environment base: budget accounting, guards, dispatch.

    Subclasses implement ``_do_reset`` and ``_do_step``; this base enforces
    the shared contract (benchmark match on reset, no stepping after the
    episode ends, action-range checks, budget truncation).
    """

    benchmark: str
    n_actions: int

    def __init__(self):
        self._task: TaskSpec | None = None
        self._steps_taken = 0
        self._episode_over = True

    @property
    def task(self) -> TaskSpec:
        if self._task is None:
            raise RuntimeError("reset() has not been called")
        return self._task

    @property
    def steps_taken(self) -> int:
        return self._steps_taken

    def reset(self, task: TaskSpec, episode_seed: int) -> Observation:
        if task.benchmark != self.benchmark:
            raise ValueError(
                f"task benchmark {task.benchmark!r} does not match "
                f"environment {self.benchmark!r}"
            )
        self._task = task
        self._steps_taken = 0
        self._episode_over = False
        obs = self._do_reset(task, int(episode_seed))
        return obs

    def step(self, action: int) -> StepResult:
        if self._task is None:
            raise RuntimeError("step() before reset()")
        if self._episode_over:
            raise RuntimeError("step() after the episode ended; call reset()")
        action = int(action)
        if not 0 <= action < self.n_actions:
            raise ValueError(f"action {action} out of range [0, {self.n_actions})")
        self._steps_taken += 1
        obs, reward, terminated, info = self._do_step(action)
        truncated = (not terminated) and self._steps_taken >= self._task.step_budget
        if terminated or truncated:
            self._episode_over = True
        return StepResult(
            observation=obs,
            reward=float(reward),
            terminated=terminated,
            truncated=truncated,
            info=info,
        )

    @abstractmethod
    def _do_reset(self, task: TaskSpec, episode_seed: int) -> Observation:
        """Initialize episode state from the seed; return the first observation."""

    @abstractmethod
    def _do_step(self, action: int) -> tuple[Observation, float, bool, dict]:
        """Apply one transition; return (obs, reward, terminated, info)."""


def save_task_sequence(seq: TaskSequence, path: str | Path) -> None:
    """Write a task sequence as a YAML task file."""
    tasks = []
    for t in seq.tasks:
        row: dict = {"name": t.name, "step_budget": t.step_budget}
        if t.goal is not None:
            row["goal"] = [float(c) for c in t.goal]
        if t.tracks is not None:
            row["tracks"] = [int(i) for i in t.tracks]
        if t.episodes is not None:
            row["episodes"] = int(t.episodes)
        if t.setting is not None:
            row["setting"] = t.setting
        tasks.append(row)
    doc = {
        "benchmark": seq.tasks[0].benchmark,
        "global_seed": int(seq.global_seed),
        "tasks": tasks,
    }
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=False))


def load_task_sequence(path: str | Path) -> TaskSequence:
    """Read a YAML task file written by :func:`save_task_sequence`."""
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: task file must be a mapping")
    allowed_top = {"benchmark", "global_seed", "tasks"}
    unknown = set(doc) - allowed_top
    if unknown:
        raise ValueError(f"{path}: unknown task-file keys {sorted(unknown)}")
    benchmark = doc.get("benchmark")
    if benchmark not in BENCHMARKS:
        raise ValueError(f"{path}: unknown benchmark {benchmark!r}")
    rows = doc.get("tasks")
    if not isinstance(rows, list) or not rows:
        raise ValueError(f"{path}: task file needs a non-empty 'tasks' list")
    allowed_row = {"name", "goal", "tracks", "step_budget", "episodes", "setting"}
    tasks = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise ValueError(f"{path}: task row {i} must be a mapping")
        unknown = set(row) - allowed_row
        if unknown:
            raise ValueError(f"{path}: task row {i} has unknown keys {sorted(unknown)}")
        tasks.append(
            TaskSpec(
                benchmark=benchmark,
                name=str(row.get("name", f"task-{i}")),
                step_budget=int(row["step_budget"]),
                goal=tuple(float(c) for c in row["goal"]) if "goal" in row else None,
                tracks=tuple(int(t) for t in row["tracks"]) if "tracks" in row else None,
                episodes=int(row["episodes"]) if "episodes" in row else None,
                setting=row.get("setting"),
            )
        )
    return TaskSequence(tasks=tuple(tasks), global_seed=int(doc.get("global_seed", 0)))
