"""Sequential-task training with backward evaluation — the core protocol.

``run_sequence`` trains one learner through a task sequence, keeping its
parameters (and replay buffer) across task boundaries, and after each
task evaluates the greedy policy on every task seen so far.  The result
is a lower-triangular :class:`EvalMatrix` of per-(trained, evaluated)
metric records, serialized as a delimited text table.

Determinism: all randomness descends from the run seed through fixed,
disjoint streams (agent initialization, exploration/batch draws, training
episode seeds, evaluation episode seeds).  Evaluation episode seeds
depend only on (run seed, task, episode index), so every task is always
evaluated on the same episode set no matter when it is evaluated.
Evaluation never mutates the learner.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import (
    DqnAgent,
    EpisodeRampSchedule,
    ReinforceAgent,
    StepEpsilonSchedule,
)
from .arm import HlrEnv, LlrEnv, hlr_default_tasks, llr_default_tasks
from .config import RunConfig, config_hash
from .env import Env, TaskSequence, load_task_sequence
from .kinematics import Workspace, default_chain, load_chain
from .wheeled import (
    DiffDriveParams,
    MlfEnv,
    MpoEnv,
    mlf_default_tasks,
    mpo_default_tasks,
)

# Stream tags separating the run seed's derived generators.
_STREAM_AGENT = 1
_STREAM_TRAIN_RNG = 2
_STREAM_TRAIN_EPISODE = 3
_STREAM_EVAL_EPISODE = 4


def derived_seed(run_seed: int, stream: int, *indices: int) -> int:
    """Deterministic child seed for (run, stream, indices...)."""
    ss = np.random.SeedSequence([int(run_seed), int(stream), *map(int, indices)])
    return int(ss.generate_state(1, np.uint64)[0])


def eval_episode_seed(run_seed: int, task_index: int, episode: int) -> int:
    """Evaluation episodes are a fixed per-task set, independent of when
    in the sequence the evaluation happens."""
    return derived_seed(run_seed, _STREAM_EVAL_EPISODE, task_index, episode)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpisodeTrace:
    rewards: tuple[float, ...]
    success: bool


def compute_metrics(traces: list[EpisodeTrace]) -> tuple[float, float, float]:
    """(avg_step_reward, avg_episode_reward, accuracy) over episode traces.

    avg_step_reward averages each episode's (sum / length) first, so short
    and long episodes weigh equally.
    """
    if not traces:
        raise ValueError("compute_metrics needs at least one episode")
    step_means = [sum(t.rewards) / len(t.rewards) for t in traces]
    sums = [sum(t.rewards) for t in traces]
    accuracy = sum(1 for t in traces if t.success) / len(traces)
    return (
        float(np.mean(step_means)),
        float(np.mean(sums)),
        float(accuracy),
    )


@dataclass(frozen=True)
class EvalRecord:
    trained_upto: int
    evaluated: int
    episodes: int
    avg_step_reward: float
    avg_episode_reward: float
    accuracy: float

    def __post_init__(self):
        if self.evaluated > self.trained_upto:
            raise ValueError("records must be lower-triangular")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")


CSV_COLUMNS = (
    "run_seed",
    "trained_upto",
    "evaluated",
    "episodes",
    "avg_step_reward",
    "avg_episode_reward",
    "accuracy",
)


@dataclass(frozen=True)
class EvalMatrix:
    records: tuple[EvalRecord, ...]
    run_seed: int
    config_hash: str

    def cell(self, trained_upto: int, evaluated: int) -> EvalRecord:
        for r in self.records:
            if r.trained_upto == trained_upto and r.evaluated == evaluated:
                return r
        raise KeyError((trained_upto, evaluated))

    def n_tasks(self) -> int:
        return 1 + max(r.trained_upto for r in self.records)

    def final_row(self) -> list[EvalRecord]:
        """Records of the last evaluation pass (after the final task)."""
        last = max(r.trained_upto for r in self.records)
        return [r for r in self.records if r.trained_upto == last]

    def retention_series(self, evaluated: int = 0) -> list[EvalRecord]:
        """The (· , evaluated) column: how one task's score evolves."""
        return sorted(
            (r for r in self.records if r.evaluated == evaluated),
            key=lambda r: r.trained_upto,
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# config_hash={self.config_hash}\n")
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in self.records:
                writer.writerow(
                    [
                        self.run_seed,
                        r.trained_upto,
                        r.evaluated,
                        r.episodes,
                        repr(r.avg_step_reward),
                        repr(r.avg_episode_reward),
                        repr(r.accuracy),
                    ]
                )

    @staticmethod
    def from_csv(path: str | Path) -> "EvalMatrix":
        path = Path(path)
        hash_value = ""
        rows = []
        with open(path, newline="") as fh:
            first = fh.readline().strip()
            if first.startswith("# config_hash="):
                hash_value = first.split("=", 1)[1]
                header_line = fh.readline()
            else:
                header_line = first + "\n"
            header = next(csv.reader([header_line]))
            if tuple(header) != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected columns {header}")
            for row in csv.reader(fh):
                if row:
                    rows.append(row)
        if not rows:
            raise ValueError(f"{path}: no records")
        run_seed = int(rows[0][0])
        records = []
        for row in rows:
            if int(row[0]) != run_seed:
                raise ValueError(f"{path}: mixed run seeds in one file")
            records.append(
                EvalRecord(
                    trained_upto=int(row[1]),
                    evaluated=int(row[2]),
                    episodes=int(row[3]),
                    avg_step_reward=float(row[4]),
                    avg_episode_reward=float(row[5]),
                    accuracy=float(row[6]),
                )
            )
        return EvalMatrix(records=tuple(records), run_seed=run_seed,
                          config_hash=hash_value)


@dataclass(frozen=True)
class AggregateCell:
    trained_upto: int
    evaluated: int
    episodes: int
    n_runs: int
    avg_step_reward_mean: float
    avg_step_reward_std: float
    avg_episode_reward_mean: float
    avg_episode_reward_std: float
    accuracy_mean: float
    accuracy_std: float


AGGREGATE_COLUMNS = (
    "trained_upto",
    "evaluated",
    "episodes",
    "n_runs",
    "avg_step_reward_mean",
    "avg_step_reward_std",
    "avg_episode_reward_mean",
    "avg_episode_reward_std",
    "accuracy_mean",
    "accuracy_std",
)


def _spread(values: list[float]) -> float:
    """Sample standard deviation; 0.0 for a single run."""
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def aggregate_runs(matrices: list[EvalMatrix]) -> list[AggregateCell]:
    """Per-cell mean and sample standard deviation across runs.

    All matrices must come from the identical experiment (same config
    hash) and cover the same cells.
    """
    if not matrices:
        raise ValueError("aggregate_runs needs at least one matrix")
    hashes = {m.config_hash for m in matrices}
    if len(hashes) != 1:
        raise ValueError(f"matrices mix configurations: {sorted(hashes)}")
    keys = [(r.trained_upto, r.evaluated) for r in matrices[0].records]
    for m in matrices[1:]:
        if [(r.trained_upto, r.evaluated) for r in m.records] != keys:
            raise ValueError("matrices cover different evaluation cells")
    cells = []
    for i, (trained, evaluated) in enumerate(keys):
        per_run = [m.records[i] for m in matrices]
        step = [r.avg_step_reward for r in per_run]
        episode = [r.avg_episode_reward for r in per_run]
        acc = [r.accuracy for r in per_run]
        cells.append(
            AggregateCell(
                trained_upto=trained,
                evaluated=evaluated,
                episodes=per_run[0].episodes,
                n_runs=len(per_run),
                avg_step_reward_mean=float(np.mean(step)),
                avg_step_reward_std=_spread(step),
                avg_episode_reward_mean=float(np.mean(episode)),
                avg_episode_reward_std=_spread(episode),
                accuracy_mean=float(np.mean(acc)),
                accuracy_std=_spread(acc),
            )
        )
    return cells


def aggregate_to_csv(cells: list[AggregateCell], config_hash_value: str,
                     path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash_value}\n")
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for c in cells:
            writer.writerow(
                [
                    c.trained_upto,
                    c.evaluated,
                    c.episodes,
                    c.n_runs,
                    repr(c.avg_step_reward_mean),
                    repr(c.avg_step_reward_std),
                    repr(c.avg_episode_reward_mean),
                    repr(c.avg_episode_reward_std),
                    repr(c.accuracy_mean),
                    repr(c.accuracy_std),
                ]
            )


def aggregate_from_csv(path: str | Path) -> tuple[list[AggregateCell], str]:
    path = Path(path)
    hash_value = ""
    cells = []
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first.startswith("# config_hash="):
            hash_value = first.split("=", 1)[1]
            header_line = fh.readline()
        else:
            header_line = first + "\n"
        header = next(csv.reader([header_line]))
        if tuple(header) != AGGREGATE_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header}")
        for row in csv.reader(fh):
            if not row:
                continue
            cells.append(
                AggregateCell(
                    trained_upto=int(row[0]),
                    evaluated=int(row[1]),
                    episodes=int(row[2]),
                    n_runs=int(row[3]),
                    avg_step_reward_mean=float(row[4]),
                    avg_step_reward_std=float(row[5]),
                    avg_episode_reward_mean=float(row[6]),
                    avg_episode_reward_std=float(row[7]),
                    accuracy_mean=float(row[8]),
                    accuracy_std=float(row[9]),
                )
            )
    if not cells:
        raise ValueError(f"{path}: no records")
    return cells, hash_value


# ---------------------------------------------------------------------------
# Construction from config
# ---------------------------------------------------------------------------

OBS_DIMS = {"hlr": 6, "llr": 14}  # wheeled dims come from the encoders


def build_chain(config: RunConfig):
    if config.env.chain_file:
        return load_chain(config.env.chain_file)
    return default_chain()


def build_task_sequence(config: RunConfig) -> TaskSequence:
    if config.tasks != "default":
        seq = load_task_sequence(config.tasks)
        if seq.tasks[0].benchmark != config.benchmark:
            raise ValueError(
                f"task file benchmark {seq.tasks[0].benchmark!r} does not match "
                f"config benchmark {config.benchmark!r}"
            )
    elif config.benchmark == "hlr":
        seq = hlr_default_tasks(
            chain=build_chain(config), workspace=_workspace(config)
        )
    elif config.benchmark == "llr":
        seq = llr_default_tasks(chain=build_chain(config))
    elif config.benchmark == "mlf":
        seq = mlf_default_tasks(setting=config.setting)
    else:
        seq = mpo_default_tasks(setting=config.setting)
    if config.n_tasks is not None:
        if config.n_tasks > len(seq.tasks):
            raise ValueError(
                f"n_tasks {config.n_tasks} exceeds the {len(seq.tasks)} available"
            )
        seq = TaskSequence(tasks=seq.tasks[: config.n_tasks],
                           global_seed=seq.global_seed)
    return seq


def _workspace(config: RunConfig) -> Workspace:
    return Workspace(
        center=tuple(config.env.workspace_center),
        radius=config.env.workspace_radius,
        z_min=config.env.workspace_z_min,
    )


def build_env(config: RunConfig, task_sequence: TaskSequence) -> Env:
    e = config.env
    if config.benchmark == "hlr":
        return HlrEnv(
            chain=build_chain(config),
            workspace=_workspace(config),
            illegal_penalty=e.illegal_penalty,
            step_size=e.step_size,
        )
    if config.benchmark == "llr":
        return LlrEnv(chain=build_chain(config), n_actions=e.n_actions)
    drive = DiffDriveParams(wheel_separation=e.wheel_separation,
                            step_duration=e.step_duration)
    if config.benchmark == "mlf":
        return MlfEnv(
            setting=config.setting,
            global_seed=task_sequence.global_seed,
            drive=drive,
            spawn_jitter=e.spawn_jitter,
            controller_threshold=e.controller_threshold,
        )
    return MpoEnv(
        setting=config.setting,
        global_seed=task_sequence.global_seed,
        drive=drive,
        spawn_distance=e.spawn_distance,
        heading_range_deg=e.heading_range_deg,
        contact_radius=e.contact_radius,
        controller_threshold_deg=e.controller_threshold,
    )


def build_learner(config: RunConfig, obs_dim: int, n_actions: int,
                  rng: np.random.Generator):
    a = config.agent
    if a.learner in ("dqn", "dqn_mc"):
        return DqnAgent(
            obs_dim=obs_dim,
            n_actions=n_actions,
            hidden=tuple(a.hidden),
            lr=a.lr,
            gamma=a.gamma,
            batch_size=a.batch_size,
            buffer_capacity=a.buffer_capacity,
            rng=rng,
            target_sync=a.target_sync,
            adam_beta1=a.adam_beta1,
            adam_beta2=a.adam_beta2,
            adam_eps=a.adam_eps,
        )
    if a.learner == "reinforce":
        if config.benchmark != "llr":
            raise ValueError("the reinforce learner is defined for llr episodes")
        return ReinforceAgent(
            obs_dim=obs_dim,
            n_actions=n_actions,
            episode_len=7,
            hidden=tuple(a.hidden),
            lr=a.lr,
            rng=rng,
            adam_beta1=a.adam_beta1,
            adam_beta2=a.adam_beta2,
            adam_eps=a.adam_eps,
        )
    raise ValueError(f"unknown learner {a.learner!r}")


# ---------------------------------------------------------------------------
# Evaluation and training loops
# ---------------------------------------------------------------------------

def _greedy_action(learner, obs: np.ndarray) -> int:
    if isinstance(learner, ReinforceAgent):
        return learner.act(obs, greedy=True)
    return learner.act(obs, epsilon=0.0)


def evaluate_task(env: Env, learner, task, episodes: int, run_seed: int,
                  task_index: int) -> list[EpisodeTrace]:
    """Greedy-policy episodes on one task; no exploration, no learning."""
    traces = []
    for ep in range(episodes):
        obs = env.reset(task, eval_episode_seed(run_seed, task_index, ep)).values
        rewards = []
        success = False
        while True:
            action = _greedy_action(learner, obs)
            result = env.step(action)
            rewards.append(result.reward)
            obs = result.observation.values
            if result.done:
                success = bool(result.info.get("success", False))
                break
        traces.append(EpisodeTrace(rewards=tuple(rewards), success=success))
    return traces


def _probe_solved(env, learner, task, task_index, config, run_seed) -> bool:
    traces = evaluate_task(env, learner, task, config.training.eval_episodes,
                           run_seed, task_index)
    if not all(t.success for t in traces):
        return False
    threshold = config.training.solve_reward_threshold
    if threshold is None:
        return True
    mean_reward = float(np.mean([sum(t.rewards) for t in traces]))
    return mean_reward >= threshold


def _train_task_dqn_steps(env, learner, task, task_index, config, run_seed,
                          train_rng, eps_offset: int) -> int:
    """Arm protocol: train by environment steps with per-step epsilon decay.

    Returns the number of steps consumed toward the global (non-reset)
    epsilon clock.
    """
    schedule = StepEpsilonSchedule(
        start=config.exploration.start,
        minimum=config.exploration.minimum,
        delta=config.exploration.delta,
    )
    mc_returns = config.agent.learner == "dqn_mc"
    steps_budget = config.training.steps_per_task
    probe_every = config.training.probe_every
    steps_used = 0
    episode_index = 0
    next_probe = probe_every if probe_every else None
    while steps_used < steps_budget:
        seed = derived_seed(run_seed, _STREAM_TRAIN_EPISODE, task_index,
                            episode_index)
        obs = env.reset(task, seed).values
        episode: list[tuple[np.ndarray, int, np.ndarray]] = []
        final_reward = 0.0
        while True:
            epsilon = schedule.value(eps_offset + steps_used)
            action = learner.act(obs, epsilon, train_rng)
            result = env.step(action)
            next_obs = result.observation.values
            if mc_returns:
                episode.append((obs, action, next_obs))
                final_reward = result.reward
            else:
                learner.observe(obs, action, result.reward, next_obs,
                                result.terminated)
                learner.train_step(train_rng)
            obs = next_obs
            steps_used += 1
            if result.done:
                break
        if mc_returns:
            # grant the episode's final reward to every step, as a terminal
            # transition, then take one update per step taken
            for step_obs, step_action, step_next in episode:
                learner.observe(step_obs, step_action, final_reward, step_next,
                                True)
            for _ in episode:
                learner.train_step(train_rng)
        episode_index += 1
        if (
            config.training.stop_when_solved
            and next_probe is not None
            and steps_used >= next_probe
        ):
            if _probe_solved(env, learner, task, task_index, config, run_seed):
                break
            next_probe += probe_every
    return steps_used


def _train_task_reinforce(env, learner, task, task_index, config, run_seed,
                          train_rng) -> int:
    """Joint-space protocol: sample episodes from the softmax policy and
    apply one final-reward update per episode."""
    steps_budget = config.training.steps_per_task
    probe_every = config.training.probe_every
    steps_used = 0
    episode_index = 0
    next_probe = probe_every if probe_every else None
    while steps_used < steps_budget:
        seed = derived_seed(run_seed, _STREAM_TRAIN_EPISODE, task_index,
                            episode_index)
        obs = env.reset(task, seed).values
        observations = []
        actions = []
        final_reward = 0.0
        while True:
            action = learner.act(obs, train_rng)
            observations.append(obs)
            actions.append(action)
            result = env.step(action)
            final_reward = result.reward
            obs = result.observation.values
            steps_used += 1
            if result.done:
                break
        learner.update(observations, actions, final_reward)
        episode_index += 1
        if (
            config.training.stop_when_solved
            and next_probe is not None
            and steps_used >= next_probe
        ):
            if _probe_solved(env, learner, task, task_index, config, run_seed):
                break
            next_probe += probe_every
    return steps_used


def _train_task_dqn_episodes(env, learner, task, task_index, config, run_seed,
                             train_rng) -> int:
    """Wheeled protocol: train by episodes with a per-episode epsilon ramp."""
    schedule = EpisodeRampSchedule(
        start_first=config.exploration.start,
        start_later=config.exploration.start_later,
        minimum=config.exploration.minimum,
    )
    episodes = config.training.episodes_per_task or task.episodes
    if not episodes:
        raise ValueError("wheeled tasks need an episodes budget")
    steps_used = 0
    for ep in range(episodes):
        epsilon = schedule.value(task_index, ep, episodes)
        seed = derived_seed(run_seed, _STREAM_TRAIN_EPISODE, task_index, ep)
        obs = env.reset(task, seed).values
        while True:
            action = learner.act(obs, epsilon, train_rng)
            result = env.step(action)
            next_obs = result.observation.values
            learner.observe(obs, action, result.reward, next_obs,
                            result.terminated)
            learner.train_step(train_rng)
            obs = next_obs
            steps_used += 1
            if result.done:
                break
    return steps_used


def run_sequence(config: RunConfig, run_seed: int | None = None) -> EvalMatrix:
    """Train through the task sequence; evaluate backward after each task."""
    if run_seed is None:
        run_seed = config.seeds[0]
    sequence = build_task_sequence(config)
    env = build_env(config, sequence)
    if config.benchmark in OBS_DIMS:
        obs_dim = OBS_DIMS[config.benchmark]
    else:
        obs_dim = len(env.reset(sequence[0], 0).values)
    agent_rng = np.random.default_rng(derived_seed(run_seed, _STREAM_AGENT))
    train_rng = np.random.default_rng(derived_seed(run_seed, _STREAM_TRAIN_RNG))
    learner = build_learner(config, obs_dim, env.n_actions, agent_rng)

    records = []
    eps_steps_done = 0  # global epsilon clock for non-reset step schedules
    for task_index, task in enumerate(sequence.tasks):
        if config.benchmark in ("hlr", "llr"):
            if config.agent.learner == "reinforce":
                _train_task_reinforce(env, learner, task, task_index, config,
                                      run_seed, train_rng)
            else:
                offset = 0 if config.exploration.reset_per_task else eps_steps_done
                used = _train_task_dqn_steps(env, learner, task, task_index,
                                             config, run_seed, train_rng, offset)
                eps_steps_done += used
        else:
            _train_task_dqn_episodes(env, learner, task, task_index, config,
                                     run_seed, train_rng)
        for eval_index in range(task_index + 1):
            traces = evaluate_task(env, learner, sequence[eval_index],
                                   config.training.eval_episodes, run_seed,
                                   eval_index)
            step_reward, episode_reward, accuracy = compute_metrics(traces)
            records.append(
                EvalRecord(
                    trained_upto=task_index,
                    evaluated=eval_index,
                    episodes=len(traces),
                    avg_step_reward=step_reward,
                    avg_episode_reward=episode_reward,
                    accuracy=accuracy,
                )
            )
    return EvalMatrix(records=tuple(records), run_seed=run_seed,
                      config_hash=config_hash(config))
