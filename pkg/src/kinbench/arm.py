"""Arm reaching environments: Cartesian point control and joint-space control.

Two benchmarks share the same 7-joint arm:

* **hlr** — the agent moves a point end-effector through Cartesian space
  with six axis-aligned 0.1 m translations per step, rewarded by inverse
  distance to a goal (1.0 and termination inside a 0.1 m tolerance).
  Illegal moves (leaving the workspace) leave the state unchanged and
  cost a small penalty.  No forward kinematics is needed during stepping;
  FK fixes only the start pose (arm at per-joint range midpoints).

* **llr** — the agent sets one joint per step, in fixed order, choosing
  among ``n_actions`` uniformly discretized target angles per joint.
  Episodes last exactly 7 steps; the only nonzero reward arrives at the
  final step as 1 − distance(end-effector, goal).  Goals are generated
  from random discrete action tuples, so a perfect solution always exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import (
    ARM_HLR_OBS_LEN,
    ARM_LLR_OBS_LEN,
    Env,
    Observation,
    TaskSequence,
    TaskSpec,
)
from .kinematics import (
    DEFAULT_WORKSPACE,
    KinematicChain,
    Workspace,
    default_chain,
    discretize_joint,
    forward_kinematics,
)

# Step size of every Cartesian move, meters.
HLR_STEP_SIZE = 0.1
# Goal tolerance (strict less-than), meters; also the success tolerance
# used by the accuracy metric for both arm benchmarks.
GOAL_TOLERANCE = 0.1
# Budgets: Cartesian episodes end after 30 steps; joint-space episodes
# are structurally 7 steps (one per joint).
HLR_STEP_BUDGET = 30
LLR_STEP_BUDGET = 7

# Action index -> unit direction.  Labels: forward/backward along x,
# left/right along y, up/down along z.
HLR_DIRECTIONS = np.array(
    [
        [1.0, 0.0, 0.0],  # 0: forward  (+x)
        [-1.0, 0.0, 0.0],  # 1: backward (-x)
        [0.0, 1.0, 0.0],  # 2: left     (+y)
        [0.0, -1.0, 0.0],  # 3: right    (-y)
        [0.0, 0.0, 1.0],  # 4: up       (+z)
        [0.0, 0.0, -1.0],  # 5: down     (-z)
    ]
)

# Seeds fixing the shipped default task sets.
HLR_TASK_SEED = 90210
LLR_TASK_SEED = 31415

# Task names for the 10 default Cartesian reaching goals.
HLR_TASK_NAMES = (
    "hammer",
    "push-wall",
    "faucet-close",
    "push-back",
    "stick-pull",
    "handle-press",
    "push-ball",
    "shelf-place",
    "window-close",
    "peg-unplug",
)


def start_position(chain: KinematicChain) -> np.ndarray:
    """The fixed start pose: FK of the per-joint range midpoints."""
    return forward_kinematics(chain, chain.limits.midpoints())


class HlrEnv(Env):
    """Cartesian reaching with six 0.1 m axis moves and inverse-distance reward."""

    benchmark = "hlr"
    n_actions = 6

    def __init__(
        self,
        chain: KinematicChain | None = None,
        workspace: Workspace = DEFAULT_WORKSPACE,
        illegal_penalty: float = -0.1,
        step_size: float = HLR_STEP_SIZE,
    ):
        super().__init__()
        self.chain = chain if chain is not None else default_chain()
        self.workspace = workspace
        self.illegal_penalty = float(illegal_penalty)
        self.step_size = float(step_size)
        self._start = start_position(self.chain)
        if not self.workspace.contains(self._start):
            raise ValueError("start pose lies outside the configured workspace")
        self._current = self._start.copy()
        self._goal = np.zeros(3)

    def _observe(self) -> Observation:
        return Observation(
            values=np.concatenate([self._current, self._goal]).astype(float),
            layout="arm-hlr",
        )

    def _do_reset(self, task: TaskSpec, episode_seed: int) -> Observation:
        # The start pose and goal are both fixed by the task, so resets are
        # deterministic; the seed is accepted for interface uniformity.
        self._current = self._start.copy()
        self._goal = np.asarray(task.goal, dtype=float)
        return self._observe()

    def _do_step(self, action: int):
        candidate = self._current + self.step_size * HLR_DIRECTIONS[action]
        if not self.workspace.contains(candidate):
            distance = float(np.linalg.norm(self._current - self._goal))
            info = {"distance": distance, "illegal_move": True, "success": False}
            return self._observe(), self.illegal_penalty, False, info
        self._current = candidate
        distance = float(np.linalg.norm(self._current - self._goal))
        if distance < GOAL_TOLERANCE:
            reward, terminated, success = 1.0, True, True
        else:
            reward, terminated, success = 1.0 - distance, False, False
        info = {"distance": distance, "illegal_move": False, "success": success}
        return self._observe(), reward, terminated, info


class LlrEnv(Env):
    """Joint-space reaching: one joint per step, discretized target angles."""

    benchmark = "llr"

    def __init__(self, chain: KinematicChain | None = None, n_actions: int = 5):
        super().__init__()
        if n_actions < 2:
            raise ValueError("n_actions must be at least 2")
        self.chain = chain if chain is not None else default_chain()
        self.n_actions = int(n_actions)
        self._joints = self.chain.limits.midpoints()
        self._goal = np.zeros(3)
        self._active_joint = 0
        self._current = forward_kinematics(self.chain, self._joints)

    def _observe(self) -> Observation:
        values = np.concatenate(
            [self._current, self._goal, self._joints, [float(self._active_joint)]]
        )
        assert values.shape == (ARM_LLR_OBS_LEN,)
        return Observation(values=values.astype(float), layout="arm-llr")

    def _do_reset(self, task: TaskSpec, episode_seed: int) -> Observation:
        self._joints = self.chain.limits.midpoints()
        self._current = forward_kinematics(self.chain, self._joints)
        self._goal = np.asarray(task.goal, dtype=float)
        self._active_joint = 0
        return self._observe()

    def _do_step(self, action: int):
        joint = self._active_joint
        self._joints[joint] = discretize_joint(
            self.chain.limits, joint, self.n_actions, action
        )
        self._current = forward_kinematics(self.chain, self._joints)
        self._active_joint += 1
        distance = float(np.linalg.norm(self._current - self._goal))
        if self._active_joint == 7:
            reward = 1.0 - distance
            terminated = True
            success = distance < GOAL_TOLERANCE
        else:
            reward, terminated, success = 0.0, False, False
        info = {"distance": distance, "active_joint": self._active_joint,
                "success": success}
        return self._observe(), reward, terminated, info


def llr_make_goal(
    chain: KinematicChain, n_actions: int, seed: int
) -> tuple[float, float, float]:
    """A reachable joint-space goal: FK of a random discrete action tuple.

    Because the goal is the image of some action sequence, at least one
    perfect-reward (distance 0) episode always exists.
    """
    if n_actions < 2:
        raise ValueError("n_actions must be at least 2")
    rng = np.random.default_rng(seed)
    actions = rng.integers(0, n_actions, size=7)
    joints = np.array(
        [
            discretize_joint(chain.limits, j, n_actions, int(actions[j]))
            for j in range(7)
        ]
    )
    return tuple(float(c) for c in forward_kinematics(chain, joints))


def _manhattan_paths_stay_inside(
    start: np.ndarray, offset_steps: np.ndarray, workspace: Workspace, step: float
) -> bool:
    """True if some axis-ordered move sequence from start to start+step*offset
    stays inside the workspace at every intermediate point."""
    import itertools

    for order in itertools.permutations(range(3)):
        pos = start.copy()
        ok = True
        for axis in order:
            direction = math.copysign(1.0, offset_steps[axis]) if offset_steps[axis] else 0.0
            for _ in range(abs(int(offset_steps[axis]))):
                pos = pos + step * direction * np.eye(3)[axis]
                if not workspace.contains(pos):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


def hlr_default_tasks(
    chain: KinematicChain | None = None,
    workspace: Workspace = DEFAULT_WORKSPACE,
    seed: int = HLR_TASK_SEED,
) -> TaskSequence:
    """The 10 shipped Cartesian reaching tasks.

    Goals are drawn deterministically from ``seed``: each is an exact
    multiple of 0.1 m from the start along every axis (hence exactly
    reachable by the 0.1 m moves), lies inside the workspace, and admits
    an axis-ordered move sequence that stays inside the workspace at
    every step (a certified <= 30-step solution).
    """
    chain = chain if chain is not None else default_chain()
    start = start_position(chain)
    rng = np.random.default_rng(seed)
    tasks = []
    for name in HLR_TASK_NAMES:
        while True:
            steps = rng.integers(-4, 5, size=3)  # per-axis move counts in [-4, 4]
            manhattan = int(np.abs(steps).sum())
            if not 2 <= manhattan <= 9:
                continue
            goal = start + HLR_STEP_SIZE * steps
            if not workspace.contains(goal):
                continue
            if not _manhattan_paths_stay_inside(start, steps, workspace, HLR_STEP_SIZE):
                continue
            break
        tasks.append(
            TaskSpec(
                benchmark="hlr",
                name=name,
                step_budget=HLR_STEP_BUDGET,
                goal=tuple(float(c) for c in goal),
            )
        )
    return TaskSequence(tasks=tuple(tasks), global_seed=seed)


def llr_default_tasks(
    chain: KinematicChain | None = None,
    n_actions: int = 5,
    n_tasks: int = 8,
    seed: int = LLR_TASK_SEED,
) -> TaskSequence:
    """The shipped joint-space reaching tasks (8 goals by default)."""
    chain = chain if chain is not None else default_chain()
    root = np.random.SeedSequence(seed)
    goal_seeds = root.generate_state(n_tasks)
    tasks = []
    for i in range(n_tasks):
        goal = llr_make_goal(chain, n_actions, int(goal_seeds[i]))
        tasks.append(
            TaskSpec(
                benchmark="llr",
                name=f"goal-{i + 1}",
                step_budget=LLR_STEP_BUDGET,
                goal=goal,
            )
        )
    return TaskSequence(tasks=tuple(tasks), global_seed=seed)
