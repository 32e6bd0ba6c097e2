"""Serial-link forward kinematics for the 7-joint reaching arm.

The arm is described by one modified-DH row per joint, four reals each
(a, d, alpha, theta_offset), plus per-joint angle limits.  The default
chain is the publicly documented Franka Emika Panda geometry with the
flange offset folded into the last row's d, so the end-effector point
lies on the last joint's rotation axis.  Positions are expressed in the
base frame fixed at the arm mount (z up).

All functions here are pure and all types immutable after construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

N_JOINTS = 7

DEFAULT_CHAIN_RESOURCE = "panda_chain.yaml"


def as_joint_angles(values) -> np.ndarray:
    """Validate and convert to a length-7 float array of radians."""
    q = np.asarray(values, dtype=float)
    if q.shape != (N_JOINTS,):
        raise ValueError(f"expected {N_JOINTS} joint angles, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("joint angles must be finite")
    return q


@dataclass(frozen=True)
class JointLimits:
    """Per-joint angle range, radians. minimum[j] < maximum[j] for all j."""

    minimum: tuple[float, ...]
    maximum: tuple[float, ...]

    def __post_init__(self):
        if len(self.minimum) != N_JOINTS or len(self.maximum) != N_JOINTS:
            raise ValueError("joint limits need exactly 7 entries per bound")
        for j, (lo, hi) in enumerate(zip(self.minimum, self.maximum)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"joint {j}: limits must be finite")
            if not lo < hi:
                raise ValueError(f"joint {j}: minimum {lo} must be < maximum {hi}")

    def midpoints(self) -> np.ndarray:
        return (np.array(self.minimum) + np.array(self.maximum)) / 2.0

    def clamp(self, q) -> np.ndarray:
        return np.clip(as_joint_angles(q), self.minimum, self.maximum)

    def contains(self, q) -> bool:
        q = as_joint_angles(q)
        return bool(np.all(q >= self.minimum) and np.all(q <= self.maximum))


@dataclass(frozen=True)
class KinematicChain:
    """7-row modified-DH description: a (m), d (m), alpha (rad), theta_offset (rad)."""

    a: tuple[float, ...]
    d: tuple[float, ...]
    alpha: tuple[float, ...]
    theta_offset: tuple[float, ...]
    limits: JointLimits

    def __post_init__(self):
        for name in ("a", "d", "alpha", "theta_offset"):
            row = getattr(self, name)
            if len(row) != N_JOINTS:
                raise ValueError(f"chain parameter '{name}' needs exactly 7 values")
            if not all(math.isfinite(v) for v in row):
                raise ValueError(f"chain parameter '{name}' must be finite")

    def max_reach(self) -> float:
        """Upper bound on the end-effector distance from the base (triangle inequality)."""
        return float(sum(abs(a) + abs(d) for a, d in zip(self.a, self.d)))


def load_chain(path: str | Path) -> KinematicChain:
    """Read a chain config file.

    Format: a YAML document with a top-level ``joints`` list of exactly 7
    mappings, each with keys a, d, alpha, theta_offset, min, max.
    """
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return _chain_from_doc(doc, source=str(path))


def _chain_from_doc(doc, source: str) -> KinematicChain:
    if not isinstance(doc, dict) or "joints" not in doc:
        raise ValueError(f"{source}: chain file needs a top-level 'joints' list")
    rows = doc["joints"]
    if not isinstance(rows, list) or len(rows) != N_JOINTS:
        raise ValueError(f"{source}: chain file needs exactly {N_JOINTS} joint rows")
    required = {"a", "d", "alpha", "theta_offset", "min", "max"}
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or set(row) != required:
            raise ValueError(
                f"{source}: joint row {i} must have exactly the keys {sorted(required)}"
            )
    return KinematicChain(
        a=tuple(float(r["a"]) for r in rows),
        d=tuple(float(r["d"]) for r in rows),
        alpha=tuple(float(r["alpha"]) for r in rows),
        theta_offset=tuple(float(r["theta_offset"]) for r in rows),
        limits=JointLimits(
            minimum=tuple(float(r["min"]) for r in rows),
            maximum=tuple(float(r["max"]) for r in rows),
        ),
    )


def default_chain() -> KinematicChain:
    """The Panda-style chain shipped with the package."""
    text = resources.files("kinbench.data").joinpath(DEFAULT_CHAIN_RESOURCE).read_text()
    return _chain_from_doc(yaml.safe_load(text), source=DEFAULT_CHAIN_RESOURCE)


def _dh_transform(a: float, d: float, alpha: float, theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array(
        [
            [ct, -st, 0.0, a],
            [st * ca, ct * ca, -sa, -d * sa],
            [st * sa, ct * sa, ca, d * ca],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def forward_kinematics(chain: KinematicChain, q) -> np.ndarray:
    """End-effector position for joint angles q (radians), base frame, meters.

    Joint limits are not enforced here; callers clamp if they need to.
    """
    q = as_joint_angles(q)
    T = np.eye(4)
    for j in range(N_JOINTS):
        T = T @ _dh_transform(
            chain.a[j], chain.d[j], chain.alpha[j], q[j] + chain.theta_offset[j]
        )
    return T[:3, 3].copy()


def discretize_joint(limits: JointLimits, joint: int, n_actions: int, k: int) -> float:
    """k-th of n_actions target angles spread uniformly over the joint's range.

    Endpoints are returned exactly (k=0 -> minimum, k=n_actions-1 -> maximum).
    """
    if not 0 <= joint < N_JOINTS:
        raise ValueError(f"joint index {joint} out of range")
    if n_actions < 2:
        raise ValueError("n_actions must be at least 2")
    if not 0 <= k < n_actions:
        raise ValueError(f"action index {k} out of range for {n_actions} actions")
    lo = limits.minimum[joint]
    hi = limits.maximum[joint]
    if k == 0:
        return lo
    if k == n_actions - 1:
        return hi
    return lo + k * (hi - lo) / (n_actions - 1)


@dataclass(frozen=True)
class Workspace:
    """Reachable region: sphere about the shoulder point, above the ground plane.

    The sphere is centered at the top of the base column rather than the
    mount point; a mount-centered 0.855 m sphere would exclude the arm's
    own rest pose.
    """

    center: tuple[float, float, float] = (0.0, 0.0, 0.333)
    radius: float = 0.855
    z_min: float = 0.0

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError("position must be 3 finite reals")
        if p[2] < self.z_min:
            return False
        return bool(np.linalg.norm(p - np.array(self.center)) <= self.radius)


DEFAULT_WORKSPACE = Workspace()


def workspace_contains(p, workspace: Workspace = DEFAULT_WORKSPACE) -> bool:
    return workspace.contains(p)
