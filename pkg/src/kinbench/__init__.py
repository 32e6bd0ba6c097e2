"""kinbench: kinematics-only continual-RL benchmark suite.

Four deterministic, physics-free environments (Cartesian and joint-space
arm reaching; differential-drive line following and object pushing),
numpy baseline learners (replay-buffer DQN, final-reward REINFORCE), and
a sequential-training harness that records lower-triangular evaluation
matrices for studying catastrophic forgetting.
"""

__version__ = "0.1.0"

from .agents import (
    Adam,
    DqnAgent,
    EpisodeRampSchedule,
    Mlp,
    ReinforceAgent,
    ReplayBuffer,
    StepEpsilonSchedule,
    Transition,
    load_checkpoint,
    param_hash,
    save_checkpoint,
    select_action,
)
from .arm import (
    HlrEnv,
    LlrEnv,
    hlr_default_tasks,
    llr_default_tasks,
    llr_make_goal,
    start_position,
)
from .config import RunConfig, config_from_dict, config_hash, load_config
from .env import (
    Env,
    Observation,
    StepResult,
    TaskSequence,
    TaskSpec,
    load_task_sequence,
    save_task_sequence,
)
from .harness import (
    EvalMatrix,
    EvalRecord,
    aggregate_runs,
    compute_metrics,
    evaluate_task,
    run_sequence,
)
from .kinematics import (
    DEFAULT_WORKSPACE,
    N_JOINTS,
    JointLimits,
    KinematicChain,
    Workspace,
    default_chain,
    discretize_joint,
    forward_kinematics,
    load_chain,
    workspace_contains,
)
from .wheeled import (
    DiffDriveParams,
    MlfEnv,
    MlfTrack,
    MpoEnv,
    MpoTrack,
    WheeledPose,
    diff_drive_step,
    enumerate_tracks,
    make_task_window,
    mlf_default_tasks,
    mpo_default_tasks,
)

__all__ = [
    "Adam",
    "DiffDriveParams",
    "DqnAgent",
    "Env",
    "EpisodeRampSchedule",
    "EvalMatrix",
    "EvalRecord",
    "HlrEnv",
    "JointLimits",
    "KinematicChain",
    "LlrEnv",
    "MlfEnv",
    "MlfTrack",
    "Mlp",
    "MpoEnv",
    "MpoTrack",
    "Observation",
    "ReinforceAgent",
    "ReplayBuffer",
    "RunConfig",
    "StepEpsilonSchedule",
    "StepResult",
    "TaskSequence",
    "TaskSpec",
    "Transition",
    "WheeledPose",
    "DEFAULT_WORKSPACE",
    "N_JOINTS",
    "Workspace",
    "aggregate_runs",
    "compute_metrics",
    "config_from_dict",
    "config_hash",
    "default_chain",
    "diff_drive_step",
    "discretize_joint",
    "enumerate_tracks",
    "evaluate_task",
    "forward_kinematics",
    "hlr_default_tasks",
    "llr_default_tasks",
    "llr_make_goal",
    "load_checkpoint",
    "load_chain",
    "load_config",
    "load_task_sequence",
    "make_task_window",
    "mlf_default_tasks",
    "mpo_default_tasks",
    "param_hash",
    "run_sequence",
    "save_checkpoint",
    "save_task_sequence",
    "select_action",
    "start_position",
    "workspace_contains",
]
