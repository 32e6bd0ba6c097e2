"""Differential-drive benchmarks: line following and object pushing.

Both run a small two-wheeled robot (wheel separation 0.10 m) in closed
form — poses advance along exact circular arcs, no physics engine.

* **mlf** (line following) — 150 tracks, each a lane of three colored
  lines along +x, 0.75 m long.  The robot is rewarded for keeping the
  middle line's left edge centered in a virtual 100-pixel line camera
  and for flashing the track's required LED color, which differs between
  the first and second half of the track.  Losing the edge from the
  image ends the episode with a −1 line penalty.

* **mpo** (object pushing) — 150 tracks defined by an object's shape,
  color, and symbol.  The robot spawns 0.45 m from the object with a
  random ±18° heading offset and is rewarded for driving toward it
  (scaled down 10× while stopped); touching the object ends the episode
  at +10 if the track is pushable (even id) and −10 otherwise.  Letting
  the object drift more than 25° off the heading ends the episode at −1.

Settings: ``ss`` exposes steering (and LED choice for mlf) to the
learner; ``sss`` delegates steering to a hard-coded heading controller
so only the LED (mlf) or stop/go (mpo) choice is learned.  Observations
are population-coded binary rasters in both settings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import Env, Observation, TaskSequence, TaskSpec

# Default seed fixing LED color assignments (and hence the shipped tasks).
DEFAULT_GLOBAL_SEED = 1729

N_COLORS = 6  # mlf line colors
N_LEDS = 6
MLF_TRACK_COUNT = 150
MPO_TRACK_COUNT = 150

MLF_TRACK_LENGTH = 0.75  # meters
MLF_IMAGE_WIDTH = 100  # pixels
MLF_FIELD_OF_VIEW = 0.10  # meters imaged by the full pixel row
MLF_SPAWN_JITTER = 0.02  # +/- lateral spawn offset, meters
MLF_STEP_BUDGET = 30

MPO_SPAWN_DISTANCE = 0.45  # meters
MPO_HEADING_RANGE_DEG = 18.0  # +/- spawn heading offset
MPO_LOSE_SIGHT_DEG = 25.0  # reward zero-crossing bearing
MPO_CONTACT_RADIUS = 0.06  # bumper 0.01 m + object bounding radius 0.05 m
MPO_STEP_BUDGET = 30

WHEELED_EPISODES_PER_TASK = 100
TASK_WINDOW = 4


# ---------------------------------------------------------------------------
# Differential-drive pose integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WheeledPose:
    x: float
    y: float
    heading: float  # radians, wrapped to (-pi, pi]


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class DiffDriveParams:
    wheel_separation: float = 0.10  # meters
    step_duration: float = 0.1  # seconds per control step

    def __post_init__(self):
        if self.wheel_separation <= 0 or self.step_duration <= 0:
            raise ValueError("differential-drive parameters must be positive")


DEFAULT_DRIVE = DiffDriveParams()

# steer index 0/1/2 = straight/left/right; mpo adds 3 = stop.
MLF_WHEEL_SPEEDS = ((0.2, 0.2), (0.15, 0.25), (0.25, 0.15))
MPO_WHEEL_SPEEDS = ((0.4, 0.4), (0.3, 0.5), (0.5, 0.3), (0.0, 0.0))
MPO_STOP_ACTION = 3


def diff_drive_step(
    pose: WheeledPose, v_left: float, v_right: float,
    params: DiffDriveParams = DEFAULT_DRIVE,
) -> WheeledPose:
    """Advance one control step along the exact arc for constant wheel speeds."""
    v = 0.5 * (v_left + v_right)
    omega = (v_right - v_left) / params.wheel_separation
    dt = params.step_duration
    theta = pose.heading
    if omega == 0.0:
        return WheeledPose(
            x=pose.x + v * dt * math.cos(theta),
            y=pose.y + v * dt * math.sin(theta),
            heading=theta,
        )
    radius = v / omega
    theta_new = theta + omega * dt
    return WheeledPose(
        x=pose.x + radius * (math.sin(theta_new) - math.sin(theta)),
        y=pose.y + radius * (math.cos(theta) - math.cos(theta_new)),
        heading=wrap_angle(theta_new),
    )


# ---------------------------------------------------------------------------
# Track enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MlfTrack:
    """A 3-line lane: left/middle/right colors plus per-half LED targets."""

    l: int
    m: int
    r: int
    led_first: int
    led_second: int
    track_id: int

    def __post_init__(self):
        if self.m == self.l or self.m == self.r:
            raise ValueError("adjacent lines must differ in color")
        if self.track_id != 36 * self.l + 6 * self.m + self.r:
            raise ValueError("track_id inconsistent with colors")


@dataclass(frozen=True)
class MpoTrack:
    """An object-approach scenario: shape, color, symbol; pushable iff even id."""

    shape: int  # 0..4
    color: int  # 0..4
    symbol: int  # 0..5
    track_id: int
    pushable: bool

    def __post_init__(self):
        if self.track_id != 30 * self.shape + 6 * self.color + self.symbol:
            raise ValueError("track_id inconsistent with attributes")
        if self.pushable != (self.track_id % 2 == 0):
            raise ValueError("pushable flag must equal evenness of track_id")


def mlf_track_id(l: int, m: int, r: int) -> int:
    return 36 * l + 6 * m + r


def mlf_decode_track_id(track_id: int) -> tuple[int, int, int]:
    """Inverse of mlf_track_id on the valid (adjacent colors differ) set."""
    l, rem = divmod(track_id, 36)
    m, r = divmod(rem, 6)
    if not (0 <= l < 6 and 0 <= m < 6 and 0 <= r < 6):
        raise ValueError(f"track id {track_id} out of range")
    if m == l or m == r:
        raise ValueError(f"track id {track_id} encodes an invalid color triple")
    return l, m, r


def mpo_track_id(shape: int, color: int, symbol: int) -> int:
    return 30 * shape + 6 * color + symbol


def mpo_decode_track_id(track_id: int) -> tuple[int, int, int]:
    shape, rem = divmod(track_id, 30)
    color, symbol = divmod(rem, 6)
    if not (0 <= shape < 5 and 0 <= color < 5 and 0 <= symbol < 6):
        raise ValueError(f"track id {track_id} out of range")
    return shape, color, symbol


def _led_pair(global_seed: int, track_id: int) -> tuple[int, int]:
    """LED targets for both track halves: a pure function of (seed, id)."""
    rng = np.random.default_rng([int(global_seed), int(track_id)])
    first, second = rng.integers(0, N_LEDS, size=2)
    return int(first), int(second)


def enumerate_tracks(benchmark: str, global_seed: int = DEFAULT_GLOBAL_SEED) -> list:
    """All tracks of a wheeled benchmark, sorted by track id.

    mlf: every (l, m, r) color triple with m != l and m != r (150 total),
    LED targets drawn per track from ``global_seed``.  mpo: every
    (shape, color, symbol) combination (150 total).
    """
    if benchmark == "mlf":
        tracks = []
        for l in range(N_COLORS):
            for m in range(N_COLORS):
                if m == l:
                    continue
                for r in range(N_COLORS):
                    if m == r:
                        continue
                    tid = mlf_track_id(l, m, r)
                    led_first, led_second = _led_pair(global_seed, tid)
                    tracks.append(
                        MlfTrack(l=l, m=m, r=r, led_first=led_first,
                                 led_second=led_second, track_id=tid)
                    )
        return tracks
    if benchmark == "mpo":
        return [
            MpoTrack(shape=o, color=c, symbol=s, track_id=mpo_track_id(o, c, s),
                     pushable=(mpo_track_id(o, c, s) % 2 == 0))
            for o in range(5)
            for c in range(5)
            for s in range(6)
        ]
    raise ValueError(f"unknown wheeled benchmark {benchmark!r}")


def make_task_window(
    tracks: list,
    task_index: int,
    window: int = TASK_WINDOW,
    *,
    setting: str = "ss",
    episodes: int = WHEELED_EPISODES_PER_TASK,
    step_budget: int | None = None,
) -> TaskSpec:
    """Task holding the ``window`` consecutive tracks starting at ``task_index``.

    Indices refer to positions in the sorted track list (task 0 holds the
    first four tracks, task 1 the next overlapping four, and so on).
    """
    if task_index < 0 or task_index + window > len(tracks):
        raise ValueError(
            f"task index {task_index} with window {window} exceeds "
            f"{len(tracks)} tracks"
        )
    benchmark = "mlf" if isinstance(tracks[task_index], MlfTrack) else "mpo"
    if step_budget is None:
        step_budget = MLF_STEP_BUDGET if benchmark == "mlf" else MPO_STEP_BUDGET
    return TaskSpec(
        benchmark=benchmark,
        name=f"{benchmark}-task-{task_index}",
        step_budget=step_budget,
        tracks=tuple(t.track_id for t in tracks[task_index : task_index + window]),
        episodes=episodes,
        setting=setting,
    )


def mlf_default_tasks(
    setting: str = "ss",
    n_tasks: int | None = None,
    window: int = TASK_WINDOW,
    episodes: int = WHEELED_EPISODES_PER_TASK,
    global_seed: int = DEFAULT_GLOBAL_SEED,
) -> TaskSequence:
    tracks = enumerate_tracks("mlf", global_seed)
    if n_tasks is None:
        n_tasks = len(tracks) - window + 1
    tasks = tuple(
        make_task_window(tracks, i, window, setting=setting, episodes=episodes)
        for i in range(n_tasks)
    )
    return TaskSequence(tasks=tasks, global_seed=global_seed)


def mpo_default_tasks(
    setting: str = "ss",
    n_tasks: int | None = None,
    window: int = TASK_WINDOW,
    episodes: int = WHEELED_EPISODES_PER_TASK,
    global_seed: int = DEFAULT_GLOBAL_SEED,
) -> TaskSequence:
    tracks = enumerate_tracks("mpo", global_seed)
    if n_tasks is None:
        n_tasks = len(tracks) - window + 1
    tasks = tuple(
        make_task_window(tracks, i, window, setting=setting, episodes=episodes)
        for i in range(n_tasks)
    )
    return TaskSequence(tasks=tasks, global_seed=global_seed)


# ---------------------------------------------------------------------------
# Population-coded observations
# ---------------------------------------------------------------------------

MLF_CODE_WIDTH = 18  # = three 6-wide attribute groups; scalar rows match it
MPO_CODE_WIDTH = 16  # = 5 + 5 + 6 attribute groups; scalar rows match it

MLF_CODE_GROUPS = ((0, 6), (6, 6), (12, 6), (18, 18), (36, 18))
MPO_CODE_GROUPS = ((0, 5), (5, 5), (10, 6), (16, 16), (32, 16))


def scalar_bin(value: float, scale: float, width: int) -> int:
    """Map value in [0, scale] to a hot-pixel index in [0, width-1], clamped."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    idx = round((value / scale) * (width - 1))
    return int(min(max(idx, 0), width - 1))


def encode_mlf_observation(track: MlfTrack, wall_distance: float,
                           edge_pixel: float) -> Observation:
    """Three 18-wide rows: line colors; wall distance (scale 0.75 m);
    edge pixel (scale 100 px)."""
    values = np.zeros(3 * MLF_CODE_WIDTH)
    values[track.l] = 1.0
    values[6 + track.m] = 1.0
    values[12 + track.r] = 1.0
    values[18 + scalar_bin(wall_distance, MLF_TRACK_LENGTH, MLF_CODE_WIDTH)] = 1.0
    values[36 + scalar_bin(edge_pixel, MLF_IMAGE_WIDTH, MLF_CODE_WIDTH)] = 1.0
    return Observation(values=values, layout="wheeled-pop-code",
                       groups=MLF_CODE_GROUPS)


def encode_mpo_observation(track: MpoTrack, distance: float,
                           bearing_deg: float) -> Observation:
    """Three 16-wide rows: color/shape/symbol; distance (scale 0.45 m);
    bearing mapped from [-25, +25] degrees."""
    values = np.zeros(3 * MPO_CODE_WIDTH)
    values[track.color] = 1.0
    values[5 + track.shape] = 1.0
    values[10 + track.symbol] = 1.0
    values[16 + scalar_bin(distance, MPO_SPAWN_DISTANCE, MPO_CODE_WIDTH)] = 1.0
    values[32 + scalar_bin(bearing_deg + MPO_LOSE_SIGHT_DEG,
                           2 * MPO_LOSE_SIGHT_DEG, MPO_CODE_WIDTH)] = 1.0
    return Observation(values=values, layout="wheeled-pop-code",
                       groups=MPO_CODE_GROUPS)


# ---------------------------------------------------------------------------
# Rewards and heading controllers
# ---------------------------------------------------------------------------

def mlf_edge_pixel(lateral_offset: float) -> float:
    """Pixel coordinate of the middle line's left edge in the line camera.

    The edge sits at lateral coordinate 0; a robot at signed offset y sees
    it at W/2 - y * (W / field_of_view).
    """
    return MLF_IMAGE_WIDTH / 2 - lateral_offset * (MLF_IMAGE_WIDTH / MLF_FIELD_OF_VIEW)


def mlf_reward(pose: WheeledPose, track: MlfTrack,
               led: int) -> tuple[float, bool, float]:
    """(reward, terminated, edge_pixel) after a move.

    reward = line term + LED term: the line term is 1 - |d - W/2| / (W/2),
    flipping to -1 with termination when the edge leaves [0, W]; the LED
    term is +1 when ``led`` matches the track's target for the current
    half of the track (split at half length), else -1.
    """
    half = MLF_TRACK_LENGTH / 2
    required = track.led_first if pose.x < half else track.led_second
    r_led = 1.0 if led == required else -1.0
    d = mlf_edge_pixel(pose.y)
    if d < 0.0 or d > MLF_IMAGE_WIDTH:
        return -1.0 + r_led, True, d
    r_lf = 1.0 - abs(d - MLF_IMAGE_WIDTH / 2) / (MLF_IMAGE_WIDTH / 2)
    return r_lf + r_led, False, d


def mpo_bearing_deg(pose: WheeledPose, object_xy: tuple[float, float]) -> float:
    """Bearing from robot heading to the object, degrees in (-180, 180]."""
    angle = math.atan2(object_xy[1] - pose.y, object_xy[0] - pose.x)
    return math.degrees(wrap_angle(angle - pose.heading))


def mpo_reward(distance: float, bearing_deg: float, stopped: bool,
               pushable: bool, contact_radius: float = MPO_CONTACT_RADIUS,
               ) -> tuple[float, bool, bool]:
    """(reward, terminated, touched) after a move.

    Approach term (1 - |bearing/25|) * speed factor, with the factor 0.1
    while stopped and 1 otherwise.  A negative approach term means the
    object left the field of view: reward -1, episode over.  Contact
    within ``contact_radius`` adds +10 (pushable track) or -10, episode
    over.
    """
    r_s = 0.1 if stopped else 1.0
    r_a = (1.0 - abs(bearing_deg / MPO_LOSE_SIGHT_DEG)) * r_s
    if r_a < 0.0:
        return -1.0, True, False
    if distance <= contact_radius:
        return r_a + (10.0 if pushable else -10.0), True, True
    return r_a, False, False


def mlf_heading_controller(edge_pixel: float, threshold: float = 5.0) -> int:
    """Steer toward the image center: 0 straight, 1 left, 2 right."""
    offset = edge_pixel - MLF_IMAGE_WIDTH / 2
    if abs(offset) < threshold:
        return 0
    return 1 if offset > 0 else 2


def mpo_heading_controller(bearing_deg: float, threshold: float = 5.0) -> int:
    """Steer toward the object: 0 straight, 1 left, 2 right."""
    if abs(bearing_deg) < threshold:
        return 0
    return 1 if bearing_deg > 0 else 2


# ---------------------------------------------------------------------------
# Environments
# ---------------------------------------------------------------------------

class MlfEnv(Env):
    """Line following.  ss: 18 actions = steer (3) x LED (6), encoded
    steer * 6 + led.  sss: 6 actions = LED only, steering delegated to
    the heading controller."""

    benchmark = "mlf"

    def __init__(
        self,
        setting: str = "ss",
        global_seed: int = DEFAULT_GLOBAL_SEED,
        drive: DiffDriveParams = DEFAULT_DRIVE,
        spawn_jitter: float = MLF_SPAWN_JITTER,
        controller_threshold: float = 5.0,
    ):
        super().__init__()
        if setting not in ("ss", "sss"):
            raise ValueError(f"unknown setting {setting!r}")
        self.setting = setting
        self.n_actions = 18 if setting == "ss" else 6
        self.drive = drive
        self.spawn_jitter = float(spawn_jitter)
        self.controller_threshold = float(controller_threshold)
        self._tracks = {t.track_id: t for t in enumerate_tracks("mlf", global_seed)}
        self._track: MlfTrack | None = None
        self._pose = WheeledPose(0.0, 0.0, 0.0)

    def _observe(self) -> Observation:
        wall_distance = max(0.0, MLF_TRACK_LENGTH - self._pose.x)
        return encode_mlf_observation(
            self._track, wall_distance, mlf_edge_pixel(self._pose.y)
        )

    def _do_reset(self, task: TaskSpec, episode_seed: int) -> Observation:
        if task.setting != self.setting:
            raise ValueError(
                f"task setting {task.setting!r} does not match env {self.setting!r}"
            )
        rng = np.random.default_rng(episode_seed)
        track_id = task.tracks[int(rng.integers(len(task.tracks)))]
        try:
            self._track = self._tracks[track_id]
        except KeyError:
            raise ValueError(f"unknown mlf track id {track_id}") from None
        y0 = float(rng.uniform(-self.spawn_jitter, self.spawn_jitter))
        self._pose = WheeledPose(0.0, y0, 0.0)
        return self._observe()

    def _do_step(self, action: int):
        if self.setting == "ss":
            steer, led = divmod(action, 6)
        else:
            led = action
            steer = mlf_heading_controller(
                mlf_edge_pixel(self._pose.y), self.controller_threshold
            )
        v_left, v_right = MLF_WHEEL_SPEEDS[steer]
        self._pose = diff_drive_step(self._pose, v_left, v_right, self.drive)
        reward, terminated, edge = mlf_reward(self._pose, self._track, led)
        info = {
            "track_id": self._track.track_id,
            "edge_pixel": edge,
            "pose": (self._pose.x, self._pose.y, self._pose.heading),
            "line_lost": terminated,
            # survival for the full budget counts as success
            "success": (not terminated) and self._steps_taken >= self.task.step_budget,
        }
        return self._observe(), reward, terminated, info


class MpoEnv(Env):
    """Object pushing.  ss: 4 actions = straight/left/right/stop.
    sss: 2 actions = stop (0) / go (1), steering delegated to the
    heading controller."""

    benchmark = "mpo"

    def __init__(
        self,
        setting: str = "ss",
        global_seed: int = DEFAULT_GLOBAL_SEED,
        drive: DiffDriveParams = DEFAULT_DRIVE,
        spawn_distance: float = MPO_SPAWN_DISTANCE,
        heading_range_deg: float = MPO_HEADING_RANGE_DEG,
        contact_radius: float = MPO_CONTACT_RADIUS,
        controller_threshold_deg: float = 5.0,
    ):
        super().__init__()
        if setting not in ("ss", "sss"):
            raise ValueError(f"unknown setting {setting!r}")
        self.setting = setting
        self.n_actions = 4 if setting == "ss" else 2
        self.drive = drive
        self.spawn_distance = float(spawn_distance)
        self.heading_range_deg = float(heading_range_deg)
        self.contact_radius = float(contact_radius)
        self.controller_threshold_deg = float(controller_threshold_deg)
        self._tracks = {t.track_id: t for t in enumerate_tracks("mpo", global_seed)}
        self._track: MpoTrack | None = None
        self._pose = WheeledPose(0.0, 0.0, 0.0)
        self._object_xy = (self.spawn_distance, 0.0)

    def _distance(self) -> float:
        return math.hypot(
            self._object_xy[0] - self._pose.x, self._object_xy[1] - self._pose.y
        )

    def _observe(self) -> Observation:
        return encode_mpo_observation(
            self._track, self._distance(), mpo_bearing_deg(self._pose, self._object_xy)
        )

    def _do_reset(self, task: TaskSpec, episode_seed: int) -> Observation:
        if task.setting != self.setting:
            raise ValueError(
                f"task setting {task.setting!r} does not match env {self.setting!r}"
            )
        rng = np.random.default_rng(episode_seed)
        track_id = task.tracks[int(rng.integers(len(task.tracks)))]
        try:
            self._track = self._tracks[track_id]
        except KeyError:
            raise ValueError(f"unknown mpo track id {track_id}") from None
        offset = float(rng.uniform(-self.heading_range_deg, self.heading_range_deg))
        self._pose = WheeledPose(0.0, 0.0, math.radians(offset))
        self._object_xy = (self.spawn_distance, 0.0)
        return self._observe()

    def _do_step(self, action: int):
        if self.setting == "ss":
            drive_action = action
        else:
            if action == 0:
                drive_action = MPO_STOP_ACTION
            else:
                drive_action = mpo_heading_controller(
                    mpo_bearing_deg(self._pose, self._object_xy),
                    self.controller_threshold_deg,
                )
        v_left, v_right = MPO_WHEEL_SPEEDS[drive_action]
        self._pose = diff_drive_step(self._pose, v_left, v_right, self.drive)
        distance = self._distance()
        bearing = mpo_bearing_deg(self._pose, self._object_xy)
        reward, terminated, touched = mpo_reward(
            distance, bearing, stopped=(drive_action == MPO_STOP_ACTION),
            pushable=self._track.pushable, contact_radius=self.contact_radius,
        )
        lost_sight = terminated and not touched
        if self._track.pushable:
            success = touched
        else:
            # keeping clear of a non-pushable object for the whole budget
            success = (not terminated) and self._steps_taken >= self.task.step_budget
        info = {
            "track_id": self._track.track_id,
            "distance": distance,
            "bearing_deg": bearing,
            "touched": touched,
            "lost_sight": lost_sight,
            "pushable": self._track.pushable,
            "success": success,
        }
        return self._observe(), reward, terminated, info
