"""Baseline learners: MLP + Adam, replay-buffer DQN, final-reward REINFORCE.

Everything is plain numpy so runs are bit-reproducible from seeds and the
analytic gradients can be audited against finite differences.  The value
network / policy is a fully connected net with rectifier hidden layers and
a linear output (action values for DQN, logits for REINFORCE).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CHECKPOINT_FORMAT_VERSION = 1

# Paper-protocol defaults.
DEFAULT_LR = 1e-4
DEFAULT_GAMMA = 0.8
DEFAULT_BATCH_SIZE = 32
ARM_HIDDEN = (128, 64)
WHEELED_HIDDEN = (100, 100, 100)


# ---------------------------------------------------------------------------
# MLP and optimizer
# ---------------------------------------------------------------------------

class Mlp:
    """Fully connected net; rectifier on hidden layers, linear output.

    Parameters live in ``self.params`` as [W0, b0, W1, b1, ...] with
    W of shape (fan_in, fan_out).  Initialization is fan-in-scaled
    uniform, drawn from the provided generator.
    """

    def __init__(self, sizes: list[int], rng: np.random.Generator | None = None):
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError("sizes must list at least input and output widths")
        self.sizes = [int(s) for s in sizes]
        self.params: list[np.ndarray] = []
        rng = rng if rng is not None else np.random.default_rng(0)
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.params.append(rng.uniform(-bound, bound, size=fan_out))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.sizes = list(self.sizes)
        clone.params = [p.copy() for p in self.params]
        return clone

    def forward(self, x: np.ndarray) -> np.ndarray:
        """x: (in,) or (N, in) -> action values/logits (out,) or (N, out)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        a = x[None, :] if single else x
        if a.shape[1] != self.in_dim:
            raise ValueError(f"input width {a.shape[1]} != expected {self.in_dim}")
        for layer in range(self.n_layers):
            W, b = self.params[2 * layer], self.params[2 * layer + 1]
            a = a @ W + b
            if layer < self.n_layers - 1:
                a = np.maximum(a, 0.0)
        return a[0] if single else a

    def forward_cached(self, x: np.ndarray):
        """Batch forward keeping pre/post activations for backprop."""
        a = np.asarray(x, dtype=float)
        if a.ndim != 2 or a.shape[1] != self.in_dim:
            raise ValueError("forward_cached expects a (N, in) batch")
        activations = [a]
        for layer in range(self.n_layers):
            W, b = self.params[2 * layer], self.params[2 * layer + 1]
            z = activations[-1] @ W + b
            a_out = np.maximum(z, 0.0) if layer < self.n_layers - 1 else z
            activations.append(a_out)
        return activations[-1], activations

    def backward(self, activations: list[np.ndarray],
                 d_output: np.ndarray) -> list[np.ndarray]:
        """Gradients of a scalar loss given d(loss)/d(output).

        Returns a list aligned with ``self.params``.
        """
        grads: list[np.ndarray] = [None] * len(self.params)
        delta = np.asarray(d_output, dtype=float)
        for layer in range(self.n_layers - 1, -1, -1):
            a_in = activations[layer]
            if layer < self.n_layers - 1:
                # rectifier mask from the stored post-activation
                delta = delta * (activations[layer + 1] > 0.0)
            grads[2 * layer] = a_in.T @ delta
            grads[2 * layer + 1] = delta.sum(axis=0)
            if layer > 0:
                delta = delta @ self.params[2 * layer].T
        return grads

    def flat_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        offset = 0
        for p in self.params:
            p[...] = flat[offset : offset + p.size].reshape(p.shape)
            offset += p.size
        if offset != flat.size:
            raise ValueError("flat parameter vector has the wrong length")


class Adam:
    """Adam bound to a parameter list; standard moment-decay defaults."""

    def __init__(self, params: list[np.ndarray], lr: float = DEFAULT_LR,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def update(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1 ** self.t
        bias2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m[...] = b1 * m + (1.0 - b1) * g
            v[...] = b2 * v + (1.0 - b2) * g * g
            p -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


# ---------------------------------------------------------------------------
# Replay buffer and exploration schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int):
        if capacity < 1 or obs_dim < 1:
            raise ValueError("capacity and obs_dim must be positive")
        self.capacity = int(capacity)
        self.obs = np.zeros((capacity, obs_dim))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.terminals = np.zeros(capacity, dtype=bool)
        self._size = 0
        self._head = 0

    def __len__(self) -> int:
        return self._size

    def push(self, obs, action: int, reward: float, next_obs, terminal: bool) -> None:
        i = self._head
        self.obs[i] = obs
        self.actions[i] = int(action)
        self.rewards[i] = float(reward)
        self.next_obs[i] = next_obs
        self.terminals[i] = bool(terminal)
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform sample with replacement: (obs, actions, rewards, next_obs,
        terminals) arrays."""
        if self._size < batch_size:
            raise ValueError("not enough transitions to sample a batch")
        idx = rng.integers(0, self._size, size=batch_size)
        return (self.obs[idx], self.actions[idx], self.rewards[idx],
                self.next_obs[idx], self.terminals[idx])


@dataclass(frozen=True)
class StepEpsilonSchedule:
    """Per-step linear decay: eps(n) = max(minimum, start - n * delta)."""

    start: float = 1.0
    minimum: float = 0.2
    delta: float = 0.0002

    def value(self, steps: int) -> float:
        return max(self.minimum, self.start - steps * self.delta)


@dataclass(frozen=True)
class EpisodeRampSchedule:
    """Per-episode linear ramp reaching ``minimum`` on a task's last episode;
    starts higher on the first task than on later ones."""

    start_first: float = 1.0
    start_later: float = 0.5
    minimum: float = 0.2

    def value(self, task_index: int, episode: int, episodes_in_task: int) -> float:
        start = self.start_first if task_index == 0 else self.start_later
        if episodes_in_task <= 1:
            return self.minimum
        frac = min(1.0, episode / (episodes_in_task - 1))
        return max(self.minimum, start - (start - self.minimum) * frac)


def select_action(net: Mlp, obs: np.ndarray, epsilon: float,
                  rng: np.random.Generator | None = None) -> int:
    """Epsilon-greedy on the net's action values; greedy ties go to the
    lowest index.  A generator is only needed when epsilon > 0."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon > 0.0:
        if rng is None:
            raise ValueError("epsilon > 0 requires a random generator")
        if rng.random() < epsilon:
            return int(rng.integers(net.out_dim))
    return int(np.argmax(net.forward(obs)))


# ---------------------------------------------------------------------------
# DQN
# ---------------------------------------------------------------------------

def dqn_loss(net: Mlp, obs: np.ndarray, actions: np.ndarray,
             targets: np.ndarray) -> float:
    """Mean squared TD error against fixed targets (pure; used for audits)."""
    q = net.forward(obs)
    pred = q[np.arange(len(actions)), actions]
    return float(np.mean((pred - targets) ** 2))


class DqnAgent:
    """Q-learning on a replay buffer: uniform batches, mean-squared TD loss,
    one Adam update per call.  An optional target network (periodically
    synced copy) is off by default."""

    def __init__(
        self,
        obs_dim: int,
        n_actions: int,
        hidden: tuple[int, ...] = ARM_HIDDEN,
        lr: float = DEFAULT_LR,
        gamma: float = DEFAULT_GAMMA,
        batch_size: int = DEFAULT_BATCH_SIZE,
        buffer_capacity: int = 5000,
        rng: np.random.Generator | None = None,
        target_sync: int = 0,
        adam_beta1: float = 0.9,
        adam_beta2: float = 0.999,
        adam_eps: float = 1e-8,
    ):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.net = Mlp([obs_dim, *hidden, n_actions], rng)
        self.gamma = float(gamma)
        self.batch_size = int(batch_size)
        self.buffer = ReplayBuffer(buffer_capacity, obs_dim)
        self.optimizer = Adam(self.net.params, lr=lr, beta1=adam_beta1,
                              beta2=adam_beta2, eps=adam_eps)
        self.target_sync = int(target_sync)
        self.target_net = self.net.copy() if self.target_sync > 0 else None
        self._updates = 0

    def act(self, obs, epsilon: float, rng: np.random.Generator | None = None) -> int:
        return select_action(self.net, obs, epsilon, rng)

    def observe(self, obs, action: int, reward: float, next_obs,
                terminal: bool) -> None:
        self.buffer.push(obs, action, reward, next_obs, terminal)

    def train_step(self, rng: np.random.Generator) -> float | None:
        """One gradient step on a uniform batch; None while the buffer is
        smaller than a batch (no-op)."""
        if len(self.buffer) < self.batch_size:
            return None
        obs, actions, rewards, next_obs, terminals = self.buffer.sample(
            self.batch_size, rng
        )
        bootstrap_net = self.target_net if self.target_net is not None else self.net
        next_q = bootstrap_net.forward(next_obs)
        targets = rewards + self.gamma * next_q.max(axis=1) * (~terminals)
        q, cache = self.net.forward_cached(obs)
        rows = np.arange(self.batch_size)
        pred = q[rows, actions]
        err = pred - targets
        loss = float(np.mean(err**2))
        d_out = np.zeros_like(q)
        d_out[rows, actions] = 2.0 * err / self.batch_size
        grads = self.net.backward(cache, d_out)
        self.optimizer.update(grads)
        self._updates += 1
        if self.target_net is not None and self._updates % self.target_sync == 0:
            self.target_net = self.net.copy()
        return loss


# ---------------------------------------------------------------------------
# REINFORCE (final-reward policy gradient)
# ---------------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def reinforce_loss(net: Mlp, obs: np.ndarray, actions: np.ndarray,
                   final_reward: float) -> float:
    """-R * sum_t log pi(a_t | s_t) (pure; used for audits)."""
    logits = net.forward(obs)
    probs = softmax(logits)
    logp = np.log(probs[np.arange(len(actions)), actions])
    return float(-final_reward * logp.sum())


class ReinforceAgent:
    """Softmax policy updated once per episode, every step's log-probability
    gradient scaled by the single final reward (undiscounted; intermediate
    rewards are zero by construction in the joint-space benchmark)."""

    def __init__(
        self,
        obs_dim: int,
        n_actions: int,
        episode_len: int,
        hidden: tuple[int, ...] = ARM_HIDDEN,
        lr: float = DEFAULT_LR,
        rng: np.random.Generator | None = None,
        adam_beta1: float = 0.9,
        adam_beta2: float = 0.999,
        adam_eps: float = 1e-8,
    ):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.net = Mlp([obs_dim, *hidden, n_actions], rng)
        self.episode_len = int(episode_len)
        self.optimizer = Adam(self.net.params, lr=lr, beta1=adam_beta1,
                              beta2=adam_beta2, eps=adam_eps)

    def act(self, obs, rng: np.random.Generator | None = None,
            greedy: bool = False) -> int:
        logits = self.net.forward(obs)
        if greedy:
            return int(np.argmax(logits))
        if rng is None:
            raise ValueError("sampling actions requires a random generator")
        probs = softmax(logits)
        return int(rng.choice(len(probs), p=probs))

    def update(self, observations: list[np.ndarray], actions: list[int],
               final_reward: float) -> None:
        """One policy-gradient step for a complete episode.

        A zero final reward scales every gradient to zero; the update is
        skipped entirely so parameters (and optimizer moments) are
        guaranteed bit-identical.
        """
        if len(observations) != self.episode_len or len(actions) != self.episode_len:
            raise ValueError(
                f"trajectory must have exactly {self.episode_len} steps, got "
                f"{len(observations)} observations / {len(actions)} actions"
            )
        if final_reward == 0.0:
            return
        X = np.stack([np.asarray(o, dtype=float) for o in observations])
        acts = np.asarray(actions, dtype=np.int64)
        logits, cache = self.net.forward_cached(X)
        probs = softmax(logits)
        d_logits = probs.copy()
        d_logits[np.arange(self.episode_len), acts] -= 1.0
        d_logits *= final_reward  # d(-R * sum log pi)/d logits = R*(pi - onehot)
        grads = self.net.backward(cache, d_logits)
        self.optimizer.update(grads)


# ---------------------------------------------------------------------------
# Checkpoints and parameter hashing
# ---------------------------------------------------------------------------

def save_checkpoint(net: Mlp, path: str | Path) -> None:
    """Versioned binary dump of layer sizes and parameter arrays."""
    arrays = {f"param_{i}": p for i, p in enumerate(net.params)}
    np.savez(
        path,
        format_version=np.array(CHECKPOINT_FORMAT_VERSION),
        sizes=np.array(net.sizes, dtype=np.int64),
        **arrays,
    )


def load_checkpoint(path: str | Path) -> Mlp:
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != CHECKPOINT_FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format version {version}")
        sizes = [int(s) for s in data["sizes"]]
        net = Mlp.__new__(Mlp)
        net.sizes = sizes
        net.params = [
            data[f"param_{i}"].astype(float) for i in range(2 * (len(sizes) - 1))
        ]
    expected = Mlp(sizes)  # shape audit against the declared sizes
    for have, want in zip(net.params, expected.params):
        if have.shape != want.shape:
            raise ValueError("checkpoint arrays do not match declared sizes")
    return net


def param_hash(net: Mlp) -> str:
    """Stable content hash of the parameter vector (audit aid)."""
    digest = hashlib.sha256()
    digest.update(np.array(net.sizes, dtype=np.int64).tobytes())
    for p in net.params:
        digest.update(np.ascontiguousarray(p).tobytes())
    return digest.hexdigest()
