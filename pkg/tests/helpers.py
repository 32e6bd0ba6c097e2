"""Shared oracle helpers for the test suite (no package logic reused)."""

import numpy as np


def finite_difference_gradient(flat_loss, flat0, h=1e-6):
    """Central finite differences of a scalar function of a flat vector."""
    grad = np.zeros_like(flat0)
    for i in range(flat0.size):
        up = flat0.copy()
        up[i] += h
        down = flat0.copy()
        down[i] -= h
        grad[i] = (flat_loss(up) - flat_loss(down)) / (2.0 * h)
    return grad


def relative_error(a, b):
    """max_i |a - b| / max(1, |a|, |b|), a scale-aware gradient distance."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


def dqn_analytic_gradient(net, obs, actions, targets):
    """Gradient of the mean-squared TD loss w.r.t. the flat parameters."""
    q, cache = net.forward_cached(obs)
    rows = np.arange(len(actions))
    err = q[rows, actions] - targets
    d_out = np.zeros_like(q)
    d_out[rows, actions] = 2.0 * err / len(actions)
    grads = net.backward(cache, d_out)
    return np.concatenate([g.ravel() for g in grads])


def reinforce_analytic_gradient(net, obs, actions, final_reward):
    """Gradient of -R * sum_t log pi(a_t|s_t) w.r.t. the flat parameters."""
    logits, cache = net.forward_cached(obs)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    d_logits = probs.copy()
    d_logits[np.arange(len(actions)), actions] -= 1.0
    d_logits *= final_reward
    grads = net.backward(cache, d_logits)
    return np.concatenate([g.ravel() for g in grads])


# Criterion verdict lines collected by the acceptance tests; a conftest hook
# replays them after the terminal summary so they survive output capture.
VERDICT_LINES: list = []
