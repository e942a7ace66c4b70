"""Loss computation and gradient assembly for the apprentice.

The total objective combines a mean-squared critic loss, a cross-entropy
actor loss against search-visit targets and, when opponent models are
trained, a cross-entropy policy-inference loss with an adaptive weight

    lambda = 1 / sqrt(L_PI + eps),   L_total = lambda * (L_v + L_pi) + L_PI.

``lambda`` is treated as a per-batch coefficient, not differentiated
through: gradients reach opponent-model parameters through L_PI itself and
through the shared features that feed the actor-critic stack. (Letting the
weight carry gradient would reward *increasing* L_PI whenever the weighted
actor-critic term dominates, which inverts the auxiliary task.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import cross_entropy
from .model import ApprenticeNet

LAMBDA_EPS = 1e-8


class NonFiniteLossError(RuntimeError):
    """Raised when a loss head produces NaN/Inf; names the offending head."""


@dataclass
class ArrayBatch:
    """Model-ready training arrays.

    Agent rows drive the actor/critic losses. Opponent rows (one per
    recorded opponent turn) drive the policy-inference loss; ``om_head``
    selects which opponent-model head each row trains and ``om_sample``
    maps the row back to its agent row so records are averaged per sample.
    """

    states: np.ndarray        # (B, 3, H, W)
    masks: np.ndarray         # (B, A) bool
    policy_targets: np.ndarray  # (B, A)
    value_targets: np.ndarray   # (B,)
    om_states: np.ndarray | None = None   # (M, 3, H, W)
    om_masks: np.ndarray | None = None    # (M, A)
    om_targets: np.ndarray | None = None  # (M, A)
    om_head: np.ndarray | None = None     # (M,) int
    om_sample: np.ndarray | None = None   # (M,) int

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @property
    def om_rows(self) -> int:
        return 0 if self.om_states is None else self.om_states.shape[0]


@dataclass
class LossBreakdown:
    """Scalar loss components for one batch.

    ``policy_inference`` and ``lam`` are None in plain actor-critic mode;
    otherwise total == lam * (value + policy) + policy_inference.
    """

    value: float
    policy: float
    policy_inference: float | None
    lam: float | None
    total: float


def _check_finite(name: str, value: float) -> float:
    if not np.isfinite(value):
        raise NonFiniteLossError(f"{name} loss is not finite ({value})")
    return float(value)


def _om_record_weights(batch: ArrayBatch) -> tuple[np.ndarray, int]:
    """Per-record averaging weights: records are averaged within a sample,
    then over the samples that have records. Returns (weights, n_samples)."""
    counts = np.bincount(batch.om_sample, minlength=batch.size)
    covered = int(np.count_nonzero(counts))
    weights = 1.0 / (counts[batch.om_sample] * covered)
    return weights, covered


def compute_losses(
    net: ApprenticeNet,
    batch: ArrayBatch,
    use_om: bool,
    caches: dict | None = None,
) -> LossBreakdown:
    """Evaluate all loss components; optionally record forward caches."""
    if use_om and net.config.om_heads == 0:
        raise ValueError("network has no opponent-model heads but OM loss was requested")
    if use_om and batch.om_rows == 0:
        raise ValueError("opponent-model loss requested but batch has no opponent records")

    agent_cache: dict | None = {} if caches is not None else None
    out = net.forward(batch.states, batch.masks, cache=agent_cache)

    value = _check_finite("critic", np.mean((out.value - batch.value_targets) ** 2))
    policy = _check_finite("actor", np.mean(cross_entropy(out.actor, batch.policy_targets)))

    pi_loss = None
    lam = None
    om_cache: dict | None = None
    om_out = None
    if use_om:
        om_cache = {} if caches is not None else None
        om_out = net.forward(batch.om_states, batch.om_masks, cache=om_cache)
        weights, _ = _om_record_weights(batch)
        rows = np.arange(batch.om_rows)
        probs = np.stack([om_out.om[h][r] for r, h in zip(rows, batch.om_head)])
        ces = cross_entropy(probs, batch.om_targets)
        pi_loss = _check_finite("opponent-model", float(np.sum(weights * ces)))
        lam = 1.0 / np.sqrt(pi_loss + LAMBDA_EPS)
        total = lam * (value + policy) + pi_loss
    else:
        total = value + policy

    if caches is not None:
        caches.update(agent=agent_cache, agent_out=out, om=om_cache, om_out=om_out)
    return LossBreakdown(value, policy, pi_loss, lam, float(total))


def compute_losses_and_grads(
    net: ApprenticeNet, batch: ArrayBatch, use_om: bool
) -> tuple[LossBreakdown, dict[str, np.ndarray]]:
    """One combined forward/backward pass over a batch."""
    caches: dict = {}
    breakdown = compute_losses(net, batch, use_om, caches=caches)
    grads = net.zero_grads()
    n = batch.size
    head_weight = breakdown.lam if use_om else 1.0

    out = caches["agent_out"]
    d_critic = head_weight * 2.0 * (out.value - batch.value_targets) / n
    d_critic_pre = d_critic * (1.0 - out.value**2)
    d_actor_logits = head_weight * (out.actor - batch.policy_targets) / n
    net.backward(caches["agent"], d_actor_logits, d_critic_pre, None, grads)

    if use_om:
        om_out = caches["om_out"]
        weights, _ = _om_record_weights(batch)
        d_om = [np.zeros_like(om_out.om[j]) for j in range(net.config.om_heads)]
        for r in range(batch.om_rows):
            h = int(batch.om_head[r])
            d_om[h][r] = weights[r] * (om_out.om[h][r] - batch.om_targets[r])
        net.backward(caches["om"], None, None, d_om, grads)

    return breakdown, grads
