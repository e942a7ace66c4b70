"""Three-headed apprentice network: convolutional trunk, actor, critic and
per-opponent policy-inference heads.

The trunk applies the configured convolutions in residual pairs: the pair
input is added (through a learned 1x1 projection, since channel counts
change) to the output of the pair's second convolution before its
activation. The final hidden layer of each opponent-model stack is
concatenated into the actor-critic stack's input, so opponent-model
parameters shape the features the actor and critic see.

All math is float64 and hand-rolled; the backward pass mirrors the forward
exactly, which keeps gradients verifiable against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .layers import (
    conv2d_backward,
    conv2d_forward,
    linear_backward,
    linear_forward,
    masked_softmax,
    relu_backward,
    relu_forward,
)

INPUT_PLANES = 3


@dataclass(frozen=True)
class NetConfig:
    """Architecture hyperparameters.

    The defaults (with ``om_heads=0``) land at 26,793 trainable parameters
    on a 6x7 board, the reference size for this architecture family.
    """

    height: int = 6
    width: int = 7
    num_actions: int = 7
    channels: tuple[int, ...] = (12, 15, 20, 20, 20, 1)
    om_hidden: tuple[int, ...] = (128, 64)
    ac_hidden: tuple[int, ...] = (128, 64)
    om_heads: int = 0

    @property
    def trunk_features(self) -> int:
        return self.channels[-1] * self.height * self.width

    @property
    def ac_input(self) -> int:
        extra = self.om_hidden[-1] * self.om_heads if self.om_heads else 0
        return self.trunk_features + extra


@dataclass
class NetworkOutput:
    """Batched forward-pass result; ``om`` has one distribution per head."""

    actor: np.ndarray  # (B, A) masked softmax
    value: np.ndarray  # (B,) tanh critic
    om: list[np.ndarray] = field(default_factory=list)  # each (B, A)


def _he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def _head_uniform(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.uniform(-0.03, 0.03, size=shape)


class ApprenticeNet:
    """Parameter container plus forward/backward for the fixed architecture.

    Parameters live in an ordered name -> float64 array dict; gradients come
    back in the same keyed layout. ``forward`` is read-only and safe to call
    concurrently on a frozen parameter snapshot.
    """

    def __init__(self, config: NetConfig, params: dict[str, np.ndarray] | None = None,
                 rng: np.random.Generator | None = None):
        self.config = config
        self._conv_in = [INPUT_PLANES] + list(config.channels[:-1])
        if params is not None:
            self.params = params
            self._validate_shapes()
        else:
            if rng is None:
                rng = np.random.default_rng(0)
            self.params = self._init_params(rng)

    # ------------------------------------------------------------------
    # parameters
    # ------------------------------------------------------------------

    def _param_shapes(self) -> dict[str, tuple[int, ...]]:
        cfg = self.config
        shapes: dict[str, tuple[int, ...]] = {}
        n_convs = len(cfg.channels)
        for i in range(n_convs):
            shapes[f"conv{i}.w"] = (cfg.channels[i], self._conv_in[i], 3, 3)
            shapes[f"conv{i}.b"] = (cfg.channels[i],)
        for start in range(0, n_convs - 1, 2):
            end = start + 1
            shapes[f"skip{end}.w"] = (cfg.channels[end], self._conv_in[start], 1, 1)
            shapes[f"skip{end}.b"] = (cfg.channels[end],)
        for j in range(cfg.om_heads):
            fan = cfg.trunk_features
            for k, units in enumerate(cfg.om_hidden):
                shapes[f"om{j}.fc{k}.w"] = (units, fan)
                shapes[f"om{j}.fc{k}.b"] = (units,)
                fan = units
            shapes[f"om{j}.head.w"] = (cfg.num_actions, fan)
            shapes[f"om{j}.head.b"] = (cfg.num_actions,)
        fan = cfg.ac_input
        for k, units in enumerate(cfg.ac_hidden):
            shapes[f"ac.fc{k}.w"] = (units, fan)
            shapes[f"ac.fc{k}.b"] = (units,)
            fan = units
        shapes["actor.w"] = (cfg.num_actions, fan)
        shapes["actor.b"] = (cfg.num_actions,)
        shapes["critic.w"] = (1, fan)
        shapes["critic.b"] = (1,)
        return shapes

    def _init_params(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        params: dict[str, np.ndarray] = {}
        for name, shape in self._param_shapes().items():
            if name.endswith(".b"):
                params[name] = np.zeros(shape)
            elif name.startswith(("actor.", "critic.")) or ".head." in name:
                params[name] = _head_uniform(rng, shape)
            elif name.startswith(("conv", "skip")):
                fan_in = shape[1] * shape[2] * shape[3]
                params[name] = _he_uniform(rng, shape, fan_in)
            else:
                params[name] = _he_uniform(rng, shape, shape[1])
        return params

    def _validate_shapes(self) -> None:
        expected = self._param_shapes()
        if set(expected) != set(self.params):
            missing = sorted(set(expected) - set(self.params))
            extra = sorted(set(self.params) - set(expected))
            raise ValueError(f"parameter set mismatch: missing={missing} extra={extra}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(
                    f"parameter {name} has shape {self.params[name].shape}, expected {shape}"
                )

    def param_count(self) -> int:
        return sum(p.size for p in self.params.values())

    def snapshot(self) -> dict[str, np.ndarray]:
        """Deep copy of the parameters, for publishing to search workers."""
        return {k: v.copy() for k, v in self.params.items()}

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    # ------------------------------------------------------------------
    # forward
    # ------------------------------------------------------------------

    def forward(self, x: np.ndarray, mask: np.ndarray, cache: dict | None = None) -> NetworkOutput:
        """Run the network on a batch.

        x: (B, 3, H, W) encoded states, mask: (B, A) legal-action booleans.
        Pass ``cache={}`` to record intermediates for a later backward call.
        """
        cfg = self.config
        if x.ndim != 4 or x.shape[1:] != (INPUT_PLANES, cfg.height, cfg.width):
            raise ValueError(
                f"input shape {x.shape} does not match (B, {INPUT_PLANES}, {cfg.height}, {cfg.width})"
            )
        if mask.shape != (x.shape[0], cfg.num_actions):
            raise ValueError("legal mask shape does not match the action space")
        if not mask.any(axis=1).all():
            raise ValueError("every sample needs at least one legal action")
        p = self.params
        record = cache is not None

        feats, trunk_cache = self._trunk_forward(x, record)
        flat = feats.reshape(x.shape[0], -1)

        om_hidden_out: list[np.ndarray] = []
        om_probs: list[np.ndarray] = []
        om_caches: list[list] = []
        for j in range(cfg.om_heads):
            h, stack_cache = self._stack_forward(flat, f"om{j}", len(cfg.om_hidden), record)
            logits = linear_forward(h, p[f"om{j}.head.w"], p[f"om{j}.head.b"])
            om_hidden_out.append(h)
            om_probs.append(masked_softmax(logits, mask))
            om_caches.append(stack_cache)

        ac_in = np.concatenate([flat] + om_hidden_out, axis=1) if om_hidden_out else flat
        ac_out, ac_cache = self._stack_forward(ac_in, "ac", len(cfg.ac_hidden), record)
        actor_logits = linear_forward(ac_out, p["actor.w"], p["actor.b"])
        actor = masked_softmax(actor_logits, mask)
        critic_pre = linear_forward(ac_out, p["critic.w"], p["critic.b"])[:, 0]
        value = np.tanh(critic_pre)

        if record:
            cache.update(
                x_shape=x.shape, mask=mask, trunk=trunk_cache, flat=flat,
                om_hidden=om_hidden_out, om_caches=om_caches, om_probs=om_probs,
                ac_in=ac_in, ac_cache=ac_cache, ac_out=ac_out,
                actor=actor, value=value,
            )
        return NetworkOutput(actor=actor, value=value, om=om_probs)

    def _trunk_forward(self, x: np.ndarray, record: bool):
        p = self.params
        n_convs = len(self.config.channels)
        steps = []
        for start in range(0, n_convs - 1, 2):
            end = start + 1
            pair_in = x
            h_pre, cols_a = conv2d_forward(pair_in, p[f"conv{start}.w"], p[f"conv{start}.b"])
            h = relu_forward(h_pre)
            y_main, cols_b = conv2d_forward(h, p[f"conv{end}.w"], p[f"conv{end}.b"])
            y_skip, cols_s = conv2d_forward(pair_in, p[f"skip{end}.w"], p[f"skip{end}.b"])
            y_pre = y_main + y_skip
            x = relu_forward(y_pre)
            if record:
                steps.append(("pair", start, pair_in.shape, cols_a, h_pre, h.shape,
                              cols_b, cols_s, y_pre))
        if n_convs % 2 == 1:
            i = n_convs - 1
            z_pre, cols = conv2d_forward(x, p[f"conv{i}.w"], p[f"conv{i}.b"])
            if record:
                steps.append(("single", i, x.shape, cols, z_pre))
            x = relu_forward(z_pre)
        return x, steps

    def _stack_forward(self, x: np.ndarray, prefix: str, n_layers: int, record: bool):
        p = self.params
        stack_cache = []
        h = x
        for k in range(n_layers):
            z = linear_forward(h, p[f"{prefix}.fc{k}.w"], p[f"{prefix}.fc{k}.b"])
            if record:
                stack_cache.append((h, z))
            h = relu_forward(z)
        return h, stack_cache

    # ------------------------------------------------------------------
    # backward
    # ------------------------------------------------------------------

    def backward(
        self,
        cache: dict,
        d_actor_logits: np.ndarray | None,
        d_critic_pre: np.ndarray | None,
        d_om_logits: list[np.ndarray] | None,
        grads: dict[str, np.ndarray],
    ) -> None:
        """Accumulate parameter gradients for one cached forward pass.

        Head seeds are gradients of the loss w.r.t. the raw actor logits,
        the pre-tanh critic output, and each OM head's raw logits; any seed
        may be None when that head does not participate in the loss.
        """
        cfg = self.config
        p = self.params
        batch = cache["x_shape"][0]
        d_ac_out = np.zeros_like(cache["ac_out"])

        if d_actor_logits is not None:
            dx, dw, db = linear_backward(d_actor_logits, cache["ac_out"], p["actor.w"])
            grads["actor.w"] += dw
            grads["actor.b"] += db
            d_ac_out += dx
        if d_critic_pre is not None:
            dcp = d_critic_pre.reshape(batch, 1)
            dx, dw, db = linear_backward(dcp, cache["ac_out"], p["critic.w"])
            grads["critic.w"] += dw
            grads["critic.b"] += db
            d_ac_out += dx

        d_ac_in = self._stack_backward(d_ac_out, "ac", cache["ac_cache"], grads)

        d_flat = d_ac_in[:, : cfg.trunk_features].copy()
        offset = cfg.trunk_features
        for j in range(cfg.om_heads):
            width = cfg.om_hidden[-1]
            d_h = d_ac_in[:, offset : offset + width].copy()
            offset += width
            if d_om_logits is not None and d_om_logits[j] is not None:
                dx, dw, db = linear_backward(
                    d_om_logits[j], cache["om_hidden"][j], p[f"om{j}.head.w"]
                )
                grads[f"om{j}.head.w"] += dw
                grads[f"om{j}.head.b"] += db
                d_h += dx
            d_flat += self._stack_backward(d_h, f"om{j}", cache["om_caches"][j], grads)

        d_feats = d_flat.reshape(batch, cfg.channels[-1], cfg.height, cfg.width)
        self._trunk_backward(d_feats, cache["trunk"], grads)

    def _stack_backward(self, d_out: np.ndarray, prefix: str, stack_cache: list,
                        grads: dict[str, np.ndarray]) -> np.ndarray:
        p = self.params
        d = d_out
        for k in range(len(stack_cache) - 1, -1, -1):
            h_in, z = stack_cache[k]
            d = relu_backward(d, z)
            d, dw, db = linear_backward(d, h_in, p[f"{prefix}.fc{k}.w"])
            grads[f"{prefix}.fc{k}.w"] += dw
            grads[f"{prefix}.fc{k}.b"] += db
        return d

    def _trunk_backward(self, d_out: np.ndarray, steps: list, grads: dict[str, np.ndarray]) -> None:
        p = self.params
        d = d_out
        for step in reversed(steps):
            if step[0] == "single":
                _, i, x_shape, cols, z_pre = step
                d = relu_backward(d, z_pre)
                d, dw, db = conv2d_backward(d, cols, p[f"conv{i}.w"], x_shape)
                grads[f"conv{i}.w"] += dw
                grads[f"conv{i}.b"] += db
            else:
                (_, start, in_shape, cols_a, h_pre, h_shape, cols_b, cols_s, y_pre) = step
                end = start + 1
                dy = relu_backward(d, y_pre)
                dh, dw_b, db_b = conv2d_backward(dy, cols_b, p[f"conv{end}.w"], h_shape)
                grads[f"conv{end}.w"] += dw_b
                grads[f"conv{end}.b"] += db_b
                ds, dw_s, db_s = conv2d_backward(dy, cols_s, p[f"skip{end}.w"], in_shape)
                grads[f"skip{end}.w"] += dw_s
                grads[f"skip{end}.b"] += db_s
                dh = relu_backward(dh, h_pre)
                dx, dw_a, db_a = conv2d_backward(dh, cols_a, p[f"conv{start}.w"], in_shape)
                grads[f"conv{start}.w"] += dw_a
                grads[f"conv{start}.b"] += db_a
                d = dx + ds
