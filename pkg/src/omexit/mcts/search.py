"""Open-loop Monte Carlo tree search with PUCT selection.

Nodes are keyed by the action sequence from the root; states are recomputed
by replaying actions during descent (the games here are deterministic, so
no transpositions are stored). Priors at opponent-turn nodes can come from
the apprentice, from ground-truth opponent policies, or from learned
opponent-model heads.

Each search iteration traverses edges by PUCT, expands one new node (or
hits a terminal), and backs the leaf value up the path. The root is
pre-expanded before the first iteration, so the root edge visits sum to
exactly the iteration budget. Values are stored from the edge-owning
player's perspective, with a sign flip per ply (zero-sum convention).
Unvisited edges start at Q = 0; ties everywhere break toward the lowest
action index, which makes searches reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np

from ..games import BoardState, Game, TerminalStateError


class PriorMode(enum.Enum):
    APPRENTICE = "apprentice"        # apprentice actor at every node
    GROUND_TRUTH = "ground-truth"    # real opponent policies at opponent nodes
    LEARNED_OM = "learned-om"        # opponent-model heads at opponent nodes


class Evaluator(Protocol):
    """Leaf/prior evaluator; must be safe for concurrent calls."""

    def evaluate(self, state: BoardState, rng: np.random.Generator) -> tuple[
        np.ndarray, float, list[np.ndarray]
    ]:
        """Returns (actor distribution, value for state.to_move, OM distributions)."""


@dataclass
class PriorSource:
    """How edge priors are computed, per node owner.

    ``opponent_policies`` maps seat index to a policy object exposing
    ``distribution(state, rng)`` (required in ground-truth mode).
    ``om_head_for_seat`` maps seat index to an opponent-model head index
    (required in learned-OM mode). ``call_log`` records (seat, source) pairs
    when set, for instrumentation.
    """

    mode: PriorMode
    agent_player: int = 0
    opponent_policies: dict[int, object] = field(default_factory=dict)
    om_head_for_seat: dict[int, int] = field(default_factory=dict)
    call_log: Optional[list] = None


@dataclass
class SearchConfig:
    budget: int = 50
    c_puct: float = 2.0
    dirichlet_enabled: bool = False
    dirichlet_alpha: float = float(np.sqrt(2.0))
    dirichlet_epsilon: float = 0.25


class SearchNode:
    __slots__ = ("player", "actions", "prior", "visits", "values", "children")

    def __init__(self, player: int, actions: np.ndarray, prior: np.ndarray):
        self.player = player
        self.actions = actions
        self.prior = prior
        self.visits = np.zeros(len(actions), dtype=np.int64)
        self.values = np.zeros(len(actions), dtype=np.float64)  # running means
        self.children: dict[int, SearchNode] = {}


@dataclass
class RootStats:
    """Root edge statistics captured at the end of a search."""

    player: int
    actions: np.ndarray
    visits: np.ndarray
    values: np.ndarray
    prior: np.ndarray
    num_actions: int

    def chosen_action(self) -> int:
        return int(self.actions[int(np.argmax(self.visits))])

    def chosen_q(self) -> float:
        return float(self.values[int(np.argmax(self.visits))])

    def greedy_q(self) -> float:
        return float(self.values.max())

    def root_value(self, policy_over_actions: np.ndarray) -> float:
        return float(np.dot(policy_over_actions, self.values))


def select_child_index(node: SearchNode, c_puct: float) -> int:
    """PUCT argmax: Q + c * P * sqrt(N_total) / (1 + N).

    Before any edge has been visited the exploration term vanishes, so the
    first selection goes to the highest prior (lowest index on ties).
    """
    total = int(node.visits.sum())
    if total == 0:
        return int(np.argmax(node.prior))
    scores = node.values + c_puct * node.prior * (np.sqrt(total) / (1.0 + node.visits))
    return int(np.argmax(scores))


def backup(path: list[tuple[SearchNode, int]], leaf_value: float, leaf_player: int) -> None:
    """Add one value sample to every edge on the path.

    ``leaf_value`` is from ``leaf_player``'s perspective; each edge stores
    the running mean in its owner's perspective (sign-flipped for the other
    player in this zero-sum setting).
    """
    for node, edge in path:
        v = leaf_value if node.player == leaf_player else -leaf_value
        node.visits[edge] += 1
        node.values[edge] += (v - node.values[edge]) / node.visits[edge]


def apply_root_dirichlet(
    priors: np.ndarray, alpha: float, epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """Mix Dirichlet noise into root priors: eps * noise + (1 - eps) * priors."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if epsilon == 0.0:
        return priors.copy()
    noise = rng.dirichlet(np.full(len(priors), alpha))
    return epsilon * noise + (1.0 - epsilon) * priors


def extract_policy(stats: RootStats, tau: float) -> np.ndarray:
    """Visit-count policy over the full action space.

    pi(a) proportional to N(a)^(1/tau); tau=1 is plain normalization and
    small tau concentrates on the most-visited action. Computed in
    log-space so tiny temperatures do not overflow.
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    visits = stats.visits
    total = visits.sum()
    if total == 0:
        raise ValueError("cannot extract a policy from all-zero visit counts")
    if tau == 1.0:
        probs = visits / total
    else:
        logs = np.full(len(visits), -np.inf)
        nz = visits > 0
        logs[nz] = np.log(visits[nz]) / tau
        logs -= logs.max()
        weights = np.exp(logs)
        probs = weights / weights.sum()
    full = np.zeros(stats.num_actions)
    full[stats.actions] = probs
    return full


class RolloutEvaluator:
    """Uniform-random playout value with uniform priors (baseline expert)."""

    def __init__(self, game: Game):
        self.game = game

    def evaluate(self, state: BoardState, rng: np.random.Generator):
        actions = self.game.legal_actions(state)
        priors = np.zeros(self.game.num_actions)
        priors[actions] = 1.0 / len(actions)
        player = state.to_move
        current = state
        while not current.terminal:
            legal = self.game.legal_actions(current)
            move = int(legal[rng.integers(len(legal))])
            current = self.game.apply(current, move).next_state
        return priors, self.game.terminal_value(current, player), []


class NetEvaluator:
    """Apprentice-backed evaluator over a frozen parameter snapshot."""

    def __init__(self, game: Game, net):
        self.game = game
        self.net = net

    def evaluate(self, state: BoardState, rng: np.random.Generator):
        x = self.game.encode(state, state.to_move)[None]
        mask = self.game.legal_mask(state)[None]
        out = self.net.forward(x, mask)
        return out.actor[0], float(out.value[0]), [om[0] for om in out.om]


class MctsSearch:
    """One search owner per worker; many instances may share an evaluator."""

    def __init__(self, game: Game, evaluator: Evaluator, prior_source: PriorSource,
                 config: SearchConfig):
        self.game = game
        self.evaluator = evaluator
        self.prior_source = prior_source
        self.config = config

    # -- priors ---------------------------------------------------------

    def _node_priors(
        self,
        state: BoardState,
        actions: np.ndarray,
        actor: np.ndarray,
        oms: list[np.ndarray],
        rng: np.random.Generator,
    ) -> np.ndarray:
        src = self.prior_source
        seat = state.to_move
        if src.mode is PriorMode.APPRENTICE or seat == src.agent_player:
            dist, tag = actor, "apprentice"
        elif src.mode is PriorMode.GROUND_TRUTH:
            policy = src.opponent_policies.get(seat)
            if policy is None:
                raise ValueError(f"ground-truth priors need an opponent policy for seat {seat}")
            dist, tag = policy.distribution(state, rng), "ground-truth"
        else:
            head = src.om_head_for_seat.get(seat)
            if head is None or head >= len(oms):
                raise ValueError(f"learned-OM priors need a model head for seat {seat}")
            dist, tag = oms[head], "learned-om"
        if src.call_log is not None:
            src.call_log.append((seat, tag))
        p = np.asarray(dist, dtype=np.float64)[actions]
        total = p.sum()
        if total <= 0.0:  # degenerate external policy: fall back to uniform
            return np.full(len(actions), 1.0 / len(actions))
        return p / total

    def _expand(self, state: BoardState, rng: np.random.Generator) -> tuple[SearchNode, float]:
        actions = self.game.legal_actions(state)
        actor, value, oms = self.evaluator.evaluate(state, rng)
        priors = self._node_priors(state, actions, actor, oms, rng)
        return SearchNode(state.to_move, actions, priors), value

    # -- main loop ------------------------------------------------------

    def search(self, root_state: BoardState, budget: int,
               rng: np.random.Generator) -> tuple[int, RootStats]:
        if root_state.terminal:
            raise TerminalStateError("cannot search from a terminal state")
        if budget < 1:
            raise ValueError("search budget must be at least 1")

        root, _ = self._expand(root_state, rng)
        cfg = self.config
        if cfg.dirichlet_enabled:
            root.prior = apply_root_dirichlet(
                root.prior, cfg.dirichlet_alpha, cfg.dirichlet_epsilon, rng
            )

        apply_action = self.game.apply
        for _ in range(budget):
            node = root
            state = root_state
            path: list[tuple[SearchNode, int]] = []
            while True:
                edge = select_child_index(node, cfg.c_puct)
                action = int(node.actions[edge])
                path.append((node, edge))
                step = apply_action(state, action)
                state = step.next_state
                if step.terminal:
                    leaf_player = state.to_move
                    leaf_value = step.rewards[leaf_player]
                    break
                child = node.children.get(action)
                if child is None:
                    child, leaf_value = self._expand(state, rng)
                    node.children[action] = child
                    leaf_player = state.to_move
                    break
                node = child
            backup(path, leaf_value, leaf_player)

        stats = RootStats(
            player=root.player,
            actions=root.actions.copy(),
            visits=root.visits.copy(),
            values=root.values.copy(),
            prior=root.prior.copy(),
            num_actions=self.game.num_actions,
        )
        return stats.chosen_action(), stats
