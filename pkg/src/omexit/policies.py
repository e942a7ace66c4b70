"""Action policies: scripted opponents, search-backed agents and apprentice
wrappers.

Every policy exposes ``distribution(state, rng) -> np.ndarray`` over the
game's full action space, normalized and zero on illegal actions. Having
full distributions (not just sampled actions) is what lets them serve both
as opponent-model training targets and as ground-truth priors inside the
search tree.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from .games import BoardState, Game
from .mcts import MctsSearch, NetEvaluator, PriorMode, PriorSource, RolloutEvaluator, SearchConfig
from .net import ApprenticeNet


class Policy(Protocol):
    def distribution(self, state: BoardState, rng: np.random.Generator) -> np.ndarray:
        ...


class IllegalPolicyActionError(RuntimeError):
    """A policy produced an action that is illegal in the given state."""


def sample_action(policy: Policy, state: BoardState, rng: np.random.Generator,
                  game: Game) -> int:
    """Draw an action from a policy and verify it is legal."""
    dist = np.asarray(policy.distribution(state, rng), dtype=np.float64)
    action = int(rng.choice(game.num_actions, p=dist / dist.sum()))
    if state.board.ravel() is not None:  # cheap guard keeps mypy quiet
        legal = game.legal_mask(state)
        if not legal[action]:
            raise IllegalPolicyActionError(
                f"policy for seat {state.to_move} chose illegal action {action}"
            )
    return action


class UniformRandomPolicy:
    """Uniform over legal actions."""

    def __init__(self, game: Game):
        self.game = game

    def distribution(self, state: BoardState, rng: np.random.Generator) -> np.ndarray:
        dist = np.zeros(self.game.num_actions)
        legal = self.game.legal_actions(state)
        dist[legal] = 1.0 / len(legal)
        return dist


class LookaheadPolicy:
    """One-ply tactical opponent with a sharp center preference.

    Takes an immediate win when one exists, otherwise blocks the opponent's
    immediate win, otherwise plays a fixed center-weighted distribution
    (weight exp(-sharpness * distance-from-center)). Low entropy by design
    so that opponent models have a learnable, mostly-predictable target.
    """

    def __init__(self, game: Game, sharpness: float = 3.0):
        self.game = game
        self.sharpness = sharpness

    def distribution(self, state: BoardState, rng: np.random.Generator) -> np.ndarray:
        game = self.game
        legal = game.legal_actions(state)
        me = state.to_move

        wins = [a for a in legal if game.apply(state, a).winner == me]
        if wins:
            return self._uniform_on(wins)

        # Hypothetical: hand the move to the opponent to spot their wins.
        flipped = BoardState(state.board, 1 - me, state.move_count)
        blocks = [a for a in legal if game.apply(flipped, a).winner == 1 - me]
        if blocks:
            return self._uniform_on(blocks)

        center = (game.num_actions - 1) / 2.0
        weights = np.exp(-self.sharpness * np.abs(legal - center))
        dist = np.zeros(game.num_actions)
        dist[legal] = weights / weights.sum()
        return dist

    def _uniform_on(self, actions: list[int]) -> np.ndarray:
        dist = np.zeros(self.game.num_actions)
        dist[actions] = 1.0 / len(actions)
        return dist


class MctsPolicy:
    """Plays the most-visited move of a fresh search; one-hot distribution.

    With the default rollout evaluator this is the benchmark search agent
    used for equivalent-strength sweeps. Note that using it as a
    ground-truth opponent inside another search multiplies costs; prefer
    learned opponent models there.
    """

    def __init__(self, game: Game, budget: int, c_puct: float = 2.0, evaluator=None):
        self.game = game
        self.budget = budget
        self.evaluator = evaluator if evaluator is not None else RolloutEvaluator(game)
        self.config = SearchConfig(budget=budget, c_puct=c_puct)

    def distribution(self, state: BoardState, rng: np.random.Generator) -> np.ndarray:
        source = PriorSource(mode=PriorMode.APPRENTICE, agent_player=state.to_move)
        search = MctsSearch(self.game, self.evaluator, source, self.config)
        action, _ = search.search(state, self.budget, rng)
        dist = np.zeros(self.game.num_actions)
        dist[action] = 1.0
        return dist


class ApprenticePolicy:
    """The apprentice actor head as a standalone policy.

    ``greedy=True`` plays argmax (evaluation); ``greedy=False`` returns the
    full actor distribution (self-play population opponents act by
    sampling from it).
    """

    def __init__(self, game: Game, net: ApprenticeNet, greedy: bool = True):
        self.game = game
        self.net = net
        self.greedy = greedy
        self._evaluator = NetEvaluator(game, net)

    def distribution(self, state: BoardState, rng: np.random.Generator) -> np.ndarray:
        actor, _, _ = self._evaluator.evaluate(state, rng)
        if not self.greedy:
            return actor
        dist = np.zeros(self.game.num_actions)
        dist[int(np.argmax(actor))] = 1.0
        return dist


def scripted_policy(name: str, game: Game) -> Policy:
    if name == "random":
        return UniformRandomPolicy(game)
    if name == "lookahead":
        return LookaheadPolicy(game)
    raise ValueError(f"unknown scripted policy {name!r} (expected 'random' or 'lookahead')")
