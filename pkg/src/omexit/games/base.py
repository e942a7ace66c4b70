"""Two-player sequential game abstraction shared by all board games.

A game object owns the rules; board positions are immutable ``BoardState``
values, so states can be shared freely between concurrent search workers.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

EMPTY = 0
# Cell codes: 0 empty, 1 player 0 chip, 2 player 1 chip.
CELL_CHARS = ".XO"


class IllegalActionError(ValueError):
    """Raised when an action is not legal in the given state."""


class TerminalStateError(ValueError):
    """Raised when an operation requires a non-terminal state."""


class BoardState:
    """An immutable board position plus player-to-move bookkeeping.

    ``board`` is an int8 grid (row 0 at the top) with cell codes 0 (empty),
    1 (player 0) and 2 (player 1). ``winner`` is None while the game is
    running and on draws.
    """

    __slots__ = ("board", "to_move", "move_count", "terminal", "winner")

    def __init__(
        self,
        board: np.ndarray,
        to_move: int,
        move_count: int,
        terminal: bool = False,
        winner: Optional[int] = None,
    ):
        board = np.ascontiguousarray(board, dtype=np.int8)
        board.flags.writeable = False
        self.board = board
        self.to_move = to_move
        self.move_count = move_count
        self.terminal = terminal
        self.winner = winner

    @property
    def height(self) -> int:
        return self.board.shape[0]

    @property
    def width(self) -> int:
        return self.board.shape[1]

    def key(self) -> tuple:
        """Hashable identity of the position (used by solvers and caches)."""
        return (self.board.tobytes(), self.to_move)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        status = "terminal" if self.terminal else f"to_move={self.to_move}"
        return f"BoardState({self.height}x{self.width}, {status}, moves={self.move_count})"


@dataclass(frozen=True)
class StepResult:
    """Outcome of applying one action.

    ``rewards`` is indexed by player and is all zero while the game runs;
    at termination it is (+1, -1) / (-1, +1) for win/loss and (0, 0) on a draw.
    """

    next_state: BoardState
    terminal: bool
    winner: Optional[int]
    rewards: tuple[float, float]


class Game(ABC):
    """Rules object for a two-player sequential board game.

    All methods are pure functions of their inputs; instances carry only
    immutable configuration and are safe to share across workers.
    """

    height: int
    width: int
    num_actions: int

    @abstractmethod
    def initial_state(self) -> BoardState:
        ...

    @abstractmethod
    def legal_actions(self, state: BoardState) -> np.ndarray:
        """Legal action indices, ascending. Raises TerminalStateError on terminal states."""

    @abstractmethod
    def apply(self, state: BoardState, action: int) -> StepResult:
        """Apply ``action`` for ``state.to_move``. Raises IllegalActionError."""

    @abstractmethod
    def mirror_state(self, state: BoardState) -> BoardState:
        """Reflect the position over the vertical axis."""

    @abstractmethod
    def mirror_policy(self, policy: np.ndarray) -> np.ndarray:
        """Reflect a distribution over actions to match ``mirror_state``."""

    def legal_mask(self, state: BoardState) -> np.ndarray:
        mask = np.zeros(self.num_actions, dtype=bool)
        mask[self.legal_actions(state)] = True
        return mask

    def encode(self, state: BoardState, perspective: int) -> np.ndarray:
        """Encode a position as a 3xHxW binary tensor.

        Plane 0 marks empty cells, plane 1 the perspective player's chips
        and plane 2 the opponent's chips; the planes partition the board.
        """
        board = state.board
        own = perspective + 1
        opp = 2 - perspective
        planes = np.empty((3, board.shape[0], board.shape[1]), dtype=np.float64)
        planes[0] = board == EMPTY
        planes[1] = board == own
        planes[2] = board == opp
        return planes

    def terminal_value(self, state: BoardState, player: int) -> float:
        """Terminal reward for ``player``: +1 win, -1 loss, 0 draw."""
        if not state.terminal:
            raise TerminalStateError("terminal_value requires a terminal state")
        if state.winner is None:
            return 0.0
        return 1.0 if state.winner == player else -1.0

    def render(self, state: BoardState) -> str:
        """One character per cell, rows top-down, plus a column footer."""
        rows = ["".join(CELL_CHARS[c] for c in row) for row in state.board]
        footer = "".join(str(c % 10) for c in range(state.width))
        return "\n".join(rows + [footer])


def check_policy(policy: np.ndarray, atol: float = 1e-6) -> np.ndarray:
    """Validate that ``policy`` is a distribution; returns it as float64."""
    policy = np.asarray(policy, dtype=np.float64)
    if policy.ndim != 1:
        raise ValueError("policy must be a 1-D distribution")
    if np.any(policy < 0):
        raise ValueError("policy entries must be non-negative")
    total = float(policy.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"policy must sum to 1 (got {total})")
    return policy


def serialize_state(state: BoardState) -> dict:
    """Compact JSON-friendly form: dimensions, player to move, packed cells.

    Cells are a row-major string of the digit codes; move_count is implied by
    the chip count and terminality is recomputed on load by the owning game.
    """
    return {
        "h": state.height,
        "w": state.width,
        "to_move": state.to_move,
        "cells": "".join(str(c) for c in state.board.ravel()),
    }


def deserialize_state(game: Game, data: dict) -> BoardState:
    h, w = int(data["h"]), int(data["w"])
    if (h, w) != (game.height, game.width):
        raise ValueError(f"state dimensions {h}x{w} do not match game {game.height}x{game.width}")
    cells = data["cells"]
    if len(cells) != h * w:
        raise ValueError("packed cell string has wrong length")
    board = np.frombuffer(cells.encode("ascii"), dtype=np.uint8).astype(np.int8) - ord("0")
    board = board.reshape(h, w)
    if not np.all((board >= 0) & (board <= 2)):
        raise ValueError("packed cell string contains invalid codes")
    return game.reconstruct(board, int(data["to_move"]))
