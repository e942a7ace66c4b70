"""Classic 3x3 tic-tac-toe behind the shared game interface.

Actions are cell indices in row-major order. Small enough to solve
exhaustively, which makes it the reference game for search oracles.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .base import (
    EMPTY,
    BoardState,
    Game,
    IllegalActionError,
    StepResult,
    TerminalStateError,
    check_policy,
)


class TicTacToeGame(Game):
    def __init__(self, size: int = 3):
        self.height = size
        self.width = size
        self.num_actions = size * size
        self._lines = self._build_lines(size)

    @staticmethod
    def _build_lines(size: int) -> list[np.ndarray]:
        idx = np.arange(size * size).reshape(size, size)
        lines = [idx[r] for r in range(size)]
        lines += [idx[:, c] for c in range(size)]
        lines.append(np.diagonal(idx))
        lines.append(np.diagonal(np.fliplr(idx)))
        return [np.asarray(l) for l in lines]

    def initial_state(self) -> BoardState:
        board = np.zeros((self.height, self.width), dtype=np.int8)
        return BoardState(board, to_move=0, move_count=0)

    def legal_actions(self, state: BoardState) -> np.ndarray:
        if state.terminal:
            raise TerminalStateError("no legal actions in a terminal state")
        return np.flatnonzero(state.board.ravel() == EMPTY)

    def apply(self, state: BoardState, action: int) -> StepResult:
        if state.terminal:
            raise TerminalStateError("cannot act in a terminal state")
        action = int(action)
        flat = state.board.ravel()
        if not 0 <= action < self.num_actions or flat[action] != EMPTY:
            raise IllegalActionError(f"cell {action} is not playable")
        board = state.board.copy()
        player = state.to_move
        board.ravel()[action] = player + 1

        winner = self._find_winner(board)
        move_count = state.move_count + 1
        terminal = winner is not None or move_count == self.num_actions
        next_state = BoardState(board, 1 - player, move_count, terminal, winner)
        if winner is not None:
            rewards = (1.0, -1.0) if winner == 0 else (-1.0, 1.0)
        else:
            rewards = (0.0, 0.0)
        return StepResult(next_state, terminal, winner, rewards)

    def _find_winner(self, board: np.ndarray) -> Optional[int]:
        flat = board.ravel()
        for line in self._lines:
            first = flat[line[0]]
            if first != EMPTY and np.all(flat[line] == first):
                return int(first) - 1
        return None

    def mirror_state(self, state: BoardState) -> BoardState:
        return BoardState(
            state.board[:, ::-1],
            state.to_move,
            state.move_count,
            state.terminal,
            state.winner,
        )

    def mirror_policy(self, policy: np.ndarray) -> np.ndarray:
        grid = check_policy(policy).reshape(self.height, self.width)
        return grid[:, ::-1].ravel().copy()

    def reconstruct(self, board: np.ndarray, to_move: int) -> BoardState:
        board = np.asarray(board, dtype=np.int8)
        if board.shape != (self.height, self.width):
            raise ValueError("board shape mismatch")
        counts = [int(np.sum(board == 1)), int(np.sum(board == 2))]
        if abs(counts[0] - counts[1]) > 1 or counts[to_move] > counts[1 - to_move]:
            raise ValueError("inconsistent chip counts for player to move")
        move_count = counts[0] + counts[1]
        winner = self._find_winner(board)
        terminal = winner is not None or move_count == self.num_actions
        return BoardState(board, to_move, move_count, terminal, winner)
