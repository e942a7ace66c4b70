"""Connect-N on a gravity board: chips drop to the lowest empty cell.

The default 6x7 board with a connect length of 4 is classic Connect Four;
a reduced 4x5 / connect-3 variant keeps oracle tests fast.
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

_DIRECTIONS = ((0, 1), (1, 0), (1, 1), (1, -1))


class ConnectGame(Game):
    """Rules for a height x width gravity board, first to ``connect_n`` in a row."""

    def __init__(self, height: int = 6, width: int = 7, connect_n: int = 4):
        if connect_n < 2:
            raise ValueError("connect_n must be at least 2")
        if height < connect_n and width < connect_n:
            raise ValueError(
                f"no line of {connect_n} fits on a {height}x{width} board"
            )
        self.height = height
        self.width = width
        self.connect_n = connect_n
        self.num_actions = width

    def initial_state(self) -> BoardState:
        board = np.zeros((self.height, self.width), dtype=np.int8)
        return BoardState(board, to_move=0, move_count=0)

    def legal_actions(self, state: BoardState) -> np.ndarray:
        if state.terminal:
            raise TerminalStateError("no legal actions in a terminal state")
        return np.flatnonzero(state.board[0] == EMPTY)

    def apply(self, state: BoardState, action: int) -> StepResult:
        if state.terminal:
            raise TerminalStateError("cannot act in a terminal state")
        action = int(action)
        if not 0 <= action < self.width or state.board[0, action] != EMPTY:
            raise IllegalActionError(f"column {action} is not playable")
        board = state.board.copy()
        col = board[:, action]
        row = int(np.flatnonzero(col == EMPTY)[-1])  # lowest empty cell
        player = state.to_move
        board[row, action] = player + 1

        won = self._completes_line(board, row, action, player + 1)
        move_count = state.move_count + 1
        full = move_count == self.height * self.width
        terminal = won or full
        winner: Optional[int] = player if won else None
        next_state = BoardState(board, 1 - player, move_count, terminal, winner)

        if won:
            rewards = (1.0, -1.0) if player == 0 else (-1.0, 1.0)
        else:
            rewards = (0.0, 0.0)
        return StepResult(next_state, terminal, winner, rewards)

    def _completes_line(self, board: np.ndarray, row: int, col: int, code: int) -> bool:
        n = self.connect_n
        for dr, dc in _DIRECTIONS:
            run = 1
            for sign in (1, -1):
                r, c = row + sign * dr, col + sign * dc
                while 0 <= r < self.height and 0 <= c < self.width and board[r, c] == code:
                    run += 1
                    r += sign * dr
                    c += sign * dc
            if run >= n:
                return True
        return False

    def mirror_state(self, state: BoardState) -> BoardState:
        return BoardState(
            state.board[:, ::-1],
            state.to_move,
            state.move_count,
            state.terminal,
            state.winner,
        )

    def mirror_policy(self, policy: np.ndarray) -> np.ndarray:
        return check_policy(policy)[::-1].copy()

    def reconstruct(self, board: np.ndarray, to_move: int) -> BoardState:
        """Rebuild a state from a raw board, recomputing terminality.

        Validates gravity and chip-count invariants so corrupted inputs are
        rejected rather than silently accepted.
        """
        board = np.asarray(board, dtype=np.int8)
        if board.shape != (self.height, self.width):
            raise ValueError("board shape mismatch")
        occupied = board != EMPTY
        if not np.all(occupied[1:] >= occupied[:-1]):
            raise ValueError("floating chip: gravity invariant violated")
        counts = [int(np.sum(board == 1)), int(np.sum(board == 2))]
        if abs(counts[0] - counts[1]) > 1:
            raise ValueError("chip counts differ by more than one")
        if counts[to_move] > counts[1 - to_move]:
            raise ValueError("player to move cannot have more chips on the board")
        move_count = counts[0] + counts[1]

        winner = self._find_winner(board)
        terminal = winner is not None or move_count == self.height * self.width
        return BoardState(board, to_move, move_count, terminal, winner)

    def _find_winner(self, board: np.ndarray) -> Optional[int]:
        for row in range(self.height):
            for col in range(self.width):
                code = board[row, col]
                if code == EMPTY:
                    continue
                for dr, dc in _DIRECTIONS:
                    r_end = row + (self.connect_n - 1) * dr
                    c_end = col + (self.connect_n - 1) * dc
                    if not (0 <= r_end < self.height and 0 <= c_end < self.width):
                        continue
                    if all(
                        board[row + k * dr, col + k * dc] == code
                        for k in range(1, self.connect_n)
                    ):
                        return int(code) - 1
        return None
