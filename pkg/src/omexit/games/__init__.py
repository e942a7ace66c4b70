from .base import (
    BoardState,
    Game,
    IllegalActionError,
    StepResult,
    TerminalStateError,
    check_policy,
    deserialize_state,
    serialize_state,
)
from .connect import ConnectGame
from .tictactoe import TicTacToeGame


def make_game(kind: str, height: int, width: int, connect_n: int) -> Game:
    """Game factory used by configuration loading."""
    if kind == "connect":
        return ConnectGame(height, width, connect_n)
    if kind == "tictactoe":
        if height != width:
            raise ValueError("tictactoe boards are square")
        return TicTacToeGame(height)
    raise ValueError(f"unknown game kind: {kind!r}")


def initial_state(height: int, width: int, connect_n: int) -> BoardState:
    """Empty connect board with player 0 to move."""
    return ConnectGame(height, width, connect_n).initial_state()


__all__ = [
    "BoardState",
    "ConnectGame",
    "Game",
    "IllegalActionError",
    "StepResult",
    "TerminalStateError",
    "TicTacToeGame",
    "check_policy",
    "deserialize_state",
    "initial_state",
    "make_game",
    "serialize_state",
]
