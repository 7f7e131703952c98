"""Go board state, capture resolution, move bookkeeping, and SGF emission.

Coordinates are (col, row), 0-based, origin at the grid corner nearest the
photo's top-left at game start; the same convention is written into session
files and SGF output so every consumer agrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EMPTY, BLACK, WHITE = 0, 1, 2
_SGF_LETTERS = "abcdefghijklmnopqrs"


class IllegalMove(Exception):
    """Move contradicts the rules: occupied point or suicide."""


def opponent(color: int) -> int:
    if color == BLACK:
        return WHITE
    if color == WHITE:
        return BLACK
    raise ValueError(f"not a stone color: {color}")


def color_name(color: int) -> str:
    return {EMPTY: "empty", BLACK: "black", WHITE: "white"}[color]


@dataclass(frozen=True)
class BoardState:
    """Immutable n x n occupancy grid plus the move counter."""

    size: int
    cells: np.ndarray
    move_number: int = 0
    ko_point: tuple[int, int] | None = None

    @classmethod
    def empty(cls, size: int) -> "BoardState":
        if size not in (9, 13, 19):
            raise ValueError("board size must be 9, 13 or 19")
        return cls(size=size, cells=np.zeros((size, size), dtype=np.int8))

    def stone_at(self, coord: tuple[int, int]) -> int:
        col, row = coord
        return int(self.cells[row, col])

    def points_of(self, color: int) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.cells == color)
        return [(int(c), int(r)) for r, c in zip(rows, cols)]

    def empty_points(self) -> list[tuple[int, int]]:
        return self.points_of(EMPTY)


def _neighbors(size: int, coord: tuple[int, int]):
    col, row = coord
    if col > 0:
        yield (col - 1, row)
    if col < size - 1:
        yield (col + 1, row)
    if row > 0:
        yield (col, row - 1)
    if row < size - 1:
        yield (col, row + 1)


def _group_and_liberties(cells: np.ndarray, coord: tuple[int, int]):
    """Flood fill of the group at coord; returns (group set, liberty set)."""
    size = cells.shape[0]
    color = cells[coord[1], coord[0]]
    group = {coord}
    liberties = set()
    frontier = [coord]
    while frontier:
        current = frontier.pop()
        for nb in _neighbors(size, current):
            v = cells[nb[1], nb[0]]
            if v == color and nb not in group:
                group.add(nb)
                frontier.append(nb)
            elif v == EMPTY:
                liberties.add(nb)
    return group, liberties


def apply_move(
    state: BoardState, color: int, coord: tuple[int, int]
) -> tuple[BoardState, list[tuple[int, int]], list[str]]:
    """Place a stone, resolve captures, and return (new state, captured
    points, warnings).

    Occupied points and suicide raise :class:`IllegalMove`; an immediate ko
    recapture is allowed (the photos are the ground truth) but reported as a
    sequencing warning.
    """
    if color not in (BLACK, WHITE):
        raise ValueError("move color must be black or white")
    col, row = coord
    if not (0 <= col < state.size and 0 <= row < state.size):
        raise IllegalMove(f"coordinate {coord} outside board")
    if state.cells[row, col] != EMPTY:
        raise IllegalMove(f"point {coord} is occupied")
    warnings: list[str] = []
    if state.ko_point == coord:
        warnings.append(f"move {state.move_number + 1} at {coord} retakes a ko immediately")

    cells = state.cells.copy()
    cells[row, col] = color
    captured: list[tuple[int, int]] = []
    for nb in _neighbors(state.size, coord):
        if cells[nb[1], nb[0]] == opponent(color):
            group, libs = _group_and_liberties(cells, nb)
            if not libs:
                for g in group:
                    if g not in captured:
                        captured.append(g)
    for c, r in captured:
        cells[r, c] = EMPTY
    if not captured:
        _, libs = _group_and_liberties(cells, coord)
        if not libs:
            raise IllegalMove(f"suicide at {coord}")

    ko = None
    if len(captured) == 1:
        group, libs = _group_and_liberties(cells, coord)
        if len(group) == 1 and len(libs) == 1:
            ko = captured[0]
    return (
        BoardState(state.size, cells, state.move_number + 1, ko),
        sorted(captured),
        warnings,
    )


@dataclass(frozen=True)
class Move:
    color: int
    coord: tuple[int, int] | None  # None is a pass
    photo_index: int


@dataclass
class GameRecord:
    """Ordered reconstructed moves plus the metadata the SGF header needs."""

    size: int
    moves: list[Move] = field(default_factory=list)
    black_player: str = ""
    white_player: str = ""
    event: str = ""
    date: str = ""

    def append(self, color: int, coord: tuple[int, int] | None, photo_index: int) -> None:
        if self.moves and photo_index < self.moves[-1].photo_index:
            raise ValueError("photo indices must be non-decreasing")
        self.moves.append(Move(color, coord, photo_index))

    def replay(self) -> BoardState:
        state = BoardState.empty(self.size)
        for move in self.moves:
            if move.coord is not None:
                state, _, _ = apply_move(state, move.color, move.coord)
        return state


def _sgf_coord(coord: tuple[int, int] | None) -> str:
    if coord is None:
        return ""
    col, row = coord
    return _SGF_LETTERS[col] + _SGF_LETTERS[row]


def _sgf_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("]", "\\]")


def write_sgf(record: GameRecord) -> str:
    """FF[4] SGF document for a reconstructed game."""
    props = [f"FF[4]", "GM[1]", f"SZ[{record.size}]", "CA[UTF-8]"]
    if record.black_player:
        props.append(f"PB[{_sgf_escape(record.black_player)}]")
    if record.white_player:
        props.append(f"PW[{_sgf_escape(record.white_player)}]")
    if record.event:
        props.append(f"EV[{_sgf_escape(record.event)}]")
    if record.date:
        props.append(f"DT[{_sgf_escape(record.date)}]")
    parts = ["(;" + "".join(props)]
    for move in record.moves:
        tag = "B" if move.color == BLACK else "W"
        parts.append(f";{tag}[{_sgf_coord(move.coord)}]")
    parts.append(")")
    return "".join(parts)


def parse_sgf(text: str) -> GameRecord:
    """Read back an SGF produced by :func:`write_sgf` (round-trip reader)."""
    import re

    size_match = re.search(r"SZ\[(\d+)\]", text)
    if not size_match:
        raise ValueError("missing SZ property")
    record = GameRecord(size=int(size_match.group(1)))
    for m in re.finditer(r"PB\[((?:[^\]\\]|\\.)*)\]", text):
        record.black_player = m.group(1).replace("\\]", "]").replace("\\\\", "\\")
    for m in re.finditer(r"PW\[((?:[^\]\\]|\\.)*)\]", text):
        record.white_player = m.group(1).replace("\\]", "]").replace("\\\\", "\\")
    header_end = text.index(";") + 1
    body = text[header_end:]
    for m in re.finditer(r";(B|W)\[([a-s]{0,2})\]", body):
        color = BLACK if m.group(1) == "B" else WHITE
        raw = m.group(2)
        coord = None
        if raw:
            coord = (_SGF_LETTERS.index(raw[0]), _SGF_LETTERS.index(raw[1]))
        record.append(color, coord, photo_index=len(record.moves))
    return record
