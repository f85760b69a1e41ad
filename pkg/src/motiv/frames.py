"""The twelve moral frames: six virtue/vice pairs used to label tweets."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Polarity(str, Enum):
    VIRTUE = "virtue"
    VICE = "vice"


@dataclass(frozen=True, order=True)
class MoralFrame:
    name: str
    polarity: Polarity
    pair_id: int


# Canonical order: pairs in fixed order, virtue before vice within each pair.
FRAMES: tuple[MoralFrame, ...] = (
    MoralFrame("Care", Polarity.VIRTUE, 1),
    MoralFrame("Harm", Polarity.VICE, 1),
    MoralFrame("Loyalty", Polarity.VIRTUE, 2),
    MoralFrame("Betrayal", Polarity.VICE, 2),
    MoralFrame("Authority", Polarity.VIRTUE, 3),
    MoralFrame("Subversion", Polarity.VICE, 3),
    MoralFrame("Purity", Polarity.VIRTUE, 4),
    MoralFrame("Degradation", Polarity.VICE, 4),
    MoralFrame("Fairness", Polarity.VIRTUE, 5),
    MoralFrame("Injustice", Polarity.VICE, 5),
    MoralFrame("Freedom", Polarity.VIRTUE, 6),
    MoralFrame("Oppression", Polarity.VICE, 6),
)

FRAME_NAMES: tuple[str, ...] = tuple(f.name for f in FRAMES)
FRAME_INDEX: dict[str, int] = {f.name: i for i, f in enumerate(FRAMES)}

_BY_LOWER = {f.name.lower(): f for f in FRAMES}


def frame_by_name(name: str) -> MoralFrame:
    """Case-insensitive lookup of a frame by its canonical name.

    Raises KeyError listing the valid names when `name` is not one of the 12.
    """
    frame = _BY_LOWER.get(name.strip().lower())
    if frame is None:
        raise KeyError(
            f"unknown frame {name!r}; expected one of: {', '.join(FRAME_NAMES)}"
        )
    return frame
