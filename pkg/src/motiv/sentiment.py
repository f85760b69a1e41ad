"""Rule-based lexicon sentiment scoring with negation and booster handling.

Scores are reproducible from the shipped lexicon files alone: a token's
valence is flipped and damped by a preceding negator, nudged by preceding
boosters with distance decay, and the summed hits are squashed into (-1, 1).
All rule constants are configuration with the defaults below.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

_TOKEN_RE = re.compile(r"[\w']+", re.UNICODE)

SENTIMENT_CLASSES = ("positive", "neutral", "negative")


@dataclass(frozen=True)
class ScoringRules:
    negation_window: int = 3
    negation_damping: float = -0.74
    booster_weight: float = 0.29
    booster_decay: tuple[float, ...] = (1.0, 0.95, 0.9)
    normalization: float = 15.0


DEFAULT_RULES = ScoringRules()


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, float]
    boosters: dict[str, float] = field(default_factory=dict)
    negators: frozenset[str] = frozenset()

    def __post_init__(self):
        for name, tokens in (("entries", self.entries),
                             ("boosters", self.boosters),
                             ("negators", self.negators)):
            for tok in tokens:
                if tok != tok.lower() or not tok:
                    raise ValueError(f"lexicon {name} token {tok!r} must be lowercase")
        for tok, v in self.entries.items():
            if not -4.0 <= v <= 4.0:
                raise ValueError(f"valence for {tok!r} outside [-4, 4]: {v}")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def score_text(text: str, lexicon: Lexicon,
               rules: ScoringRules = DEFAULT_RULES) -> float:
    """Score a text in [-1, 1]; 0.0 for empty text or no lexicon hits.

    Negation applies before boosting, so a booster amplifies the sign the
    hit ends up with ("really not good" pushes further negative).
    """
    tokens = tokenize(text)
    total = 0.0
    window = rules.negation_window
    for i, tok in enumerate(tokens):
        valence = lexicon.entries.get(tok)
        if valence is None:
            continue
        v = valence
        lo = max(0, i - window)
        if any(t in lexicon.negators for t in tokens[lo:i]):
            v = v * rules.negation_damping
        sign = 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)
        for dist in range(1, window + 1):
            j = i - dist
            if j < 0:
                break
            inc = lexicon.boosters.get(tokens[j])
            if inc is not None:
                v += sign * rules.booster_weight * inc * rules.booster_decay[dist - 1]
        total += v
    return total / math.sqrt(total * total + rules.normalization)


def classify(score: float, threshold: float = 0.25) -> str:
    """Three-way sentiment class: > 0.25 positive, < -0.25 negative, else neutral."""
    if not -1.0 <= score <= 1.0:
        raise ValueError(f"sentiment score {score} outside [-1, 1]")
    if score > threshold:
        return "positive"
    if score < -threshold:
        return "negative"
    return "neutral"


def _parse_tsv(lines, what: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{what} line {lineno}: expected token<TAB>value")
        token, value = parts[0], float(parts[1])
        if token in out:
            raise ValueError(f"{what} line {lineno}: duplicate token {token!r}")
        out[token] = value
    return out


def _read_text(path) -> str:
    if isinstance(path, str):
        path = Path(path)
    return path.read_text(encoding="utf-8")


def load_lexicon(lexicon_path,
                 boosters_path=None,
                 negators_path=None) -> Lexicon:
    """Load lexicon.tsv (token<TAB>valence) plus optional boosters/negators files."""
    entries = _parse_tsv(_read_text(lexicon_path).splitlines(), "lexicon")
    boosters: dict[str, float] = {}
    negators: frozenset[str] = frozenset()
    if boosters_path is not None:
        boosters = _parse_tsv(_read_text(boosters_path).splitlines(), "boosters")
    if negators_path is not None:
        lines = _read_text(negators_path).splitlines()
        negators = frozenset(
            line.strip() for line in lines
            if line.strip() and not line.startswith("#")
        )
    return Lexicon(entries=entries, boosters=boosters, negators=negators)


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    """The lexicon shipped with the package."""
    data = resources.files("motiv") / "data"
    return load_lexicon(
        data / "lexicon.tsv", data / "boosters.tsv", data / "negators.txt"
    )
