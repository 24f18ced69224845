"""Weight schedules and the configuration object shared by all tree-distance code.

A weight function assigns a multiplier ``w(d)`` to each tree level ``d``.
When two trees are compared, the matching between the child subtrees of
depth-``d`` roots is scaled by ``w(d - 1)``, so a depth-``L`` computation only
ever evaluates ``w(1) .. w(L - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

_NORMS = ("l1", "l2")

# Reserved preset name: the binomial-coefficient schedule sketched in
# Chuang & Jegelka (2022) is not pinned to concrete constants here, so the
# alias is rejected rather than silently guessed.  See README, "Weight
# presets".
_PASCAL_MSG = (
    "weight preset 'pascal' is reserved but not defined in this package; "
    "its constants come from an external reference that does not pin them. "
    "Use 'const:<float>' or 'table:w1,w2,...' instead (see README, Weight presets)."
)


@dataclass(frozen=True)
class WeightFn:
    """Level-weight schedule, either a constant or an explicit table.

    ``table`` entry ``i`` (0-based) is the weight of level ``i + 1``.
    """

    kind: str  # "const" | "table"
    value: float = 1.0
    table: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("const", "table"):
            raise ConfigError(f"unknown weight kind {self.kind!r}")
        if self.kind == "const":
            if not (self.value > 0.0):
                raise ConfigError("constant weight must be positive")
        else:
            if not self.table:
                raise ConfigError("weight table must be non-empty")
            if any(not (w > 0.0) for w in self.table):
                raise ConfigError("weight table entries must be positive")

    def weight(self, level: int) -> float:
        """Return w(level) for level >= 1."""
        if level < 1:
            raise ConfigError(f"weight level must be >= 1, got {level}")
        if self.kind == "const":
            return self.value
        if level > len(self.table):
            raise ConfigError(
                f"weight table has {len(self.table)} entries but level "
                f"{level} was requested (depth exceeds the table)"
            )
        return self.table[level - 1]

    def spec_string(self) -> str:
        """Canonical textual form, reparseable by :func:`parse_weights`."""
        if self.kind == "const":
            return f"const:{self.value!r}"
        return "table:" + ",".join(repr(w) for w in self.table)


def parse_weights(text: str) -> WeightFn:
    """Parse a weight spec of the form ``const:<x>`` or ``table:w1,w2,...``."""
    if text.strip().lower() == "pascal":
        raise ConfigError(_PASCAL_MSG)
    head, sep, rest = text.partition(":")
    if not sep:
        raise ConfigError(f"malformed weight spec {text!r}; expected 'const:<x>' or 'table:...'")
    head = head.strip().lower()
    try:
        if head == "const":
            return WeightFn("const", value=float(rest))
        if head == "table":
            entries = tuple(float(tok) for tok in rest.split(",") if tok.strip())
            return WeightFn("table", table=entries)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"malformed weight spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown weight preset {head!r}; expected 'const' or 'table'")


def const_weights(value: float = 1.0) -> WeightFn:
    return WeightFn("const", value=value)


@dataclass(frozen=True)
class TmdConfig:
    """Depth, weight schedule and feature norm for tree-distance computations."""

    depth: int
    weights: WeightFn = field(default_factory=const_weights)
    feature_norm: str = "l2"

    def __post_init__(self):
        if not isinstance(self.depth, int) or self.depth < 1:
            raise ConfigError(f"depth must be an integer >= 1, got {self.depth!r}")
        if self.feature_norm not in _NORMS:
            raise ConfigError(f"feature_norm must be one of {_NORMS}, got {self.feature_norm!r}")
        # Fail at construction time, not mid-recursion, when a table is short.
        for level in range(1, self.depth):
            self.weights.weight(level)

    def level_weight(self, level: int) -> float:
        return self.weights.weight(level)
