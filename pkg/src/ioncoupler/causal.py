"""Causal-equality notation: parser, composition rules and derivation checker.

A causal relation is written ``LEFT ARROW RIGHT`` where the arrow says which side
is the independent quantity::

    y ->= f      y causes f
    y <-= f      f causes y
    y <->= f     y and f cause each other
    f ~corr= g   f and g are correlated through a common cause
    f ~join= g   f and g are both causes of a common effect
    f ?= g       relationship unknown

Unicode spellings (``→=``, ``←=``, ``↔=``, ``⌒⌒=``, ``>-<=``, ...) are accepted on
input. Labels are opaque, whitespace-free expressions; a trailing ``_<digits>``
is read as a subscript index.
"""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ioncoupler.errors import CausalParseError, CausalStructureError, NonInvertibleError

logger = logging.getLogger(__name__)


class Arrow(Enum):
    FORWARD = "->="
    BACKWARD = "<-="
    BIDIRECTIONAL = "<->="
    CORRELATION = "~corr="
    COMMON_EFFECT = "~join="
    UNKNOWN = "?="

    @property
    def symmetric(self) -> bool:
        return self not in (Arrow.FORWARD, Arrow.BACKWARD)

    @property
    def mirrored(self) -> Arrow:
        """The arrow that says the same thing with the sides exchanged."""
        if self is Arrow.FORWARD:
            return Arrow.BACKWARD
        if self is Arrow.BACKWARD:
            return Arrow.FORWARD
        return self


ARROW_TOKENS: dict[str, Arrow] = {
    "->=": Arrow.FORWARD,
    "→=": Arrow.FORWARD,
    "→": Arrow.FORWARD,
    "<-=": Arrow.BACKWARD,
    "←=": Arrow.BACKWARD,
    "←": Arrow.BACKWARD,
    "<->=": Arrow.BIDIRECTIONAL,
    "↔=": Arrow.BIDIRECTIONAL,
    "↔": Arrow.BIDIRECTIONAL,
    "~corr=": Arrow.CORRELATION,
    "⌒⌒=": Arrow.CORRELATION,
    "↶↷=": Arrow.CORRELATION,
    "~join=": Arrow.COMMON_EFFECT,
    ">-<=": Arrow.COMMON_EFFECT,
    "↷↶=": Arrow.COMMON_EFFECT,
    "?=": Arrow.UNKNOWN,
}

_UNICODE_ARROW_CHARS = "→←↔⌒↶↷"
_ARROW_RUN = re.compile(r"~\w*=?|[<>\-=?" + _UNICODE_ARROW_CHARS + r"]+")
_INDEX = re.compile(r"^(.+)_(\d+)$")

UNDEFINED_IN_TABLE = "UNDEFINED-IN-TABLE"
MISMATCHED_INDICES = "MISMATCHED-INDICES"
EXTENDED_FORWARD_CHAIN = "EXTENDED forward-chain transitivity"


@dataclass(frozen=True, order=True)
class Term:
    """One side of a relation; the label is kept verbatim."""

    label: str

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("term label must be non-empty")

    @property
    def name(self) -> str:
        match = _INDEX.match(self.label)
        return match.group(1) if match else self.label

    @property
    def index(self) -> str | None:
        match = _INDEX.match(self.label)
        return match.group(2) if match else None

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class CausalRelation:
    left: Term
    arrow: Arrow
    right: Term

    def __str__(self) -> str:
        return f"{self.left} {self.arrow.value} {self.right}"

    @property
    def terms(self) -> tuple[Term, Term]:
        return (self.left, self.right)

    def canonical_key(self) -> tuple[str, str, str]:
        """Identity of the statement: backward arrows turned forward, symmetric sides sorted."""
        if self.arrow is Arrow.BACKWARD:
            return (Arrow.FORWARD.value, self.right.label, self.left.label)
        if self.arrow.symmetric:
            a, b = sorted((self.left.label, self.right.label))
            return (self.arrow.value, a, b)
        return (self.arrow.value, self.left.label, self.right.label)


@dataclass(frozen=True)
class NoRelation:
    reason: str
    annotation: str = UNDEFINED_IN_TABLE

    def __str__(self) -> str:
        return f"no relation [{self.annotation}]: {self.reason}"


@dataclass(frozen=True)
class DerivedRelation:
    relation: CausalRelation
    rule: str
    parents: tuple[CausalRelation, ...] = ()


@dataclass(frozen=True)
class Derivation:
    premises: tuple[CausalRelation, ...]
    conclusions: tuple[DerivedRelation, ...]
    saturated: bool = True  # False when the round limit was hit before a fixpoint

    def lookup(self, relation: CausalRelation) -> DerivedRelation | None:
        key = relation.canonical_key()
        for premise in self.premises:
            if premise.canonical_key() == key:
                return DerivedRelation(premise, "premise")
        for derived in self.conclusions:
            if derived.relation.canonical_key() == key:
                return derived
        return None


# --- parsing ---


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _is_arrowish(token: str) -> bool:
    return "=" in token or token.startswith("~") or any(c in token for c in _UNICODE_ARROW_CHARS)


def parse_relation(text: str) -> CausalRelation:
    """Parse ``LEFT ARROW RIGHT``. Errors carry the byte offset of the offending token."""
    arrow_match = next((m for m in _ARROW_RUN.finditer(text) if _is_arrowish(m.group())), None)
    if arrow_match is None:
        raise CausalParseError("missing arrow", _byte_offset(text, len(text.rstrip())), text)
    token = arrow_match.group()
    start, end = arrow_match.span()
    if token not in ARROW_TOKENS:
        raise CausalParseError(f"unknown arrow {token!r}", _byte_offset(text, start), text)

    left_words = list(re.finditer(r"\S+", text[:start]))
    if not left_words:
        raise CausalParseError("empty left label", _byte_offset(text, start), text)
    if len(left_words) > 1:
        raise CausalParseError(
            "unexpected text before arrow", _byte_offset(text, left_words[1].start()), text
        )

    right_words = [
        (m.start() + end, m.group()) for m in re.finditer(r"\S+", text[end:])
    ]
    if not right_words:
        raise CausalParseError("empty right label", _byte_offset(text, end), text)
    if len(right_words) > 1:
        raise CausalParseError("trailing garbage", _byte_offset(text, right_words[1][0]), text)
    right_start, right_label = right_words[0]
    for extra in _ARROW_RUN.finditer(right_label):
        if _is_arrowish(extra.group()):
            raise CausalParseError(
                "trailing garbage", _byte_offset(text, right_start + extra.start()), text
            )

    return CausalRelation(
        left=Term(left_words[0].group()),
        arrow=ARROW_TOKENS[token],
        right=Term(right_label),
    )


def describe(relation: CausalRelation) -> str:
    """Plain-language reading of a single relation."""
    left, right = relation.left, relation.right
    match relation.arrow:
        case Arrow.FORWARD:
            return f"{left} causes {right}; {left} is the independent variable"
        case Arrow.BACKWARD:
            return f"{right} causes {left}; {right} is the independent variable"
        case Arrow.BIDIRECTIONAL:
            return f"{left} and {right} are bi-directionally causal"
        case Arrow.CORRELATION:
            return f"{left} and {right} are correlated through a common cause"
        case Arrow.COMMON_EFFECT:
            return f"{left} and {right} can each cause a common effect"
        case _:
            return f"the causal relationship between {left} and {right} is unknown"


# --- single-relation rewrites ---


def flip(relation: CausalRelation) -> CausalRelation:
    """The same statement written with the sides exchanged."""
    return CausalRelation(relation.right, relation.arrow.mirrored, relation.left)


def invert(relation: CausalRelation) -> CausalRelation:
    """The converse statement; only defined for relations without a direction."""
    if not relation.arrow.symmetric:
        raise NonInvertibleError(relation)
    return CausalRelation(relation.right, relation.arrow, relation.left)


# --- composition ---

F, B, BI = Arrow.FORWARD, Arrow.BACKWARD, Arrow.BIDIRECTIONAL

# (arrow of "y ? f", arrow of "y ? g") -> (rule name, result builder on (f, g))
_RULES: dict[tuple[Arrow, Arrow], tuple[str, Any]] = {
    (F, F): ("y causes both", lambda f, g: CausalRelation(f, Arrow.CORRELATION, g)),
    (F, B): ("g causes f via y", lambda f, g: CausalRelation(g, F, f)),
    (B, F): ("f causes g via y", lambda f, g: CausalRelation(g, B, f)),
    (B, B): ("f or g can cause y", lambda f, g: CausalRelation(f, Arrow.COMMON_EFFECT, g)),
    (BI, F): ("y mutual with f, f causes g", lambda f, g: CausalRelation(f, F, g)),
    (BI, B): ("y mutual with f, g causes f", lambda f, g: CausalRelation(g, F, f)),
    (F, BI): ("y mutual with g, g causes f", lambda f, g: CausalRelation(g, F, f)),
    (B, BI): ("y mutual with g, f causes g", lambda f, g: CausalRelation(f, F, g)),
    (BI, BI): ("f and g mutual via y", lambda f, g: CausalRelation(f, BI, g)),
}


def _orient(relation: CausalRelation, term: Term) -> CausalRelation:
    return relation if relation.left == term else flip(relation)


def _shared_terms(
    r1: CausalRelation, r2: CausalRelation
) -> tuple[Term, Term] | None:
    for a in r1.terms:
        for b in r2.terms:
            if a == b:
                return a, b
    for a in r1.terms:
        for b in r2.terms:
            if a.name == b.name:
                return a, b
    return None


def compose_with_rule(
    r1: CausalRelation, r2: CausalRelation
) -> tuple[CausalRelation | NoRelation, str]:
    """``compose`` plus the name of the rule that fired."""
    shared = _shared_terms(r1, r2)
    if shared is None:
        raise CausalStructureError(f"'{r1}' and '{r2}' share no variable")
    a, b = shared
    if a != b:
        reason = f"mismatched subscript indices: {a} and {b}"
        return NoRelation(reason, MISMATCHED_INDICES), "mismatched indices"
    first = _orient(r1, a)
    second = _orient(r2, a)
    rule = _RULES.get((first.arrow, second.arrow))
    if rule is None:
        reason = f"no rule composes {first.arrow.value} with {second.arrow.value}"
        return NoRelation(reason), UNDEFINED_IN_TABLE
    name, build = rule
    return build(first.right, second.right), name


def compose(r1: CausalRelation, r2: CausalRelation) -> CausalRelation | NoRelation:
    """Relate the two non-shared sides of relations that share one variable."""
    return compose_with_rule(r1, r2)[0]


def _forward_chain(r1: CausalRelation, r2: CausalRelation) -> CausalRelation | None:
    if r1.arrow.symmetric or r2.arrow.symmetric:
        return None
    c1 = r1 if r1.arrow is F else flip(r1)
    c2 = r2 if r2.arrow is F else flip(r2)
    if c1.right == c2.left and c1.left != c2.right:
        return CausalRelation(c1.left, F, c2.right)
    return None


def closure(premises: Iterable[CausalRelation], max_rounds: int = 16) -> Derivation:
    """Saturate a premise set under the composition rules and forward-chain transitivity.

    Each conclusion records the single rule and the two relations it came from.
    """
    premises = tuple(premises)
    known: dict[tuple[str, str, str], DerivedRelation] = {
        p.canonical_key(): DerivedRelation(p, "premise") for p in premises
    }
    saturated = True
    for _ in range(max_rounds):
        current = [d.relation for d in known.values()]
        added = False
        for i, r1 in enumerate(current):
            for j, r2 in enumerate(current):
                if i == j:
                    continue
                candidates: list[tuple[CausalRelation, str]] = []
                chained = _forward_chain(r1, r2)
                if chained is not None:
                    candidates.append((chained, EXTENDED_FORWARD_CHAIN))
                if _shared_terms(r1, r2) is not None:
                    result, rule = compose_with_rule(r1, r2)
                    if isinstance(result, CausalRelation) and result.left != result.right:
                        candidates.append((result, rule))
                for relation, rule in candidates:
                    key = relation.canonical_key()
                    if key not in known:
                        known[key] = DerivedRelation(relation, rule, (r1, r2))
                        added = True
        if not added:
            break
    else:
        saturated = False
        logger.warning(
            "closure stopped after %d rounds without reaching a fixpoint; "
            "conclusions may be incomplete",
            max_rounds,
        )
    conclusions = tuple(d for d in known.values() if d.rule != "premise")
    logger.debug("closure of %d premises: %d conclusions", len(premises), len(conclusions))
    return Derivation(premises=premises, conclusions=conclusions, saturated=saturated)


# --- derivation scripts ---


@dataclass(frozen=True)
class ClaimVerdict:
    claim: CausalRelation
    derivable: bool
    rule: str | None = None
    parents: tuple[CausalRelation, ...] = ()

    @property
    def verdict(self) -> str:
        return "DERIVABLE" if self.derivable else "NOT-DERIVABLE"


@dataclass(frozen=True)
class ScriptError:
    line: int
    offset: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, byte {self.offset}: {self.message}"


@dataclass(frozen=True)
class DerivationReport:
    derivation: Derivation
    verdicts: tuple[ClaimVerdict, ...]
    errors: tuple[ScriptError, ...] = field(default=())

    @property
    def all_derivable(self) -> bool:
        return all(v.derivable for v in self.verdicts)

    def to_text(self) -> str:
        lines = [f"error: {e}" for e in self.errors]
        for v in self.verdicts:
            detail = f" ({v.rule})" if v.rule else ""
            lines.append(f"{v.verdict}: {v.claim}{detail}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, Any]:
        return {
            "premises": [str(p) for p in self.derivation.premises],
            "derived": [
                {"relation": str(d.relation), "rule": d.rule, "from": [str(p) for p in d.parents]}
                for d in self.derivation.conclusions
            ],
            "claims": [
                {
                    "claim": str(v.claim),
                    "verdict": v.verdict,
                    "rule": v.rule,
                    "from": [str(p) for p in v.parents],
                }
                for v in self.verdicts
            ],
            "errors": [{"line": e.line, "offset": e.offset, "message": e.message}
                       for e in self.errors],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def check_derivation(script: str) -> DerivationReport:
    """Check each ``claim`` line of a script against the closure of its ``premise`` lines.

    Blank lines and ``#`` comments are skipped. Malformed lines are reported one
    by one in ``errors``; the remaining lines are still checked.
    """
    premises: list[CausalRelation] = []
    claims: list[CausalRelation] = []
    errors: list[ScriptError] = []
    for number, raw in enumerate(script.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        keyword_match = re.match(r"\s*(\S+)\s*", line)
        assert keyword_match is not None
        keyword = keyword_match.group(1)
        body_start = keyword_match.end()
        if keyword not in ("premise", "claim"):
            offset = _byte_offset(line, keyword_match.start(1))
            errors.append(
                ScriptError(number, offset, f"expected 'premise' or 'claim', got {keyword!r}")
            )
            continue
        try:
            relation = parse_relation(line[body_start:])
        except CausalParseError as e:
            offset = _byte_offset(line, body_start) + e.offset
            errors.append(ScriptError(number, offset, str(e).rsplit(" at byte", 1)[0]))
            continue
        (premises if keyword == "premise" else claims).append(relation)

    derivation = closure(premises)
    verdicts = []
    for claim in claims:
        found = derivation.lookup(claim)
        if found is None:
            verdicts.append(ClaimVerdict(claim, derivable=False))
        else:
            verdicts.append(ClaimVerdict(claim, True, found.rule, found.parents))
    return DerivationReport(derivation=derivation, verdicts=tuple(verdicts), errors=tuple(errors))
