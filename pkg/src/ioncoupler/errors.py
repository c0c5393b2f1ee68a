"""Exception hierarchy shared by every ioncoupler module."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from ioncoupler.causal import CausalRelation


class CouplerError(Exception):
    """Base class for all ioncoupler errors."""


class ValidationError(CouplerError, ValueError):
    """An input violates a documented pre-condition."""


class ConfigError(ValidationError):
    """A configuration document has one or more violations."""

    def __init__(self, errors: list[str], source: str = "") -> None:
        self.errors = list(errors)
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(self.errors))


class UnsupportedConfigurationError(CouplerError):
    """The inputs are valid but describe a case the models do not cover."""


class NumericalError(CouplerError, ArithmeticError):
    """A numerical procedure failed (ill-conditioned system, non-finite state, ...)."""

    def __init__(self, message: str, diagnostic: str = "") -> None:
        self.diagnostic = diagnostic
        super().__init__(f"{message} ({diagnostic})" if diagnostic else message)


class CausalParseError(ValidationError):
    """A causal relation does not match the grammar."""

    def __init__(self, message: str, offset: int, text: str = "") -> None:
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte offset {offset}")


class CausalStructureError(ValidationError):
    """Two relations cannot be composed because they share no variable."""


class NonInvertibleError(CouplerError):
    """A one-way causal equality was asked to run backwards."""

    def __init__(self, relation: CausalRelation) -> None:
        self.relation = relation
        super().__init__(f"'{relation}' is a one-way causal equality and cannot be inverted")
