"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class ExplanError(Exception):
    """Base class for all toolkit errors."""


# -- PDDL frontend ------------------------------------------------------------

class PddlError(ExplanError):
    """Base class for parse/ground failures."""


class PddlSyntaxError(PddlError):
    def __init__(self, message: str, line: int | None = None, token: str | None = None):
        loc = f" at line {line}" if line is not None else ""
        tok = f" near {token!r}" if token else ""
        super().__init__(f"{message}{loc}{tok}")
        self.line = line
        self.token = token


class UnsupportedFeature(PddlError):
    """A PDDL construct outside the supported STRIPS subset."""

    def __init__(self, construct: str, line: int | None = None):
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"unsupported PDDL construct: {construct}{loc}")
        self.construct = construct


class UndeclaredSymbol(PddlError):
    pass


class TypeMismatch(PddlError):
    pass


class ArityMismatch(PddlError):
    pass


class GroundingError(PddlError):
    pass


# -- model core ---------------------------------------------------------------

class ModelError(ExplanError):
    pass


class UniverseMismatch(ModelError):
    """The two models do not share fact/action universes."""


class UnknownAction(ModelError):
    pass


class UnknownFact(ModelError):
    pass


class UnknownFeature(ModelError):
    """A feature name does not resolve against the model universe."""


# -- planning -----------------------------------------------------------------

class PlanningError(ExplanError):
    pass


class PrefixNotExecutable(PlanningError):
    def __init__(self, step: int):
        super().__init__(f"forced prefix is not executable at step {step}")
        self.step = step


class InconsistentTask(PlanningError):
    """The unconstrained task is unsolvable where a plan is required."""


# -- reconciliation -----------------------------------------------------------

class ReconcileError(ExplanError):
    pass


class ExtraFeatures(ReconcileError):
    """The human model carries features absent from the robot model."""

    def __init__(self, names: list[str]):
        super().__init__(
            "human model has features outside the robot model "
            f"(removal-only reconciliation is supported): {', '.join(names)}"
        )
        self.names = names


class NonOptimalPlan(ReconcileError):
    """The plan to explain is not cost-optimal under the robot model."""


class NonCanonicalPlan(ReconcileError):
    """The plan to explain differs from the canonical planner output."""


class NotReconcilable(ReconcileError):
    """Internal error: the full feature diff failed the completeness test."""


class SearchExhausted(ReconcileError):
    pass


# -- oracle -------------------------------------------------------------------

class GuardExceeded(ExplanError):
    """An oracle size guard was exceeded; shrink the instance."""
