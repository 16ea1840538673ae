"""Grounded STRIPS models, the per-action feature mapping, diffs and edits.

Every model decomposes into unit features: one per (action, precondition
fact), (action, add fact), (action, delete fact), plus exactly one cost
feature per action.  Feature sets are the currency of explanation search.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

from .errors import UniverseMismatch, UnknownAction, UnknownFact, UnknownFeature

PRECONDITION = "precondition"
ADD_EFFECT = "add-effect"
DEL_EFFECT = "del-effect"
COST = "cost"

_KINDS = (PRECONDITION, ADD_EFFECT, DEL_EFFECT, COST)
_MARKER_RE = re.compile(r"-has-(precondition|add-effect|del-effect|cost)-")


@dataclass(frozen=True)
class GroundAction:
    name: str
    pre: frozenset[int]
    add: frozenset[int]
    delete: frozenset[int]
    cost: int

    def __post_init__(self):
        if self.add & self.delete:
            raise ValueError(f"action {self.name!r} adds and deletes the same fact")
        if self.cost < 1:
            raise ValueError(f"action {self.name!r} must have cost >= 1, got {self.cost}")


@dataclass(frozen=True)
class GroundedModel:
    """A grounded model: fact universe plus ground actions.

    Fact ids are dense indexes into ``fact_names``; action ids are positions
    in ``actions``.
    """

    fact_names: tuple[str, ...]
    actions: tuple[GroundAction, ...]

    def __post_init__(self):
        nf = len(self.fact_names)
        if len(set(self.fact_names)) != nf:
            raise ValueError("fact names are not unique")
        seen = set()
        for action in self.actions:
            if action.name in seen:
                raise ValueError(f"duplicate ground action {action.name!r}")
            seen.add(action.name)
            for fid in action.pre | action.add | action.delete:
                if not (0 <= fid < nf):
                    raise ValueError(f"action {action.name!r} references fact id {fid}")

    @cached_property
    def fact_ids(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.fact_names)}

    @cached_property
    def action_ids(self) -> dict[str, int]:
        return {a.name: i for i, a in enumerate(self.actions)}

    @property
    def action_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    def action(self, name: str) -> GroundAction:
        try:
            return self.actions[self.action_ids[name]]
        except KeyError:
            raise UnknownAction(f"no ground action named {name!r}") from None


@dataclass(frozen=True)
class ModelFeature:
    """One unit feature: a precondition/add/delete fact or the cost of an action."""

    action: str
    kind: str
    payload: str | int  # fact name, or the cost value for kind == COST

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == COST and not isinstance(self.payload, int):
            raise ValueError("cost feature payload must be an integer")
        if self.kind != COST and not isinstance(self.payload, str):
            raise ValueError("fact feature payload must be a fact name")

    @property
    def name(self) -> str:
        return f"{self.action}-has-{self.kind}-{self.payload}"

    def __str__(self) -> str:
        return self.name


def parse_feature_name(name: str, model: GroundedModel) -> ModelFeature:
    """Resolve a canonical feature name against a model's universe.

    Action and fact names may themselves contain hyphens, so every marker
    occurrence is tried until one resolves.
    """
    for m in _MARKER_RE.finditer(name):
        action = name[: m.start()]
        kind = m.group(1)
        payload = name[m.end():]
        if action not in model.action_ids:
            continue
        if kind == COST:
            if payload.isdigit():
                return ModelFeature(action, COST, int(payload))
        elif payload in model.fact_ids:
            return ModelFeature(action, kind, payload)
    raise UnknownFeature(f"feature {name!r} does not resolve against the model")


class FeatureSet:
    """An immutable set of features, iterated in canonical name order."""

    __slots__ = ("_feats", "_names")

    def __init__(self, features: Iterable[ModelFeature] = ()):
        feats = sorted(set(features), key=lambda f: f.name)
        costs_seen = set()
        for f in feats:
            if f.kind == COST:
                if f.action in costs_seen:
                    raise ValueError(f"two cost features for action {f.action!r}")
                costs_seen.add(f.action)
        object.__setattr__(self, "_feats", tuple(feats))
        object.__setattr__(self, "_names", frozenset(f.name for f in feats))

    def __iter__(self) -> Iterator[ModelFeature]:
        return iter(self._feats)

    def __len__(self) -> int:
        return len(self._feats)

    def __bool__(self) -> bool:
        return bool(self._feats)

    def __contains__(self, feature: ModelFeature) -> bool:
        return feature.name in self._names

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureSet) and self._feats == other._feats

    def __hash__(self) -> int:
        return hash(self._feats)

    def __or__(self, other: "FeatureSet") -> "FeatureSet":
        return FeatureSet((*self._feats, *other._feats))

    def __sub__(self, other: "FeatureSet") -> "FeatureSet":
        return FeatureSet(f for f in self._feats if f not in other)

    def __and__(self, other: "FeatureSet") -> "FeatureSet":
        return FeatureSet(f for f in self._feats if f in other)

    def issubset(self, other: "FeatureSet") -> bool:
        return self._names <= other._names

    def names(self) -> list[str]:
        return [f.name for f in self._feats]

    def __repr__(self) -> str:
        return f"FeatureSet({self.names()})"


@dataclass(frozen=True)
class ModelDiff:
    missing: FeatureSet  # robot features the human model lacks
    extra: FeatureSet    # human features absent from the robot model

    def to_json(self) -> dict:
        return {"missing": self.missing.names(), "extra": self.extra.names()}


def gamma(model: GroundedModel) -> FeatureSet:
    """Map a model to its full unit-feature set."""
    feats: list[ModelFeature] = []
    for action in model.actions:
        feats.append(ModelFeature(action.name, COST, action.cost))
        for fid in action.pre:
            feats.append(ModelFeature(action.name, PRECONDITION, model.fact_names[fid]))
        for fid in action.add:
            feats.append(ModelFeature(action.name, ADD_EFFECT, model.fact_names[fid]))
        for fid in action.delete:
            feats.append(ModelFeature(action.name, DEL_EFFECT, model.fact_names[fid]))
    return FeatureSet(feats)


def diff(mr: GroundedModel, mh: GroundedModel) -> ModelDiff:
    """Feature-level difference of two models over the same universe."""
    if mr.fact_names != mh.fact_names or mr.action_names != mh.action_names:
        raise UniverseMismatch(
            "models do not share fact/action universes; ground them together")
    gr, gh = gamma(mr), gamma(mh)
    return ModelDiff(missing=gr - gh, extra=gh - gr)


def model_from_features(
    features: FeatureSet,
    fact_names: tuple[str, ...],
    action_names: tuple[str, ...],
) -> GroundedModel:
    """Rebuild a model from a feature set over known fact/action universes.

    Every action must carry exactly one cost feature.
    """
    fact_ids = {name: i for i, name in enumerate(fact_names)}
    parts: dict[str, dict] = {
        name: {"pre": set(), "add": set(), "delete": set(), "cost": None}
        for name in action_names
    }
    for f in features:
        if f.action not in parts:
            raise UnknownAction(f"feature {f.name!r}: unknown action")
        slot = parts[f.action]
        if f.kind == COST:
            if slot["cost"] is not None:
                raise ValueError(f"action {f.action!r} has two cost features")
            slot["cost"] = f.payload
        else:
            if f.payload not in fact_ids:
                raise UnknownFact(f"feature {f.name!r}: unknown fact")
            key = {PRECONDITION: "pre", ADD_EFFECT: "add", DEL_EFFECT: "delete"}[f.kind]
            slot[key].add(fact_ids[f.payload])
    actions = []
    for name in action_names:
        slot = parts[name]
        if slot["cost"] is None:
            raise ValueError(f"action {name!r} has no cost feature")
        actions.append(GroundAction(
            name=name,
            pre=frozenset(slot["pre"]),
            add=frozenset(slot["add"]),
            delete=frozenset(slot["delete"]),
            cost=slot["cost"],
        ))
    return GroundedModel(fact_names=fact_names, actions=tuple(actions))


def _merged_features(model: GroundedModel, adds: FeatureSet) -> FeatureSet:
    base = gamma(model)
    replaced = cost_replacements(model, adds)
    return FeatureSet(
        [f for f in base if f not in replaced] + list(adds)
    )


def cost_replacements(model: GroundedModel, adds: FeatureSet) -> FeatureSet:
    """Existing cost features that adding ``adds`` would retire.

    An action has exactly one cost, so an incoming cost feature displaces the
    current one; callers that care report this alongside the edited model.
    """
    incoming_cost_actions = {f.action for f in adds if f.kind == COST}
    current = gamma(model)
    return FeatureSet(
        f for f in current
        if f.kind == COST and f.action in incoming_cost_actions and f not in adds
    )


def apply_features(model: GroundedModel, adds: FeatureSet) -> GroundedModel:
    """Return a new model whose feature set is gamma(model) union ``adds``.

    Adding a cost feature for an action replaces that action's current cost.
    The input model is untouched.
    """
    for f in adds:
        if f.action not in model.action_ids:
            raise UnknownAction(f"feature {f.name!r}: unknown action")
        if f.kind != COST and f.payload not in model.fact_ids:
            raise UnknownFact(f"feature {f.name!r}: unknown fact")
    merged = _merged_features(model, adds)
    return model_from_features(merged, model.fact_names, model.action_names)


def remove_features(model: GroundedModel, removals: FeatureSet) -> GroundedModel:
    """Return a new model with ``removals`` deleted from its feature set.

    Cost features cannot be removed (an action always has exactly one cost).
    Every removal must exist in the model; this is how human models are
    derived from robot models in the benchmark harness.
    """
    current = gamma(model)
    for f in removals:
        if f.kind == COST:
            raise UnknownFeature(
                f"cost feature {f.name!r} cannot be removed; costs are exchanged, not deleted")
        if f not in current:
            raise UnknownFeature(f"feature {f.name!r} is not present in the model")
    return model_from_features(current - removals, model.fact_names, model.action_names)
