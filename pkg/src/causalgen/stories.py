"""Story bank for natural-language verbalization: commonsense stories from
the causal-inference literature, anti-commonsense variants produced by a
single variable substitution, and nonsense variants built from a fixed list
of invented words.
"""

from __future__ import annotations

import functools
import json
import random
from dataclasses import dataclass
from importlib import resources

SENSES = ("commonsense", "anticommonsense", "nonsense")


@dataclass(frozen=True)
class VariableForms:
    """Grammar forms of one binary variable: overall name plus noun, full
    sentence, attributive phrase, and conditional clause for each value."""

    overall: str
    noun: tuple[str, str]
    sent: tuple[str, str]
    attr: tuple[str, str]
    cond: tuple[str, str]

    @staticmethod
    def from_dict(d: dict) -> "VariableForms":
        return VariableForms(
            overall=d["overall"],
            noun=tuple(d["noun"]),
            sent=tuple(d["sent"]),
            attr=tuple(d["attr"]),
            cond=tuple(d["cond"]),
        )


@dataclass(frozen=True)
class Story:
    story_id: str
    graph_id: str
    sense: str
    forms: tuple[tuple[str, VariableForms], ...]  # keyed by graph node name

    def var(self, name: str) -> VariableForms:
        for key, forms in self.forms:
            if key == name:
                return forms
        raise KeyError(name)


@functools.lru_cache(maxsize=1)
def _bank() -> dict:
    with resources.files("causalgen.data").joinpath("stories.json").open() as f:
        return json.load(f)


@functools.lru_cache(maxsize=1)
def commonsense_stories() -> dict[str, tuple[Story, ...]]:
    """Commonsense stories grouped by graph id."""
    grouped: dict[str, list[Story]] = {}
    for entry in _bank()["stories"]:
        story = Story(
            story_id=entry["id"],
            graph_id=entry["graph"],
            sense="commonsense",
            forms=tuple(
                (name, VariableForms.from_dict(d))
                for name, d in entry["variables"].items()
            ),
        )
        grouped.setdefault(story.graph_id, []).append(story)
    return {g: tuple(stories) for g, stories in grouped.items()}


@functools.lru_cache(maxsize=1)
def replacement_forms() -> tuple[tuple[tuple[str, VariableForms], ...], tuple[tuple[str, VariableForms], ...]]:
    """(effect replacements, treatment replacements) for anti-commonsense
    variants, as (id, forms) pairs."""
    bank = _bank()
    y_repl = tuple(
        (d["id"], VariableForms.from_dict(d)) for d in bank["y_replacements"]
    )
    x_repl = tuple(
        (d["id"], VariableForms.from_dict(d)) for d in bank["x_replacements"]
    )
    return y_repl, x_repl


@functools.lru_cache(maxsize=1)
def nonsense_words() -> tuple[str, ...]:
    return tuple(_bank()["nonsense_words"])


def anticommonsense_story(base: Story, treatment: str, outcome: str, rng: random.Random) -> Story:
    """Swap exactly one variable of a commonsense story: either the effect
    for an implausible attribute or the treatment for an irrelevant one."""
    y_repl, x_repl = replacement_forms()
    if rng.random() < 0.5:
        target, pool = outcome, y_repl
    else:
        target, pool = treatment, x_repl
    repl_id, repl = pool[rng.randrange(len(pool))]
    forms = tuple(
        (name, repl if name == target else f) for name, f in base.forms
    )
    return Story(
        story_id=f"{base.story_id}~anti:{repl_id}",
        graph_id=base.graph_id,
        sense="anticommonsense",
        forms=forms,
    )


def _nonsense_forms(word: str) -> VariableForms:
    return VariableForms(
        overall=word,
        noun=(f"not {word}", word),
        sent=(f"the individual is not {word}", f"the individual is {word}"),
        attr=(
            f"individuals that are not {word}",
            f"individuals that are {word}",
        ),
        cond=(
            f"the individual had not been {word}",
            f"the individual had been {word}",
        ),
    )


def nonsense_story(graph_id: str, node_names, rng: random.Random) -> Story:
    """Variable names drawn from the fixed invented-word list, no two alike."""
    words = rng.sample(nonsense_words(), len(tuple(node_names)))
    forms = tuple(
        (name, _nonsense_forms(word)) for name, word in zip(node_names, words)
    )
    return Story(
        story_id="nonsense:" + "-".join(words),
        graph_id=graph_id,
        sense="nonsense",
        forms=forms,
    )


def pick_story(
    graph_id: str,
    node_names,
    treatment: str,
    outcome: str,
    sense: str,
    rng: random.Random,
) -> Story:
    bank = commonsense_stories()[graph_id]
    if sense == "nonsense":
        return nonsense_story(graph_id, node_names, rng)
    base = bank[rng.randrange(len(bank))]
    if sense == "commonsense":
        return base
    if sense == "anticommonsense":
        return anticommonsense_story(base, treatment, outcome, rng)
    raise ValueError(f"unknown sense {sense!r}")
