"""Correlation-premise / causal-hypothesis dataset generation: label
hypotheses over Markov equivalence classes, verbalize premises and
hypotheses, split the records, and apply robustness perturbations.
"""

from __future__ import annotations

import hashlib
import random
import re
import string
from dataclasses import dataclass, replace
from enum import Enum

from .dags import RelationKind, default_names, enumerate_dags, relation_holds
from .independence import IndependenceStructure, Mec, cluster_mecs, mec_members

HYPOTHESIS_TEMPLATES: dict[RelationKind, str] = {
    RelationKind.IS_PARENT: "{i} directly causes {j}.",
    RelationKind.IS_ANCESTOR: "{i} causes something else which causes {j}.",
    RelationKind.IS_CHILD: "{j} directly causes {i}.",
    RelationKind.IS_DESCENDANT: "{j} is a cause for {i}, but not a direct one.",
    RelationKind.HAS_COLLIDER: "There exists at least one collider (i.e., common effect) of {i} and {j}.",
    RelationKind.HAS_CONFOUNDER: "There exists at least one confounder (i.e., common cause) of {i} and {j}.",
}

PARAPHRASE_TEMPLATES: dict[RelationKind, str] = {
    RelationKind.IS_PARENT: "{i} directly affects {j}.",
    RelationKind.IS_ANCESTOR: "{i} influences {j} through some mediator(s).",
    RelationKind.IS_CHILD: "{j} directly affects {i}.",
    RelationKind.IS_DESCENDANT: "{j} influences {i} through some mediator(s).",
    RelationKind.HAS_COLLIDER: "{i} and {j} together cause some other variable(s).",
    RelationKind.HAS_CONFOUNDER: "Some variable(s) cause(s) both {i} and {j}.",
}

# published test/dev sizes per node count; remainder goes to train
SPLIT_QUOTAS: dict[int, tuple[int, int]] = {
    2: (6, 6),
    3: (48, 42),
    4: (72, 72),
    5: (514, 482),
    6: (522, 474),
}

_REVERSED_ALPHABET = {
    c: string.ascii_uppercase[25 - k] for k, c in enumerate(string.ascii_uppercase)
}
_SINGLE_LETTER = re.compile(r"\b([A-Z])\b")


class TemplateVariant(Enum):
    ORIGINAL = "original"
    PARAPHRASED = "paraphrase"


@dataclass(frozen=True)
class Hypothesis:
    rel: RelationKind
    i: int
    j: int
    variant: TemplateVariant = TemplateVariant.ORIGINAL

    def __post_init__(self):
        if not self.i < self.j:
            raise ValueError("hypothesis pairs are normalized to i < j")


@dataclass(frozen=True)
class Record:
    premise: str
    hypothesis: str
    label: int
    n: int
    mec_id: str
    relation: str
    pair: tuple[int, int]
    variant: str
    split: str

    def to_json_dict(self) -> dict:
        return {
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "label": self.label,
            "n": self.n,
            "mec_id": self.mec_id,
            "relation": self.relation,
            "pair": list(self.pair),
            "variant": self.variant,
        }


def derive_seed(*parts) -> int:
    """Stable sub-seed from arbitrary labeled parts (never hash())."""
    blob = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


# ---------------------------------------------------------------------------
# labeling
# ---------------------------------------------------------------------------


def label_validity(structure: IndependenceStructure, rel: RelationKind, i: int, j: int) -> int:
    """1 iff the relation holds in every labeled DAG consistent with the
    premise structure, else 0."""
    if not i < j:
        raise ValueError("hypothesis pairs are normalized to i < j")
    members = mec_members(structure)
    return int(all(relation_holds(m, rel, i, j) for m in members))


def iter_hypotheses(n: int, variant: TemplateVariant = TemplateVariant.ORIGINAL):
    """The 3n(n-1) hypotheses in relation order, then pair order."""
    for rel in RelationKind:
        for i in range(n):
            for j in range(i + 1, n):
                yield Hypothesis(rel, i, j, variant)


# ---------------------------------------------------------------------------
# verbalization
# ---------------------------------------------------------------------------


def _name_list(names) -> str:
    names = list(names)
    if len(names) == 1:
        return names[0]
    return ", ".join(names[:-1]) + " and " + names[-1]


def verbalize_premise(structure: IndependenceStructure, names) -> str:
    """Correlation statement: closed-system preamble plus one sentence per
    node pair in lexicographic order."""
    names = tuple(names)
    n = structure.n
    if len(names) != n or len(set(names)) != n:
        raise ValueError("need one distinct name per node")
    parts = [
        f"Suppose there is a closed system of {n} variables, {_name_list(names)}. "
        f"All the statistical relations among these {n} variables are as follows: "
    ]
    sentences = []
    for i in range(n):
        for j in range(i + 1, n):
            if structure.is_directly_correlated(i, j):
                sentences.append(f"{names[i]} correlates with {names[j]}.")
            else:
                witness = structure.witness(i, j)
                if witness:
                    given = ", ".join(names[v] for v in sorted(witness))
                    sentences.append(
                        f"{names[i]} is independent of {names[j]} given {given}."
                    )
                else:
                    sentences.append(f"{names[i]} is independent of {names[j]}.")
    return parts[0] + " ".join(sentences)


def verbalize_hypothesis(h: Hypothesis, names) -> str:
    names = tuple(names)
    templates = (
        HYPOTHESIS_TEMPLATES
        if h.variant is TemplateVariant.ORIGINAL
        else PARAPHRASE_TEMPLATES
    )
    return templates[h.rel].format(i=names[h.i], j=names[h.j])


# ---------------------------------------------------------------------------
# dataset assembly
# ---------------------------------------------------------------------------


def mecs_for_n(n: int) -> list[Mec]:
    return cluster_mecs(enumerate_dags(n))


def records_per_n(n: int) -> int:
    return len(mecs_for_n(n)) * 3 * n * (n - 1)


def _split_assignment(n: int, total: int, seed: int) -> list[str]:
    if n in SPLIT_QUOTAS:
        test_quota, dev_quota = SPLIT_QUOTAS[n]
    else:
        test_quota = dev_quota = min(1000, total // 10)
    if test_quota + dev_quota > total:
        raise ValueError(f"split quotas exceed subset size for n={n}")
    rnd = random.Random(derive_seed(seed, "split", n))
    order = list(range(total))
    rnd.shuffle(order)
    splits = ["train"] * total
    for idx in order[:test_quota]:
        splits[idx] = "test"
    for idx in order[test_quota : test_quota + dev_quota]:
        splits[idx] = "dev"
    if n in (2, 3):
        # subsets under 1K go entirely to test+dev
        for idx in order[test_quota + dev_quota :]:
            splits[idx] = "dev"
    return splits


def build_records_for_n(n: int, seed: int):
    """Yield one record per (MEC, hypothesis) with its split tag, in
    deterministic order."""
    names = default_names(n)
    mecs = mecs_for_n(n)
    hypotheses = list(iter_hypotheses(n))
    total = len(mecs) * len(hypotheses)
    splits = _split_assignment(n, total, seed)
    idx = 0
    for m, mec in enumerate(mecs):
        premise = verbalize_premise(mec.structure, names)
        members = mec.members
        for h in hypotheses:
            label = int(all(relation_holds(d, h.rel, h.i, h.j) for d in members))
            yield Record(
                premise=premise,
                hypothesis=verbalize_hypothesis(h, names),
                label=label,
                n=n,
                mec_id=f"n{n}-m{m:04d}",
                relation=h.rel.value,
                pair=(h.i, h.j),
                variant="original",
                split=splits[idx],
            )
            idx += 1


def build_dataset(max_n: int, seed: int):
    """Yield all records for node counts 2..max_n."""
    if not 2 <= max_n <= 6:
        raise ValueError("max_n must be between 2 and 6")
    for n in range(2, max_n + 1):
        yield from build_records_for_n(n, seed)


# ---------------------------------------------------------------------------
# perturbations
# ---------------------------------------------------------------------------


def refactor_variables(text: str) -> str:
    """Reverse the alphabet on single-letter variable tokens (A<->Z, B<->Y,
    ...); an involution on text."""
    return _SINGLE_LETTER.sub(lambda m: _REVERSED_ALPHABET[m.group(1)], text)


def _toggle_tag(variant: str, tag: str) -> str:
    tags = [t for t in variant.split("+") if t != "original"]
    if tag in tags:
        tags.remove(tag)
    else:
        tags.append(tag)
    return "+".join(sorted(tags)) if tags else "original"


def perturb(record: Record, mode: str, seed: int = 0) -> Record:
    """Paraphrase swaps hypothesis templates; refactor reverses variable
    names in premise and hypothesis.  Labels never change."""
    if mode == "paraphrase":
        rel = RelationKind(record.relation)
        refactored = "refactor" in record.variant
        names = default_names(record.n)
        if refactored:
            names = tuple(_REVERSED_ALPHABET[c] for c in names)
        paraphrased = "paraphrase" not in record.variant
        h = Hypothesis(
            rel,
            record.pair[0],
            record.pair[1],
            TemplateVariant.PARAPHRASED if paraphrased else TemplateVariant.ORIGINAL,
        )
        return replace(
            record,
            hypothesis=verbalize_hypothesis(h, names),
            variant=_toggle_tag(record.variant, "paraphrase"),
        )
    if mode == "refactor":
        return replace(
            record,
            premise=refactor_variables(record.premise),
            hypothesis=refactor_variables(record.hypothesis),
            variant=_toggle_tag(record.variant, "refactor"),
        )
    raise ValueError(f"unknown perturbation mode {mode!r}")


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\w+|[^\w\s]")


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text)


def dataset_stats(records) -> dict:
    """Counts per n, split sizes, positive rates, token and vocabulary
    statistics (whitespace+punctuation tokenization)."""
    per_n: dict[int, dict] = {}
    vocab: set[str] = set()
    premise_tokens = 0
    hypothesis_tokens = 0
    total = 0
    positives = 0
    split_sizes: dict[str, int] = {"train": 0, "dev": 0, "test": 0}
    for r in records:
        total += 1
        positives += r.label
        split_sizes[r.split] = split_sizes.get(r.split, 0) + 1
        sub = per_n.setdefault(
            r.n, {"count": 0, "positives": 0, "test": 0, "dev": 0, "train": 0}
        )
        sub["count"] += 1
        sub["positives"] += r.label
        sub[r.split] = sub.get(r.split, 0) + 1
        pt = _tokens(r.premise)
        ht = _tokens(r.hypothesis)
        premise_tokens += len(pt)
        hypothesis_tokens += len(ht)
        vocab.update(pt)
        vocab.update(ht)
    report = {
        "total": total,
        "positive_rate_pct": round(100 * positives / total, 2) if total else 0.0,
        "splits": split_sizes,
        "tokens_per_premise": round(premise_tokens / total, 2) if total else 0.0,
        "tokens_per_hypothesis": round(hypothesis_tokens / total, 2) if total else 0.0,
        "vocab_size": len(vocab),
        "per_n": {},
    }
    for n in sorted(per_n):
        sub = per_n[n]
        count = sub.pop("count")
        positives = sub.pop("positives")
        entry = {
            "count": count,
            "positive_rate_pct": round(100 * positives / count, 2),
        }
        entry.update(sub)  # split sizes, whatever they are named
        report["per_n"][n] = entry
    return report
