"""Command-line entry point: graph enumeration, dataset generation,
perturbation, statistics, and one-off engine evaluation.

Outputs are JSONL with a metadata object on the first line (tool version,
seed, config hash); identical configuration yields byte-identical files.
Progress goes to stderr, data only to files or stdout.  Exit codes: 0
success, 1 generation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .corr2cause import Record, build_records_for_n, dataset_stats, perturb
from .dags import canonical_form, enumerate_dags

ENV_OUT_DIR = "CAUSALGEN_OUT_DIR"


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 0
    nodes: int = 0
    max_nodes: int = 6
    size: int = 10112
    mode: str = ""
    out: str = ""
    in_path: str = ""
    quiet: bool = False
    extra: dict = field(default_factory=dict)

    def hash(self) -> str:
        blob = json.dumps(
            {k: v for k, v in vars(self).items() if k != "extra"}, sort_keys=True
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def metadata(self) -> dict:
        return {
            "meta": {
                "tool": "causalgen",
                "version": __version__,
                "command": self.subcommand,
                "seed": self.seed,
                "config_hash": self.hash(),
            }
        }


def _progress(config: RunConfig, message: str) -> None:
    if not config.quiet:
        print(message, file=sys.stderr)


def _default_out(name: str) -> str:
    return os.path.join(os.environ.get(ENV_OUT_DIR, "."), name)


def _read_config_file(path: str) -> dict:
    """TOML-like key=value defaults; '#' starts a comment."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip().strip("\"'")
    return values


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"output directory does not exist: {parent}")


def _write_jsonl(path: str, metadata: dict, dicts) -> int:
    _ensure_parent(path)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(metadata, ensure_ascii=False) + "\n")
        for d in dicts:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")
            count += 1
    return count


def _iter_jsonl(path: str):
    source = sys.stdin if path == "-" else open(path, encoding="utf-8")
    try:
        for line in source:
            line = line.strip()
            if line:
                yield json.loads(line)
    finally:
        if source is not sys.stdin:
            source.close()


def _is_metadata(obj: dict) -> bool:
    return set(obj) == {"meta"}


def _record_from_dict(obj: dict, split: str = "unknown") -> Record:
    return Record(
        premise=obj["premise"],
        hypothesis=obj["hypothesis"],
        label=int(obj["label"]),
        n=int(obj["n"]),
        mec_id=obj["mec_id"],
        relation=obj["relation"],
        pair=tuple(obj["pair"]),
        variant=obj.get("variant", "original"),
        split=obj.get("split", split),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_enumerate(config: RunConfig) -> int:
    if config.nodes < 1:
        raise ValueError("--nodes must be at least 1")
    _progress(config, f"enumerating DAGs on {config.nodes} nodes")
    dags = enumerate_dags(config.nodes)

    def rows():
        for d in dags:
            yield {
                "n": d.n,
                "edges": [list(e) for e in d.edges],
                "canonical": canonical_form(d),
            }

    count = _write_jsonl(config.out, config.metadata(), rows())
    _progress(config, f"wrote {count} graphs to {config.out}")
    return 0


def _cmd_gen_corr2cause(config: RunConfig) -> int:
    if not 2 <= config.max_nodes <= 6:
        raise ValueError("--max-nodes must be between 2 and 6")
    os.makedirs(config.out, exist_ok=True)
    paths = {s: os.path.join(config.out, f"{s}.jsonl") for s in ("train", "dev", "test")}
    handles = {}
    counts = {s: 0 for s in paths}
    try:
        for split, path in paths.items():
            handles[split] = open(path, "w", encoding="utf-8", newline="\n")
            meta = config.metadata()
            meta["meta"]["split"] = split
            handles[split].write(json.dumps(meta, ensure_ascii=False) + "\n")
        for n in range(2, config.max_nodes + 1):
            _progress(config, f"generating records for n={n}")
            for record in build_records_for_n(n, config.seed):
                line = json.dumps(record.to_json_dict(), ensure_ascii=False)
                handles[record.split].write(line + "\n")
                counts[record.split] += 1
    finally:
        for h in handles.values():
            h.close()
    _progress(
        config,
        "wrote "
        + ", ".join(f"{counts[s]} {s}" for s in ("train", "dev", "test"))
        + f" records to {config.out}",
    )
    return 0


def _cmd_gen_cladder(config: RunConfig) -> int:
    from .cladder import assemble_dataset

    _progress(config, f"assembling {config.size} causal questions")
    records = assemble_dataset(config.size, config.seed)
    count = _write_jsonl(
        config.out, config.metadata(), (r.to_json_dict() for r in records)
    )
    _progress(config, f"wrote {count} records to {config.out}")
    return 0


def _cmd_perturb(config: RunConfig) -> int:
    mode = {"paraphrase": "paraphrase", "refactor": "refactor"}.get(config.mode)
    if mode is None:
        raise ValueError("--mode must be 'paraphrase' or 'refactor'")

    def rows():
        for obj in _iter_jsonl(config.in_path):
            if _is_metadata(obj):
                continue
            record = perturb(_record_from_dict(obj), mode, config.seed)
            yield record.to_json_dict()

    count = _write_jsonl(config.out, config.metadata(), rows())
    _progress(config, f"wrote {count} perturbed records to {config.out}")
    return 0


def _cmd_stats(config: RunConfig) -> int:
    records = []
    for obj in _iter_jsonl(config.in_path):
        if _is_metadata(obj):
            continue
        if "premise" not in obj:
            raise ValueError("stats expects correlation/hypothesis records")
        records.append(_record_from_dict(obj))
    print(json.dumps(dataset_stats(records), indent=2, sort_keys=False))
    return 0


def _cmd_ci_eval(config: RunConfig) -> int:
    from .cladder import cbn_from_meta, query_from_meta
    from .engine import answer, derive_estimand, evaluate, data_values

    payload = None
    for obj in _iter_jsonl(config.in_path):
        payload = obj
        break
    if payload is None:
        raise ValueError("no input object for ci eval")
    query_dict = dict(payload.get("query", {}))
    meta = {
        "graph": payload["graph"],
        "query": {
            "kind": query_dict.get("kind"),
            "polarity": query_dict.get("polarity", "increase"),
            "target_value": query_dict.get("target_value", 1),
            "condition_value": query_dict.get("condition_value", 1),
            "counterfactual_value": query_dict.get("counterfactual_value", 1),
            "candidate_set": query_dict.get("candidate_set", []),
        },
        "cpds": payload["cpds"],
    }
    query = query_from_meta(meta)
    cbn = cbn_from_meta(meta)
    estimand = derive_estimand(meta["graph"], query)
    value = evaluate(estimand, cbn)
    if estimand.expr is None:
        data = []
    else:
        data = [f"{t.render()}={v}" for t, v in data_values(estimand, cbn, 6).items()]
    print(
        json.dumps(
            {
                "estimand": estimand.render(),
                "data": data,
                "value": value,
                "answer": answer(query, value),
            },
            ensure_ascii=False,
        )
    )
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalgen",
        description="Generate causal-reasoning benchmark datasets and query the inference engine.",
    )
    parser.add_argument("--config", help="key=value file supplying flag defaults")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("enumerate-graphs", help="emit all non-isomorphic DAGs on N nodes")
    p.add_argument("--nodes", type=int)
    p.add_argument("--out")

    gen = sub.add_parser("gen", help="generate a dataset")
    gensub = gen.add_subparsers(dest="flavor", required=True)
    pc = gensub.add_parser("corr2cause", help="correlation-to-causation dataset")
    pc.add_argument("--max-nodes", type=int, dest="max_nodes")
    pc.add_argument("--seed", type=int)
    pc.add_argument("--out")
    pl = gensub.add_parser("cladder", help="causal-ladder question dataset")
    pl.add_argument("--size", type=int)
    pl.add_argument("--seed", type=int)
    pl.add_argument("--out")

    p = sub.add_parser("perturb", help="paraphrase or variable-refactor a dataset")
    p.add_argument("--mode", choices=("paraphrase", "refactor"))
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out")

    p = sub.add_parser("stats", help="report dataset statistics as JSON")
    p.add_argument("--in", dest="in_path")

    p = sub.add_parser("ci", help="inference engine utilities")
    cisub = p.add_subparsers(dest="ci_command", required=True)
    pe = cisub.add_parser("eval", help="evaluate one JSON network + query")
    pe.add_argument("--in", dest="in_path")
    return parser


_DEFAULTS = {
    "seed": 0,
    "nodes": 0,
    "max_nodes": 6,
    "size": 10112,
    "mode": "",
    "in_path": "-",
}


def _resolve(args: argparse.Namespace) -> RunConfig:
    file_defaults: dict = {}
    if args.config:
        file_defaults = _read_config_file(args.config)

    def pick(name: str, cast):
        cli_value = getattr(args, name, None)
        if cli_value is not None:
            return cli_value
        if name in file_defaults:
            return cast(file_defaults[name])
        return _DEFAULTS.get(name)

    subcommand = args.subcommand
    if subcommand == "gen":
        subcommand = f"gen {args.flavor}"
    elif subcommand == "ci":
        subcommand = f"ci {args.ci_command}"

    out = getattr(args, "out", None) or file_defaults.get("out")
    if out is None:
        default_names = {
            "enumerate-graphs": "graphs.jsonl",
            "gen corr2cause": "corr2cause",
            "gen cladder": "cladder.jsonl",
            "perturb": "perturbed.jsonl",
        }
        out = _default_out(default_names.get(subcommand, "out.jsonl"))

    return RunConfig(
        subcommand=subcommand,
        seed=int(pick("seed", int)),
        nodes=int(pick("nodes", int)),
        max_nodes=int(pick("max_nodes", int)),
        size=int(pick("size", int)),
        mode=str(getattr(args, "mode", None) or file_defaults.get("mode", "")),
        out=out,
        in_path=str(pick("in_path", str)),
        quiet=bool(args.quiet or file_defaults.get("quiet") in ("1", "true", "yes")),
    )


_DISPATCH = {
    "enumerate-graphs": _cmd_enumerate,
    "gen corr2cause": _cmd_gen_corr2cause,
    "gen cladder": _cmd_gen_cladder,
    "perturb": _cmd_perturb,
    "stats": _cmd_stats,
    "ci eval": _cmd_ci_eval,
}


def run(config: RunConfig) -> int:
    handler = _DISPATCH.get(config.subcommand)
    if handler is None:
        print(f"unknown subcommand: {config.subcommand}", file=sys.stderr)
        return 2
    try:
        return handler(config)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # generation / IO errors -> exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
