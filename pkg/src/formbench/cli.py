"""Command-line interface.

Exit codes: 0 success, 1 operational failure (bad data, failed
validation, missing artifacts), 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import discovery, qa, report as report_mod, scoring
from .docmodel import (
    InvalidDocumentError, ModalityKind, ParseError, read_document,
    write_document,
)
from .export import export_document, load_bundle
from .genpipe import (
    FieldMapping, GroundTruthRecord, ReconcileError, ReskinError, SeedMap,
    reconcile_mapping, reskin_document, seed_fill,
)
from .jsonutil import append_jsonl, iter_jsonl, read_json, write_json
from .runner import (
    MissingArtifactError, RunConfig, load_corpus, read_predictions,
    run_benchmark,
)
from .schema import SchemaError, inline_defs, validate_schema

_FAILURE_TYPES = (
    ParseError, InvalidDocumentError, SchemaError, ReconcileError,
    ReskinError, ValueError, OSError, KeyError,
)


def load_config(path: str | Path) -> dict:
    """Flat key = value config: quoted strings, ints, floats, booleans."""
    out: dict = {}
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValueError(f"{path}:{lineno}: empty key")
        if value.startswith('"') and value.endswith('"') and len(value) >= 2:
            out[key] = value[1:-1]
        elif value in ("true", "false"):
            out[key] = value == "true"
        else:
            try:
                out[key] = int(value)
            except ValueError:
                try:
                    out[key] = float(value)
                except ValueError:
                    out[key] = value
    return out


def _pick(cli_value, config: dict, key: str, default):
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


def _read_doc(path: str):
    return read_document(Path(path).read_bytes())


def cmd_seed(args) -> int:
    doc = _read_doc(args.input)
    seed_map = seed_fill(doc)
    write_json(args.out, seed_map.to_dict())
    print(f"seeded {len(seed_map.entries)} widgets -> {args.out}")
    return 0


def cmd_discover(args) -> int:
    doc = _read_doc(args.input)
    seed_map = SeedMap.from_dict(read_json(args.seeds))
    request = discovery.build_discovery_request(doc, seed_map)
    if args.client == "rule-based":
        client = discovery.RuleBasedDiscoveryClient()
    else:
        from .client import OpenAIChatClient

        if not args.endpoint or not args.model:
            print("error: --endpoint and --model required for --client http",
                  file=sys.stderr)
            return 2
        client = discovery.LlmDiscoveryClient(OpenAIChatClient(
            endpoint=args.endpoint, model=args.model,
        ))
    response = discovery.parse_discovery_response(client.discover(request))
    schema, mapping, rec_report = reconcile_mapping(response, seed_map, doc)
    write_json(args.out_schema, schema)
    write_json(args.out_mapping, mapping.to_dict())
    dropped = (
        len(rec_report.duplicates)
        + len(rec_report.hallucinated)
        + len(rec_report.dropped_subtrees)
    )
    print(
        f"mapped {len(mapping.entries)} fields"
        f" ({dropped} dropped, {len(rec_report.pruned_paths)} pruned)"
    )
    return 0


def cmd_reskin(args) -> int:
    doc = _read_doc(args.input)
    schema = read_json(args.schema)
    mapping = FieldMapping.from_dict(read_json(args.mapping))
    reskinned, gt = reskin_document(doc, schema, mapping, seed=args.seed)
    Path(args.out_doc).write_bytes(write_document(reskinned))
    write_json(args.out_gt, gt.to_dict())
    print(f"reskinned {len(mapping.entries)} fields with seed {args.seed}")
    return 0


def cmd_export(args) -> int:
    doc = _read_doc(args.input)
    dpis = tuple(args.dpi) if args.dpi else (200, 50)
    manifest = export_document(doc, args.out_dir, dpis=dpis)
    names = [manifest["plain_text"], manifest["spatial_text"],
             *manifest["images"].values()]
    print(f"exported {doc.doc_id}: {', '.join(names)}")
    return 0


def cmd_screen(args) -> int:
    corpus_dir = Path(args.corpus)
    findings = []
    for gt_path in sorted(corpus_dir.glob("*.gt.json")):
        doc_id = gt_path.name[: -len(".gt.json")]
        gt = GroundTruthRecord.from_dict(read_json(gt_path))
        schema = read_json(corpus_dir / f"{doc_id}.schema.json")
        bundle = load_bundle(corpus_dir / f"{doc_id}.manifest.json")
        findings.extend(qa.screen_document(gt, schema, bundle))
    qa.write_findings(args.out, findings)
    ledger = qa.ledger_from_findings(findings)
    if args.ledger:
        qa.write_ledger(args.ledger, ledger)
    print(
        f"{len(findings)} findings; {len(ledger.removed_docs)} documents"
        f" removed, {len(ledger.excluded_fields)} fields excluded"
    )
    return 0


def cmd_run(args) -> int:
    config_file = load_config(args.config) if args.config else {}
    config = RunConfig(
        endpoint=_pick(args.endpoint, config_file, "endpoint", ""),
        model=_pick(args.model, config_file, "model", ""),
        modality=ModalityKind(_pick(args.modality, config_file, "modality", "plain")),
        dpi=_pick(args.dpi, config_file, "dpi", 200),
        inline_defs=bool(
            _pick(args.inline_defs or None, config_file, "inline_defs", False)
        ),
        max_retries=_pick(args.max_retries, config_file, "max_retries", 5),
        timeout=_pick(args.timeout, config_file, "timeout", 60.0),
        parallelism=_pick(args.parallelism, config_file, "parallelism", 1),
        api_key_env=_pick(args.api_key_env, config_file, "api_key_env",
                          "OPENAI_API_KEY"),
    )
    corpus = load_corpus(args.corpus)
    written = run_benchmark(config, corpus, args.out, resume=args.resume)
    print(f"{written} predictions -> {args.out}")
    return 0


def cmd_score(args) -> int:
    config_file = load_config(args.config) if args.config else {}
    tau = _pick(args.tau, config_file, "tau", scoring.DEFAULT_TAU)
    case_sensitive = not _pick(
        args.case_insensitive or None, config_file, "case_insensitive", False
    )
    score_config = scoring.ScoreConfig(tau=tau, case_sensitive=case_sensitive)
    ledger = qa.read_ledger(args.ledger) if args.ledger else None
    predictions = read_predictions(args.predictions)
    corpus_dir = Path(args.corpus)
    gt_paths = sorted(corpus_dir.glob("*.gt.json"))
    if not gt_paths:
        print(f"error: no ground truth under {corpus_dir}", file=sys.stderr)
        return 1
    scores = []
    skipped = 0
    out = Path(args.out)
    out.write_text("", encoding="utf-8")
    for gt_path in gt_paths:
        doc_id = gt_path.name[: -len(".gt.json")]
        if ledger and ledger.is_removed(doc_id):
            skipped += 1
            continue
        gt = GroundTruthRecord.from_dict(read_json(gt_path))
        schema = read_json(corpus_dir / f"{doc_id}.schema.json")
        doc_score = scoring.score_document(
            gt, schema, predictions.get(doc_id, ""), ledger, score_config
        )
        scores.append(doc_score)
        append_jsonl(out, doc_score.to_dict())
    if not scores:
        print("error: every document was removed by the ledger", file=sys.stderr)
        return 1
    mean_em = sum(s.em for s in scores) / len(scores)
    print(
        f"scored {len(scores)} documents (skipped {skipped});"
        f" EM {100 * mean_em:.1f}"
    )
    return 0


def cmd_report(args) -> int:
    scores = [
        scoring.DocumentScore.from_dict(raw) for raw in iter_jsonl(args.scores)
    ]
    result = report_mod.emit_report(
        scores, args.out_csv, args.out_md,
        seed=args.seed, resamples=args.resamples,
    )
    print(
        f"EM {100 * result.em:.1f}"
        f" ({100 * result.perfect_rate:.1f} perfect)"
        f" over {result.n_documents} documents"
    )
    return 0


def cmd_inline_defs(args) -> int:
    schema = read_json(args.schema)
    violations = validate_schema(schema)
    if violations:
        print("error: " + "; ".join(violations), file=sys.stderr)
        return 1
    write_json(args.out, inline_defs(schema))
    print(f"inlined -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formbench",
        description="Generate, screen, run and score document-extraction benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seed", help="fill widgets with placeholder tokens")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("discover", help="derive schema + field mapping")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--client", choices=["rule-based", "http"], default="rule-based")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--out-schema", required=True)
    p.add_argument("--out-mapping", required=True)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("reskin", help="replace placeholders with personas")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--mapping", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-doc", required=True)
    p.add_argument("--out-gt", required=True)
    p.set_defaults(func=cmd_reskin)

    p = sub.add_parser("export", help="write modality files + manifest")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dpi", type=int, action="append", default=None,
                   help="repeatable; defaults to 200 and 50")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("screen", help="QA screen a generated corpus")
    p.add_argument("--corpus", required=True,
                   help="directory of .gt.json/.schema.json/.manifest.json")
    p.add_argument("--out", required=True, help="findings JSONL")
    p.add_argument("--ledger", help="also write an exclusion ledger")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("run", help="query a model over an exported corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="predictions JSONL")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--modality",
                   choices=[m.value for m in ModalityKind])
    p.add_argument("--dpi", type=int, choices=[200, 50])
    p.add_argument("--inline-defs", action="store_true", default=False)
    p.add_argument("--parallelism", type=int)
    p.add_argument("--max-retries", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--api-key-env")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--config", help="flat key = value config file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score", help="score predictions against ground truth")
    p.add_argument("--corpus", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--ledger")
    p.add_argument("--tau", type=float)
    p.add_argument("--case-insensitive", action="store_true", default=False)
    p.add_argument("--out", required=True, help="per-document scores JSONL")
    p.add_argument("--config")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="aggregate scores into CSV + Markdown")
    p.add_argument("--scores", required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-md", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resamples", type=int, default=report_mod.DEFAULT_RESAMPLES)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("inline-defs", help="expand $ref references in a schema")
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_inline_defs)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _FAILURE_TYPES as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
