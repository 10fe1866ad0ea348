"""Build a complete synthetic benchmark corpus in one pass.

Runs every stage over generated form templates: placeholder seeding,
rule-based schema discovery, persona reskinning, modality export, and
the QA screen. Writes per-document artifacts plus the exclusion ledger
into --out. Safe to re-run: the same seeds produce the same bytes.

Usage:
    python3 scripts/build_corpus.py --out corpus/ --count 25 --seed 0
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from formbench.discovery import (
    RuleBasedDiscoveryClient, build_discovery_request, parse_discovery_response,
)
from formbench.export import export_document, load_bundle
from formbench.genpipe import reconcile_mapping, reskin_document, seed_fill
from formbench.jsonutil import write_json
from formbench.qa import ledger_from_findings, screen_document, write_ledger
from formbench.synthcorpus import make_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="corpus output directory")
    parser.add_argument("--count", type=int, default=25)
    parser.add_argument("--seed", type=int, default=0,
                        help="template generation seed")
    parser.add_argument("--reskin-seed", type=int, default=2024)
    parser.add_argument("--dpi", type=int, nargs="+", default=[200, 50])
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    client = RuleBasedDiscoveryClient()

    findings = []
    for doc in make_corpus(count=args.count, seed=args.seed):
        seed_map = seed_fill(doc)
        request = build_discovery_request(doc, seed_map)
        response = parse_discovery_response(client.discover(request))
        schema, mapping, report = reconcile_mapping(response, seed_map, doc)
        if report.dropped_subtrees or report.duplicates:
            print(f"{doc.doc_id}: reconcile dropped "
                  f"{len(report.dropped_subtrees)} subtrees, "
                  f"{len(report.duplicates)} duplicate claims")
        reskinned, gt = reskin_document(
            doc, schema, mapping, seed=args.reskin_seed
        )
        export_document(reskinned, out, dpis=tuple(args.dpi))
        write_json(out / f"{doc.doc_id}.schema.json", schema)
        write_json(out / f"{doc.doc_id}.gt.json", gt.to_dict())

        bundle = load_bundle(out / f"{doc.doc_id}.manifest.json")
        findings += screen_document(gt, schema, bundle)

    ledger = ledger_from_findings(findings)
    write_ledger(out / "ledger.json", ledger)
    print(f"built {args.count} documents -> {out}")
    print(f"QA: {len(findings)} findings, "
          f"{len(ledger.removed_docs)} documents removed, "
          f"{len(ledger.excluded_fields)} field exclusions")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
