"""Run the extraction benchmark over a corpus, one pass per modality.

For each requested modality this queries the endpoint, scores the
predictions against ground truth (honoring the corpus ledger if
present), and writes scores.jsonl + report.csv + report.md under
--out/<modality>/. Finishes with a side-by-side EM table.

Usage:
    export OPENAI_API_KEY=...
    python3 scripts/run_benchmark.py \
        --corpus corpus/ --out results/ \
        --endpoint https://api.example.com/v1 --model my-model \
        --modalities plain spatial
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from formbench.docmodel import ModalityKind
from formbench.genpipe import GroundTruthRecord
from formbench.jsonutil import append_jsonl, read_json
from formbench.qa import read_ledger
from formbench.report import emit_report
from formbench.runner import (
    RunConfig, load_corpus, read_predictions, run_benchmark,
)
from formbench.scoring import score_document


def score_corpus(corpus_dir: Path, predictions_path: Path, ledger, out: Path):
    predictions = read_predictions(predictions_path)
    scores = []
    out.write_text("", encoding="utf-8")
    for gt_path in sorted(corpus_dir.glob("*.gt.json")):
        doc_id = gt_path.name[: -len(".gt.json")]
        if ledger and ledger.is_removed(doc_id):
            continue
        gt = GroundTruthRecord.from_dict(read_json(gt_path))
        schema = read_json(corpus_dir / f"{doc_id}.schema.json")
        score = score_document(gt, schema, predictions.get(doc_id, ""), ledger)
        scores.append(score)
        append_jsonl(out, score.to_dict())
    return scores


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--endpoint", required=True)
    parser.add_argument("--model", required=True)
    parser.add_argument("--modalities", nargs="+",
                        default=["plain", "spatial", "image", "spatial+image"],
                        choices=[m.value for m in ModalityKind])
    parser.add_argument("--dpi", type=int, default=200)
    parser.add_argument("--parallelism", type=int, default=4)
    parser.add_argument("--inline-defs", action="store_true",
                        help="expand $ref before prompting")
    parser.add_argument("--resume", action="store_true",
                        help="keep predictions from a previous run")
    parser.add_argument("--seed", type=int, default=0,
                        help="bootstrap resampling seed")
    args = parser.parse_args()

    corpus_dir = Path(args.corpus)
    corpus = load_corpus(corpus_dir)
    ledger_path = corpus_dir / "ledger.json"
    ledger = read_ledger(ledger_path) if ledger_path.exists() else None
    print(f"{len(corpus)} documents"
          + (f", ledger removes {len(ledger.removed_docs)}" if ledger else ""))

    headline = []
    for modality in args.modalities:
        run_dir = Path(args.out) / modality
        run_dir.mkdir(parents=True, exist_ok=True)
        config = RunConfig(
            endpoint=args.endpoint,
            model=args.model,
            modality=ModalityKind(modality),
            dpi=args.dpi,
            inline_defs=args.inline_defs,
            parallelism=args.parallelism,
        )
        predictions_path = run_dir / "predictions.jsonl"
        written = run_benchmark(
            config, corpus, predictions_path, resume=args.resume
        )
        print(f"[{modality}] {written} predictions")

        scores = score_corpus(
            corpus_dir, predictions_path, ledger, run_dir / "scores.jsonl"
        )
        result = emit_report(
            scores, run_dir / "report.csv", run_dir / "report.md",
            seed=args.seed,
        )
        headline.append((modality, result))
        print(f"[{modality}] EM {100 * result.em:.1f}"
              f" ANLS {100 * result.anls:.1f}"
              f" perfect {100 * result.perfect_rate:.1f}")

    print()
    print(f"{'modality':<14} {'EM':>6} {'ANLS':>6} {'perfect':>8} "
          f"{'95% CI (EM)':>16}")
    for modality, result in headline:
        lo, hi = result.em_ci
        print(f"{modality:<14} {100 * result.em:>6.1f}"
              f" {100 * result.anls:>6.1f}"
              f" {100 * result.perfect_rate:>8.1f}"
              f"   [{100 * lo:.1f}, {100 * hi:.1f}]")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
