"""Benchmark runner: prompt assembly, modality conveyance, resumable runs."""

from __future__ import annotations

import base64
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .client import ClientError, OpenAIChatClient
from .docmodel import ModalityKind
from .export import ModalityBundle, load_bundle
from .jsonutil import iter_jsonl, read_json
from .schema import inline_defs

PROMPT_TEMPLATE = (
    "Extract structured data from this document. "
    "Return a JSON object matching this schema: {schema}\n"
    "Return null for fields you cannot find.\n"
    "Return ONLY valid JSON.\n"
    "Return an instance of the JSON with extracted values, not the schema itself."
)


class MissingArtifactError(FileNotFoundError):
    pass


@dataclass(frozen=True)
class RunConfig:
    endpoint: str
    model: str
    modality: ModalityKind = ModalityKind.PLAIN
    dpi: int = 200
    inline_defs: bool = False
    temperature: float = 0.0
    response_format: str | None = "json_object"
    max_retries: int = 5
    timeout: float = 60.0
    parallelism: int = 1
    api_key_env: str = "OPENAI_API_KEY"
    prompt_template: str = PROMPT_TEMPLATE

    def __post_init__(self):
        if self.temperature != 0.0:
            raise ValueError("benchmark runs are deterministic: temperature must be 0")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.dpi <= 0:
            raise ValueError(f"dpi must be positive, got {self.dpi}")
        if not self.endpoint:
            raise ValueError("endpoint must be set")
        if not self.model:
            raise ValueError("model must be set")


def build_prompt(schema: dict, template: str = PROMPT_TEMPLATE) -> str:
    """Substitute the serialized schema into the extraction instruction.

    str.replace, not str.format: schemas are full of braces.
    """
    rendered = json.dumps(schema, indent=2, ensure_ascii=False)
    return template.replace("{schema}", rendered)


@dataclass(frozen=True)
class Part:
    kind: str  # "text" | "image"
    text: str | None = None
    path: str | None = None


def assemble_input(
    bundle: ModalityBundle, modality: ModalityKind, dpi: int = 200
) -> list[Part]:
    """The user-turn payload for one document under one modality."""
    parts: list[Part] = []
    text = bundle.text_for(modality)
    if text is not None:
        parts.append(Part(kind="text", text=text))
    if modality in (ModalityKind.IMAGE, ModalityKind.SPATIAL_IMAGE):
        path = bundle.image_paths.get(dpi)
        if path is None or not Path(path).is_file():
            raise MissingArtifactError(
                f"document {bundle.doc_id!r} has no {dpi} dpi image"
            )
        parts.append(Part(kind="image", path=path))
    return parts


def parts_to_content(parts: list[Part]) -> str | list[dict]:
    """A single text part stays a plain string; anything with an image
    uses the content-parts form with a base64 data URL."""
    if len(parts) == 1 and parts[0].kind == "text":
        return parts[0].text or ""
    content: list[dict] = []
    for part in parts:
        if part.kind == "text":
            content.append({"type": "text", "text": part.text or ""})
        else:
            data = base64.b64encode(Path(part.path).read_bytes()).decode("ascii")
            content.append({
                "type": "image_url",
                "image_url": {"url": f"data:image/png;base64,{data}"},
            })
    return content


@dataclass(frozen=True)
class CorpusDoc:
    doc_id: str
    schema: dict
    bundle: ModalityBundle


def load_corpus(directory: str | Path) -> list[CorpusDoc]:
    """Read every {doc_id}.schema.json + manifest pair under a directory."""
    directory = Path(directory)
    docs = []
    for schema_path in sorted(directory.glob("*.schema.json")):
        doc_id = schema_path.name[: -len(".schema.json")]
        manifest = directory / f"{doc_id}.manifest.json"
        if not manifest.is_file():
            raise MissingArtifactError(f"no manifest for document {doc_id!r}")
        docs.append(CorpusDoc(
            doc_id=doc_id,
            schema=read_json(schema_path),
            bundle=load_bundle(manifest),
        ))
    return docs


def run_benchmark(
    config: RunConfig,
    corpus: list[CorpusDoc],
    out_path: str | Path,
    client=None,
    resume: bool = False,
) -> int:
    """Query the model once per document, appending JSONL records.

    Records are {doc_id, modality, raw_output}; a document whose request
    exhausts its retries is recorded with raw_output "" so scoring sees a
    stable denominator. With resume=True, doc_ids already present in the
    output file are skipped; otherwise the file is started fresh. Returns
    the number of newly written records.
    """
    out_path = Path(out_path)
    done: set[str] = set()
    if resume and out_path.is_file():
        done = {record["doc_id"] for record in iter_jsonl(out_path)}
    elif out_path.is_file():
        out_path.unlink()
    if client is None:
        client = OpenAIChatClient(
            endpoint=config.endpoint,
            model=config.model,
            api_key_env=config.api_key_env,
            temperature=config.temperature,
            timeout=config.timeout,
            max_retries=config.max_retries,
        )
    pending = [doc for doc in corpus if doc.doc_id not in done]
    lock = threading.Lock()
    written = 0

    def run_one(doc: CorpusDoc) -> None:
        nonlocal written
        schema = inline_defs(doc.schema) if config.inline_defs else doc.schema
        prompt = build_prompt(schema, config.prompt_template)
        parts = assemble_input(doc.bundle, config.modality, config.dpi)
        messages = [
            {"role": "system", "content": prompt},
            {"role": "user", "content": parts_to_content(parts)},
        ]
        try:
            raw = client.complete(messages, response_format=config.response_format)
        except ClientError:
            raw = ""
        record = {
            "doc_id": doc.doc_id,
            "modality": config.modality.value,
            "raw_output": raw,
        }
        with lock:
            with open(out_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            written += 1

    if config.parallelism == 1:
        for doc in pending:
            run_one(doc)
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            list(pool.map(run_one, pending))
    return written


def read_predictions(path: str | Path) -> dict[str, str]:
    """doc_id -> raw_output; the last record per doc wins (resume appends)."""
    out: dict[str, str] = {}
    for record in iter_jsonl(path):
        out[record["doc_id"]] = record.get("raw_output", "")
    return out
