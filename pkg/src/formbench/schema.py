"""Restricted JSON-Schema subset shared by generation, export and scoring.

Allowed nodes: object (properties), array (items), string, number. $defs
at the root with $ref pointers of the form "#/$defs/Name". Two custom
annotations ride along: max_visual_chars (int) and enum (list of strings,
for choice-backed fields). Nesting is capped at 4 container levels.

Paths: schema-side paths are index-free ("rows[]/amount"); instance-side
paths carry element indices ("rows[0]/amount"). helpers here accept both
and strip indices when resolving against the schema.
"""

import copy
import re
from typing import Any, Iterator

SCALAR_TYPES = ("string", "number")
CONTAINER_TYPES = ("object", "array")
MAX_DEPTH = 4

_REF_RE = re.compile(r"^#/\$defs/([^/]+)$")
_INDEX_RE = re.compile(r"\[\d*\]$")


class SchemaError(ValueError):
    pass


def _ref_name(node: dict) -> str | None:
    ref = node.get("$ref")
    if ref is None:
        return None
    m = _REF_RE.match(ref)
    if not m:
        raise SchemaError(f"unsupported $ref target {ref!r}")
    return m.group(1)


def resolve_node(schema: dict, node: dict) -> dict:
    """Follow $ref chains (against root $defs) to the concrete node."""
    seen: set[str] = set()
    while isinstance(node, dict) and "$ref" in node:
        name = _ref_name(node)
        if name in seen:
            raise SchemaError(f"$ref cycle through {name!r}")
        seen.add(name)
        defs = schema.get("$defs", {})
        if name not in defs:
            raise SchemaError(f"unresolved $ref #/$defs/{name}")
        node = defs[name]
    return node


def validate_schema(schema: Any) -> list[str]:
    """Return all violations of the subset contract."""
    violations: list[str] = []
    if not isinstance(schema, dict):
        return ["schema root must be an object node"]
    defs = schema.get("$defs", {})
    if not isinstance(defs, dict):
        return ["$defs must be an object"]

    def walk(node: Any, path: str, depth: int, stack: tuple[str, ...]) -> None:
        where = path or "<root>"
        if not isinstance(node, dict):
            violations.append(f"{where}: node must be an object")
            return
        if "$ref" in node:
            try:
                name = _ref_name(node)
            except SchemaError as exc:
                violations.append(f"{where}: {exc}")
                return
            if name in stack:
                violations.append(f"{where}: $ref cycle through {name!r}")
                return
            if name not in defs:
                violations.append(f"{where}: unresolved $ref #/$defs/{name}")
                return
            walk(defs[name], where, depth, stack + (name,))
            return
        node_type = node.get("type")
        if node_type in SCALAR_TYPES:
            return
        if node_type == "object":
            if depth >= MAX_DEPTH:
                violations.append(f"{where}: nesting deeper than {MAX_DEPTH} levels")
                return
            props = node.get("properties")
            if not isinstance(props, dict):
                violations.append(f"{where}: object node needs a properties map")
                return
            for key, child in props.items():
                child_path = f"{path}/{key}" if path else key
                walk(child, child_path, depth + 1, stack)
            return
        if node_type == "array":
            if depth >= MAX_DEPTH:
                violations.append(f"{where}: nesting deeper than {MAX_DEPTH} levels")
                return
            items = node.get("items")
            if not isinstance(items, dict):
                violations.append(f"{where}: array node needs an items object")
                return
            walk(items, f"{path}[]" if path else "[]", depth + 1, stack)
            return
        violations.append(f"{where}: unsupported node type {node_type!r}")

    if schema.get("type") != "object":
        violations.append("<root>: root must be an object node")
        return violations
    walk(schema, "", 0, ())
    return violations


def iter_leaf_paths(schema: dict) -> Iterator[tuple[str, dict]]:
    """Yield (index-free path, resolved leaf node) in schema DFS order."""

    def walk(node: dict, path: str) -> Iterator[tuple[str, dict]]:
        node = resolve_node(schema, node)
        node_type = node.get("type")
        if node_type == "object":
            for key, child in node.get("properties", {}).items():
                child_path = f"{path}/{key}" if path else key
                yield from walk(child, child_path)
        elif node_type == "array":
            yield from walk(node["items"], f"{path}[]")
        else:
            yield path, node

    yield from walk(schema, "")


def node_at(schema: dict, path: str) -> dict | None:
    """Resolve the node a path points to; indexed and index-free forms
    ("rows[0]/amount", "rows[]/amount") are equivalent. Returns None when
    the path does not exist in the schema.
    """
    node = resolve_node(schema, schema)
    for raw in path.split("/"):
        if raw == "":
            continue
        name, hops = _split_indices(raw)
        if name:
            if node.get("type") != "object":
                return None
            props = node.get("properties", {})
            if name not in props:
                return None
            node = resolve_node(schema, props[name])
        for _ in range(hops):
            if node.get("type") != "array":
                return None
            node = resolve_node(schema, node["items"])
    return node


def _split_indices(segment: str) -> tuple[str, int]:
    """'rows[0]' -> ('rows', 1); 'rows[]' -> ('rows', 1); 'x' -> ('x', 0)."""
    hops = 0
    while True:
        m = _INDEX_RE.search(segment)
        if not m:
            return segment, hops
        segment = segment[: m.start()]
        hops += 1


def leaf_type(schema: dict, path: str) -> str | None:
    """The declared scalar type at path, or None when path is unknown."""
    node = node_at(schema, path)
    if node is None:
        return None
    t = node.get("type")
    return t if t in SCALAR_TYPES else None


def inline_defs(schema: dict) -> dict:
    """Expand every $ref into a deep copy of its target; drop $defs.

    Raises SchemaError on unresolved references or reference cycles.
    """
    defs = schema.get("$defs", {})
    if not isinstance(defs, dict):
        raise SchemaError("$defs must be an object")

    def expand(node: Any, stack: tuple[str, ...]) -> Any:
        if not isinstance(node, dict):
            return copy.deepcopy(node)
        if "$ref" in node:
            name = _ref_name(node)
            if name in stack:
                raise SchemaError(f"$ref cycle through {name!r}")
            if name not in defs:
                raise SchemaError(f"unresolved $ref #/$defs/{name}")
            target = expand(defs[name], stack + (name,))
            # annotations on the reference node override the target's
            extras = {k: copy.deepcopy(v) for k, v in node.items() if k != "$ref"}
            target.update(extras)
            return target
        out = {}
        for key, value in node.items():
            if key == "$defs":
                continue
            if key == "properties" and isinstance(value, dict):
                out[key] = {k: expand(v, stack) for k, v in value.items()}
            elif key == "items" and isinstance(value, dict):
                out[key] = expand(value, stack)
            else:
                out[key] = copy.deepcopy(value)
        return out

    return expand(schema, ())


def classify_structure(schema: dict) -> str:
    """Flat / Nested / Table, decided after resolving references.

    Any array anywhere makes the document a Table; an object inside an
    object without any array makes it Nested; otherwise Flat.
    """
    has_array = False
    has_inner_object = False

    def walk(node: dict, depth: int) -> None:
        nonlocal has_array, has_inner_object
        node = resolve_node(schema, node)
        node_type = node.get("type")
        if node_type == "array":
            has_array = True
            walk(node["items"], depth + 1)
        elif node_type == "object":
            if depth > 0:
                has_inner_object = True
            for child in node.get("properties", {}).values():
                walk(child, depth + 1)

    walk(schema, 0)
    if has_array:
        return "Table"
    if has_inner_object:
        return "Nested"
    return "Flat"


def conforms(instance: Any, schema: dict) -> bool:
    """Check an instance against the subset schema (strict on extras)."""

    def check(value: Any, node: dict) -> bool:
        node = resolve_node(schema, node)
        node_type = node.get("type")
        if node_type == "object":
            if not isinstance(value, dict):
                return False
            props = node.get("properties", {})
            return all(
                key in props and check(child, props[key])
                for key, child in value.items()
            )
        if node_type == "array":
            if not isinstance(value, list):
                return False
            return all(check(elem, node["items"]) for elem in value)
        if node_type == "string":
            if not isinstance(value, str):
                return False
            enum = node.get("enum")
            return enum is None or value in enum
        if node_type == "number":
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        return False

    return check(instance, schema)
