"""Build manifests: one flat text file naming inputs, options, and outputs.

Grammar, line by line:

    # comment                       (full-line comments and blanks ignored)
    key = value

Table keys take paths resolved relative to the manifest file.  The ``output``
key may repeat; its value is a variant, a comma-separated format list, then
optional ``param=value`` tokens:

    output = C3 dot,json entity_type=ADMISSION
    output = C1 dot patients=P1|P2
    output = C5 json multimorbidity=1085006|94181007

Grammar and consistency problems raise :class:`ManifestError`, which the CLI
reports as a usage error.  Whether referenced files exist is checked later,
at load time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path

from . import vocab
from .construct import BuildConfig
from .discover import VARIANTS, CohortSelector
from .errors import ManifestError
from .ingest import MappingKind

REQUIRED_TABLES = (
    "event_log",
    "diagnosis",
    "icd10",
    "snomed_concepts",
    "snomed_relationships",
    "map_icd_snomed",
    "map_activity_snomed",
)

OPTIONAL_TABLES = (
    "entity_attributes",
    "map_activity_domain",
    "map_domain_snomed",
    "map_activity_treats",
)

TABLE_KEYS = REQUIRED_TABLES + OPTIONAL_TABLES

MAPPING_TABLE_KINDS = {
    "map_icd_snomed": MappingKind.ICD_TO_SNOMED,
    "map_activity_snomed": MappingKind.ACTIVITY_TO_SNOMED,
    "map_activity_domain": MappingKind.ACTIVITY_TO_DOMAIN,
    "map_domain_snomed": MappingKind.DOMAIN_TO_SNOMED,
    "map_activity_treats": MappingKind.ACTIVITY_TREATS,
}

BOOL_KEYS = ("include_event_properties", "include_domains", "strict", "reify_disorders")

FORMATS = ("dot", "graphml", "cypher", "json")

_SLUG_RE = re.compile(r"[^A-Za-z0-9._-]+")


def _slugify(text: str) -> str:
    return _SLUG_RE.sub("-", text)


@dataclass(frozen=True)
class OutputRequest:
    """One requested discovery output: a variant plus formats and scoping."""

    variant: str
    formats: tuple[str, ...]
    entity_type: str | None = None
    patients: tuple[str, ...] | None = None
    multimorbidity: frozenset[str] | None = None

    def effective_entity_type(self) -> str:
        if self.entity_type is not None:
            return self.entity_type
        return vocab.DISORDER if self.variant == "C4" else vocab.ADMISSION

    def selector(self) -> CohortSelector | None:
        if self.patients is not None:
            return CohortSelector.patients(self.patients)
        if self.multimorbidity is not None:
            return CohortSelector.multimorbidity(self.multimorbidity)
        return None

    def slug(self) -> str:
        parts = [self.variant.lower()]
        if self.variant in ("C3", "C4", "C5"):
            parts.append(_slugify(self.effective_entity_type()))
        if self.patients is not None:
            parts.append("p-" + "-".join(_slugify(p) for p in self.patients))
        if self.multimorbidity is not None:
            parts.append("mm-" + "-".join(_slugify(c) for c in sorted(self.multimorbidity)))
        return "_".join(parts)

    def identity(self) -> tuple:
        return (self.variant, self.entity_type, self.patients, self.multimorbidity)


@dataclass(frozen=True)
class Manifest:
    base_dir: Path
    tables: dict[str, Path]
    config: BuildConfig
    strict: bool = True
    out_dir: str | None = None
    outputs: tuple[OutputRequest, ...] = ()

    def table(self, key: str) -> Path | None:
        return self.tables.get(key)

    def mapping_paths(self) -> dict[MappingKind, Path]:
        out = {}
        for key, kind in MAPPING_TABLE_KINDS.items():
            path = self.tables.get(key)
            if path is not None:
                out[kind] = path
        return out

    def with_strict(self, strict: bool | None) -> "Manifest":
        if strict is None or strict == self.strict:
            return self
        config = replace(self.config, strict_linking=strict)
        return replace(self, strict=strict, config=config)


def _parse_bool(raw: str, line_no: int, key: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ManifestError(f"line {line_no}: {key} must be true or false, got {raw!r}")


def _parse_output(raw: str, line_no: int) -> OutputRequest:
    tokens = raw.split()
    if len(tokens) < 2:
        raise ManifestError(f"line {line_no}: output needs a variant and a format list")
    variant = tokens[0]
    if variant not in VARIANTS:
        raise ManifestError(f"line {line_no}: unknown variant {variant!r}, expected one of {', '.join(VARIANTS)}")
    formats = tuple(dict.fromkeys(tokens[1].split(",")))
    for fmt in formats:
        if fmt not in FORMATS:
            raise ManifestError(f"line {line_no}: unknown format {fmt!r}, expected one of {', '.join(FORMATS)}")

    entity_type: str | None = None
    patients: tuple[str, ...] | None = None
    multimorbidity: frozenset[str] | None = None
    for token in tokens[2:]:
        if "=" not in token:
            raise ManifestError(f"line {line_no}: expected param=value, got {token!r}")
        name, _, value = token.partition("=")
        if name == "entity_type":
            if variant not in ("C3", "C4", "C5"):
                raise ManifestError(f"line {line_no}: entity_type only applies to C3, C4, C5")
            entity_type = value
        elif name == "patients":
            if variant not in ("C1", "C2", "C3", "C4"):
                raise ManifestError(f"line {line_no}: patients only applies to C1 through C4")
            patients = tuple(p for p in value.split("|") if p)
            if not patients:
                raise ManifestError(f"line {line_no}: patients list is empty")
        elif name == "multimorbidity":
            if variant not in ("C1", "C2", "C3", "C5"):
                raise ManifestError(f"line {line_no}: multimorbidity does not apply to {variant}")
            multimorbidity = frozenset(c for c in value.split("|") if c)
            if not multimorbidity:
                raise ManifestError(f"line {line_no}: multimorbidity list is empty")
        else:
            raise ManifestError(f"line {line_no}: unknown output param {name!r}")
    if patients is not None and multimorbidity is not None:
        raise ManifestError(f"line {line_no}: patients and multimorbidity are mutually exclusive")
    if variant == "C5" and multimorbidity is None:
        raise ManifestError(f"line {line_no}: C5 requires multimorbidity=<concept|concept|...>")
    return OutputRequest(variant, formats, entity_type, patients, multimorbidity)


def parse_manifest(path: str | Path) -> Manifest:
    """Read and validate a manifest file.

    Raises :class:`ManifestError` for any grammar or consistency problem.
    """
    manifest_path = Path(path)
    try:
        text = manifest_path.read_text(encoding="utf-8")
    except OSError as err:
        raise ManifestError(f"cannot read manifest {manifest_path}: {err.strerror or err}") from err
    base_dir = manifest_path.resolve().parent

    tables: dict[str, Path] = {}
    bools: dict[str, bool] = {}
    df_entity_types: frozenset[str] | None = None
    out_dir: str | None = None
    outputs: list[OutputRequest] = []
    seen_keys: set[str] = set()

    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ManifestError(f"line {line_no}: expected key = value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not value:
            raise ManifestError(f"line {line_no}: empty value for {key!r}")

        if key == "output":
            outputs.append(_parse_output(value, line_no))
            continue
        if key in seen_keys:
            raise ManifestError(f"line {line_no}: duplicate key {key!r}")
        seen_keys.add(key)

        if key in TABLE_KEYS:
            tables[key] = (base_dir / value).resolve()
        elif key in BOOL_KEYS:
            bools[key] = _parse_bool(value, line_no, key)
        elif key == "df_entity_types":
            df_entity_types = frozenset(t.strip() for t in value.split(",") if t.strip())
        elif key == "out_dir":
            out_dir = value
        else:
            raise ManifestError(f"line {line_no}: unknown key {key!r}")

    missing = [key for key in REQUIRED_TABLES if key not in tables]
    if missing:
        raise ManifestError(f"missing required table key(s): {', '.join(missing)}")

    identities = [request.identity() for request in outputs]
    for index, identity in enumerate(identities):
        if identity in identities[:index]:
            raise ManifestError(f"duplicate output request for {identities[index][0]}")

    strict = bools.get("strict", True)
    config = BuildConfig(
        include_event_properties=bools.get("include_event_properties", True),
        include_domains=bools.get("include_domains", True),
        strict_linking=strict,
        reify_disorders=bools.get("reify_disorders", True),
        df_entity_types=df_entity_types,
    )
    return Manifest(
        base_dir=base_dir,
        tables=tables,
        config=config,
        strict=strict,
        out_dir=out_dir,
        outputs=tuple(outputs),
    )
