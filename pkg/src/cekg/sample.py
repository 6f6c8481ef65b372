"""Access to the bundled two-patient demo dataset.

The dataset ships inside the package so the CLI and the test suite work
without external files.  It covers every construction feature: two patients,
three admissions including a readmission, shared and distinct disorders, a
treats mapping, domains, and extra event columns.
"""

from __future__ import annotations

from pathlib import Path

from .construct import BuildConfig, BuildReport, build_all
from .graph import PropertyGraph
from .ingest import Dataset
from .manifest import Manifest, parse_manifest
from .pipeline import load_dataset

SAMPLE_DIR = Path(__file__).parent / "data" / "sample"


def sample_manifest_path() -> Path:
    return SAMPLE_DIR / "sample.manifest"


def sample_manifest() -> Manifest:
    return parse_manifest(sample_manifest_path())


def load_sample() -> Dataset:
    return load_dataset(sample_manifest())


def build_sample(config: BuildConfig | None = None) -> tuple[PropertyGraph, BuildReport]:
    dataset = load_sample()
    return build_all(dataset, config if config is not None else BuildConfig())
