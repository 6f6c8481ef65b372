"""Deterministic colors for rendered graphs.

Entity types have fixed fills (patients red, admissions blue, disorders
green).  Activity domains draw from a fixed 12-color palette, assigned by the
domain's position in sorted name order, cycling when there are more domains
than colors.  Same inputs always yield the same colors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .vocab import ADMISSION, DISORDER, PATIENT

ENTITY_COLORS = {
    PATIENT: "#E74C3C",
    ADMISSION: "#3498DB",
    DISORDER: "#2ECC71",
}

DOMAIN_PALETTE = (
    "#F39C12",
    "#9B59B6",
    "#1ABC9C",
    "#D35400",
    "#2980B9",
    "#27AE60",
    "#C0392B",
    "#8E44AD",
    "#16A085",
    "#F1C40F",
    "#7F8C8D",
    "#34495E",
)


@dataclass(frozen=True)
class StyleMap:
    """Color assignments for one graph's entity types and domains."""

    domain_colors: dict[str, str] = field(default_factory=dict)

    @classmethod
    def for_domains(cls, domains: list[str]) -> "StyleMap":
        ordered = sorted(set(domains))
        return cls({name: DOMAIN_PALETTE[i % len(DOMAIN_PALETTE)] for i, name in enumerate(ordered)})

    def entity_color(self, entity_type: str) -> str | None:
        return ENTITY_COLORS.get(entity_type)

    def domain_color(self, domain: str) -> str | None:
        return self.domain_colors.get(domain)
