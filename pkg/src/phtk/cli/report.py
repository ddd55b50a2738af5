"""Schema-versioned analysis reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from phtk import __version__
from phtk.cli.matrix_io import dumps
from phtk.config import ToleranceProfile
from phtk.theory.checks import CheckReport, CheckResult

SCHEMA_VERSION = 1


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass
class AnalysisReport:
    """Everything `analyze` learned about one matrix.

    ``sections`` maps a stage name ("spectra", "metrics", "symmetries",
    "lemma", "model") to its checks. Tags are unique within a section.
    """

    source: dict
    profile: ToleranceProfile
    spectral_class: str
    eigenvalues: list[complex] = field(default_factory=list)
    multiplicities: list[int] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    sections: dict[str, list[CheckResult]] = field(default_factory=dict)
    involutions: dict[str, bool] = field(default_factory=dict)
    symmetry_action: list[dict] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def add(self, section: str, report: CheckReport) -> None:
        self.sections.setdefault(section, []).extend(report.checks)

    def failures(self) -> list[tuple[str, CheckResult]]:
        return [
            (name, c)
            for name, checks in self.sections.items()
            for c in checks
            if not c.passed and not c.conditional
        ]

    @property
    def passed(self) -> bool:
        return not self.errors and not self.failures()

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def residuals(self) -> dict[str, float]:
        """Flat ``section/tag`` → residual table."""
        return {
            f"{name}/{c.tag}": c.residual
            for name, checks in self.sections.items()
            for c in checks
            if c.residual is not None
        }

    def to_dict(self, include_metadata: bool = True) -> dict:
        data = {
            "schema_version": SCHEMA_VERSION,
            "source": self.source,
            "profile": {"name": self.profile.name, "tol": self.profile.tol},
            "spectral_class": self.spectral_class,
            "eigenvalues": [_complex_pair(z) for z in self.eigenvalues],
            "multiplicities": self.multiplicities,
            "labels": self.labels,
            "sections": {
                name: [c.to_dict() for c in checks] for name, checks in self.sections.items()
            },
            "involutions": self.involutions,
            "symmetry_action": self.symmetry_action,
            "errors": self.errors,
            "passed": self.passed,
        }
        if include_metadata:
            data["metadata"] = {
                "generated_at": datetime.now(timezone.utc).isoformat(),
                "phtk_version": __version__,
            }
        return data


def write_report(report: AnalysisReport, path: Path | None = None, include_metadata: bool = True) -> str:
    """Serialize ``report``; write it to ``path`` when given. Returns the JSON text."""
    text = dumps(report.to_dict(include_metadata=include_metadata))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return text


def format_summary(report: AnalysisReport) -> str:
    """Short human-readable digest for stderr."""
    values = ", ".join(f"{z.real:.6g}{z.imag:+.6g}i" for z in np.asarray(report.eigenvalues)[:6])
    if len(report.eigenvalues) > 6:
        values += ", ..."
    total = sum(len(c) for c in report.sections.values())
    lines = [
        f"Spectrum: {report.spectral_class} [{values}]",
        f"Checks: {total - len(report.failures())}/{total} passed (profile {report.profile.name})",
    ]
    for section, check in report.failures():
        lines.append(
            f"  FAIL {section}/{check.tag}: residual {check.residual:.3e} > {check.threshold:.1e}"
            if check.residual is not None
            else f"  FAIL {section}/{check.tag}: {check.note or 'verdict failed'}"
        )
    lines.extend(f"  ERROR {e}" for e in report.errors)
    return "\n".join(lines)
