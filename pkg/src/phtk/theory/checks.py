"""Itemized residual reports shared by the verification routines."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from phtk.config import ToleranceProfile, make_profile


@dataclass(frozen=True)
class CheckResult:
    """One identity check.

    ``residual`` is None for pure verdicts (e.g. "predicates agree").
    Conditional checks report whether an identity holds; they never fail a
    report on their own.
    """

    tag: str
    passed: bool
    residual: float | None = None
    threshold: float | None = None
    item: int | None = None
    conditional: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CheckReport:
    profile: ToleranceProfile
    checks: list[CheckResult] = field(default_factory=list)

    def measure(
        self,
        tag: str,
        residual: float,
        item: int | None = None,
        conditional: bool = False,
        note: str = "",
    ) -> CheckResult:
        threshold = self.profile.threshold(tag)
        result = CheckResult(
            tag=tag,
            passed=bool(residual <= threshold),
            residual=float(residual),
            threshold=threshold,
            item=item,
            conditional=conditional,
            note=note,
        )
        self.checks.append(result)
        return result

    def verdict(
        self, tag: str, ok: bool, item: int | None = None, conditional: bool = False, note: str = "",
    ) -> CheckResult:
        result = CheckResult(tag=tag, passed=bool(ok), item=item, conditional=conditional, note=note)
        self.checks.append(result)
        return result

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.conditional)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed and not c.conditional]

    def get(self, tag: str) -> CheckResult:
        for c in self.checks:
            if c.tag == tag:
                return c
        raise KeyError(tag)

    def tags(self) -> list[str]:
        return [c.tag for c in self.checks]

    def residuals(self) -> dict[str, float]:
        return {c.tag: c.residual for c in self.checks if c.residual is not None}


def as_profile(tol: float | ToleranceProfile) -> ToleranceProfile:
    if isinstance(tol, ToleranceProfile):
        return tol
    return make_profile(float(tol))
