"""Decision procedure: saturate, filtrate the open branch, verify the result."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .filtration import FiltratedModel, build_filtrated
from .formula import Atom, Formula, Not, TargetFormula
from .kripke import CertificateReport, KLSpec, PointedModel, check_model
from .tableau import Closed, Open, ResourceLimit, SaturationResult, TableauConfig, saturate

__all__ = [
    "Sat", "Unsat", "Unknown", "Verdict", "SolverConfig", "ExtractionError",
    "decide", "verify_certificate", "extract_model", "extract_filtrated",
]


@dataclass(frozen=True, eq=False)
class Sat:
    model: PointedModel
    report: CertificateReport
    filtrated: bool = True

    def __post_init__(self):
        if not self.report.ok:
            raise ValueError("a satisfiable verdict needs a verified model")


@dataclass(frozen=True)
class Unsat:
    steps: int = 0


@dataclass(frozen=True)
class Unknown:
    reason: str


Verdict = Union[Sat, Unsat, Unknown]


@dataclass(frozen=True)
class SolverConfig:
    """Budgets for the search.  Certificates are always verified."""

    tableau: TableauConfig = field(default_factory=TableauConfig)


class ExtractionError(RuntimeError):
    """The open branch is internally inconsistent; this is an engine bug."""


def verify_certificate(pm: PointedModel, phi: Formula, kl: KLSpec) -> CertificateReport:
    return check_model(pm, phi, kl)


def extract_filtrated(result: SaturationResult, target: TargetFormula | Formula,
                      kl: KLSpec) -> FiltratedModel:
    """Filtrate the prefix of an open branch and read the valuation off the
    branch literals: an atom holds at a class when some member is labelled
    with it.  Atoms that no member mentions stay false."""
    if not isinstance(result, Open):
        raise ValueError("model extraction needs an open saturation result")
    if isinstance(target, Formula):
        target = TargetFormula(target)
    prefix = result.prefix
    for w, fs in prefix.labels.items():
        for f in fs:
            if isinstance(f, Atom) and Not(f) in fs:
                raise ExtractionError(f"world {w} is labelled with both {f} and ~{f}")
    fm = build_filtrated(prefix.pm, target, kl)
    names = sorted({g.name for g in target.phi.subformulas() if isinstance(g, Atom)})
    valuation = {a: set() for a in names}
    for c in fm.classes:
        for m in c.members:
            for f in prefix.labels[m]:
                if isinstance(f, Atom):
                    valuation[f.name].add(c.name)
    q = fm.pm
    pm = PointedModel.build(q.worlds, sorted(q.frame.rel), valuation, q.root)
    return FiltratedModel(pm, fm.classes, fm.class_of, fm.source, fm.target)


def extract_model(result: SaturationResult, target: TargetFormula | Formula,
                  kl: KLSpec) -> PointedModel:
    return extract_filtrated(result, target, kl).pm


def decide(phi: Formula, kl: KLSpec, config: SolverConfig | None = None) -> Verdict:
    """Satisfiability of ``phi`` over frames with the density pairs ``kl``.

    The filtrated model is preferred.  Should it fail verification, the open
    branch's own finite structure is tried as a certificate instead; a
    satisfiable verdict is only ever returned with a model that verifies.
    """
    config = config or SolverConfig()
    target = TargetFormula(phi)
    result = saturate(target, kl, config.tableau)
    if isinstance(result, Closed):
        return Unsat(result.steps)
    if isinstance(result, ResourceLimit):
        return Unknown(result.reason)
    candidates = [(extract_model(result, target, kl), True), (result.prefix.pm, False)]
    for pm, filtrated in candidates:
        report = verify_certificate(pm, phi, kl)
        if report.ok:
            return Sat(pm, report, filtrated)
    return Unknown("no candidate model passed verification")
