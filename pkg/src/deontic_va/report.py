"""Verdict reports: deterministic text and versioned JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal

from .evaluator import Overall, PrincipleResult, Verdict
from .logic import Top, canonical_serialize
from .rulebase import Scenario
from .testgen import ARROW_NOTE

FORMAT_VERSION = "1"

EXIT_ETHICAL, EXIT_UNETHICAL, EXIT_INDETERMINATE, EXIT_ERROR = 0, 1, 2, 3


@dataclass(frozen=True)
class Report:
    scenario: Scenario
    verdicts: tuple[Verdict, ...]
    theta: Decimal
    epsilon: Decimal
    max_depth: int
    format_version: str = FORMAT_VERSION

    @property
    def world(self) -> str:
        return "closed" if self.scenario.closed_world else "open"

    @property
    def exit_code(self) -> int:
        overall = {v.overall for v in self.verdicts}
        if Overall.UNETHICAL in overall:
            return EXIT_UNETHICAL
        if Overall.INDETERMINATE in overall:
            return EXIT_INDETERMINATE
        return EXIT_ETHICAL

    def survivors(self) -> dict[str, list[str]]:
        """Ethical plan ids per agent, agents in declaration order."""
        plans = {p.id: p for p in self.scenario.plans}
        out: dict[str, list[str]] = {a.name: [] for a in self.scenario.agents}
        for v in self.verdicts:
            if v.overall is Overall.ETHICAL:
                out[plans[v.plan_id].agent.name].append(v.plan_id)
        return out

    def notes(self) -> list[str]:
        return [*self.scenario.notes, ARROW_NOTE]

    def to_dict(self) -> dict:
        plans = {p.id: p for p in self.scenario.plans}
        return {
            "format_version": self.format_version,
            "scenario": self.scenario.name,
            "parameters": {
                "theta": str(self.theta),
                "epsilon": str(self.epsilon),
                "max_depth": self.max_depth,
                "world": self.world,
            },
            "surveys": [
                {"path": s.path, "theta": str(s.theta), "epsilon": str(s.epsilon),
                 "records": s.records,
                 "assignments": {k: str(v) for k, v in s.assignments}}
                for s in self.scenario.surveys
            ],
            "plans": [
                {
                    "id": v.plan_id,
                    "agent": plans[v.plan_id].agent.name,
                    "plan": str(plans[v.plan_id]),
                    "overall": str(v.overall),
                    "principles": [_result_dict(r) for r in v.results],
                }
                for v in self.verdicts
            ],
            "survivors": self.survivors(),
            "notes": self.notes(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        plans = {p.id: p for p in self.scenario.plans}
        lines = [
            f"scenario {self.scenario.name}  (report format {self.format_version})",
            f"world={self.world} theta={self.theta} epsilon={self.epsilon} "
            f"max-depth={self.max_depth}",
        ]
        for s in self.scenario.surveys:
            lines.append(f"survey {s.path}: {s.records} records, theta={s.theta} epsilon={s.epsilon}")
        lines.append("")
        for v in self.verdicts:
            lines.append(f"{plans[v.plan_id]}")
            lines.append(f"  verdict: {v.overall}")
            for r in v.results:
                lines.append(f"  {str(r.kind):<15} {r.value}")
                for part in r.parts:
                    lines.append(f"    vs {part.kind.counterparty:<10} "
                                 f"counterparty ethical={part.gate}  test={part.value}")
            lines.append("")
        surv = "; ".join(f"{a}: {', '.join(ids) if ids else '-'}"
                         for a, ids in self.survivors().items())
        lines.append(f"surviving plans: {surv}")
        counts = {o: sum(v.overall is o for v in self.verdicts) for o in Overall}
        lines.append("summary: " + ", ".join(f"{n} {o}" for o, n in counts.items()))
        lines.extend(f"note: {n}" for n in self.notes())
        return "\n".join(lines) + "\n"


def _result_dict(r: PrincipleResult) -> dict:
    d = {
        "kind": str(r.kind),
        "proposition": canonical_serialize(r.proposition),
        "value": str(r.value),
        "trace": [str(e) for e in r.trace],
    }
    if r.gate is not None:
        d["counterparty_ethical"] = str(r.gate)
    if r.parts:
        d["counterparties"] = [_result_dict(p) for p in r.parts]
    return d


def explain_text(verdict: Verdict, scenario: Scenario) -> str:
    """Full trace of every principle for one plan."""
    plan = scenario.plan(verdict.plan_id)
    lines = [str(plan), f"verdict: {verdict.overall}", ""]
    for r in verdict.results:
        lines.append(f"[{r.kind}] {r.value}")
        lines.append(f"  proposition: {canonical_serialize(r.proposition)}")
        if r.parts:
            for part in r.parts:
                lines.append(f"  vs {part.kind.counterparty}: counterparty ethical={part.gate}, "
                             f"test={part.value}")
                lines.append(f"    proposition: {canonical_serialize(part.proposition)}")
                lines.extend(f"    {e}" for e in part.trace)
        elif isinstance(r.proposition, Top):
            lines.append("  vacuously true: no alternatives or other-agent plans")
        else:
            lines.extend(f"    {e}" for e in r.trace)
        lines.append("")
    lines.append("trace columns: depth  sub-formula  source  value")
    return "\n".join(lines) + "\n"
