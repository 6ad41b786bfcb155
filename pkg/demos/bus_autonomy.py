"""Autonomy holds through the syntactic disjunct when conditions are inconsistent."""

from deontic_va import check_autonomy

from _common import load, show_propositions

s = load("bus")
print("autonomy propositions:")
show_propositions(s)
for plan in s.plans:
    r = check_autonomy(s, plan)
    print(f"\n{plan.id} autonomy: {r.value.name}")
    for part in r.parts:
        print(f"  vs {part.kind.counterparty}: test={part.value.name} gate={part.gate.name}")
        for entry in part.trace:
            print(f"    {entry}")
