"""Braking respects the pedestrian's plan; not braking overrides it."""

from _common import load, show_propositions, show_verdicts

s = load("pedestrian")
print("autonomy propositions for the driver:")
for plan_id in ("P13", "P14"):
    show_propositions(s, plan_id)
print("\nverdicts:")
show_verdicts(s)
