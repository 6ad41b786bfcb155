"""Utility compares each plan against available alternatives for the same reasons."""

from deontic_va import parse_scenario

from _common import SCENARIOS, show_propositions, show_verdicts

text = (SCENARIOS / "merge.scn").read_text()
s = parse_scenario(text)
print("generated propositions:")
show_propositions(s)
print("\nverdicts with the recorded utilities:")
show_verdicts(s)

swapped = text.replace("A3(a)) = 0.2", "A3(a)) = 0.95")
print("\nverdicts once merging immediately is rated higher:")
show_verdicts(parse_scenario(swapped))
