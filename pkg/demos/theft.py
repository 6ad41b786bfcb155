"""Shoplifting fails generalization once the undermining fact is known."""

from deontic_va import FactBase

from _common import load, show_propositions, show_verdicts

s = load("theft")
print("generated propositions:")
show_propositions(s)
print("\nwith the shop-owner fact:")
show_verdicts(s)
print("\nwith no facts at all (closed world):")
show_verdicts(s.with_facts(FactBase(closed_world=True)))
