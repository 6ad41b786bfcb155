"""Sirens for any shortcut undermine themselves; sirens for emergencies do not."""

from _common import load, show_propositions, show_verdicts

for name in ("ambulance", "ambulance_emergency"):
    s = load(name)
    print(f"{name}:")
    show_propositions(s)
    show_verdicts(s)
    print()
