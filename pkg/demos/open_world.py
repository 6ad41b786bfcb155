"""Missing facts stay Unknown in an open world and default to False in a closed one."""

from _common import load, show_verdicts

for closed in (False, True):
    print(f"closed_world={closed}:")
    show_verdicts(load("empty_open", closed_world=closed))
