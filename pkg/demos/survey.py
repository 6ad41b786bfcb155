"""Survey answers become facts by thresholded majority with a dead band."""

from deontic_va import Evaluator, Overall

from _common import load, show_verdicts

for theta in ("0.5", "0.9"):
    s = load("theft_survey", theta=theta)
    print(f"theta={theta}:")
    for key, value in sorted(s.facts.undermines.items(), key=lambda kv: kv[0].text):
        print(f"  {key.text} = {value.name}")
    show_verdicts(s)
    print()
ethical = [v.plan_id for v in Evaluator(load("theft_survey")).check_all()
           if v.overall is Overall.ETHICAL]
print("ethical plans at the default threshold:", ethical or "none")
