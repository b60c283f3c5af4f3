#!/usr/bin/env python3
"""Regenerate the canned mock transcripts.

Responses are keyed by the hash of the exact prompts the pipeline renders
against the builtin library, so this must be rerun whenever the prompt
templates or the shipped poses change. Writes both the repo-level
``fixtures/transcripts/`` directory and the packaged copy.
"""

from __future__ import annotations

import json
from pathlib import Path

from menagerie.agents import prompt_key, render_finder_prompt, render_observer_prompt
from menagerie.library import load_library, lookup
from menagerie.skeleton import CANONICAL_KEYPOINTS

ROOT = Path(__file__).resolve().parents[1]
TARGETS = [
    ROOT / "fixtures" / "transcripts",
    ROOT / "src" / "menagerie" / "data" / "transcripts",
]

SCRIPTS = [
    {
        "slug": "tiger_standing",
        "animal": "Tiger",
        "pose": "standing",
        "finder": {
            "animal": "German Shepherd",
            "pose": "standing",
            "reason": "A large quadruped with comparable limb proportions and stance.",
        },
        "plan": [
            {"op": "scale_segment", "target": ["neck_end", "nose"], "value": 1.15},
            {"op": "translate", "target": "tail_end", "value": [0.0, 0.0, 0.08]},
            {"op": "translate", "target": "back_end", "value": [0.0, 0.0, 0.02]},
        ],
        "commentary": "Tigers carry a longer muzzle and a raised tail compared with the reference dog.",
    },
    {
        "slug": "kangaroo_standing",
        "animal": "Kangaroo",
        "pose": "standing",
        "finder": {
            "animal": "T-Rex",
            "pose": "standing",
            "reason": "Upright biped with strong hind legs, small forelimbs, and a heavy balancing tail.",
        },
        "plan": [
            {"op": "scale_segment", "target": ["neck_end", "nose"], "value": 0.7},
            {"op": "scale_segment", "target": ["back_end", "tail_end"], "value": 0.8},
            {"op": "translate", "target": "paw_front_left", "value": [0.02, 0.0, 0.05]},
            {"op": "translate", "target": "paw_front_right", "value": [0.02, 0.0, 0.05]},
        ],
        "commentary": "Shorten the head and tail; tuck the forepaws toward the chest.",
    },
    {
        "slug": "northern_cardinal_flying",
        "animal": "northern cardinal",
        "pose": "flying",
        "finder": {
            "animal": "Eagle",
            "pose": "flying",
            "reason": "A flying bird skeleton with spread wings transfers directly.",
        },
        "plan": [
            {"op": "scale_segment", "target": ["neck_end", "nose"], "value": 0.8},
        ],
        "commentary": "Cardinals are proportionally similar in flight; only the bill shortens.",
    },
]


def main() -> None:
    lib = load_library()
    for target in TARGETS:
        target.mkdir(parents=True, exist_ok=True)
        for old in target.glob("*.json"):
            old.unlink()

    for script in SCRIPTS:
        entries = []
        fs, fu = render_finder_prompt(lib, script["animal"], CANONICAL_KEYPOINTS)
        entries.append(
            {"key": prompt_key(fs, fu), "response": json.dumps(script["finder"])}
        )
        chosen = lookup(lib, script["finder"]["animal"], script["finder"]["pose"]).entry
        os_, ou = render_observer_prompt(chosen, script["animal"], script["pose"])
        plan_doc = {"instructions": script["plan"], "commentary": script["commentary"]}
        entries.append({"key": prompt_key(os_, ou), "response": json.dumps(plan_doc)})

        doc = {
            "request": {"animal": script["animal"], "pose": script["pose"]},
            "entries": entries,
        }
        for target in TARGETS:
            path = target / f"{script['slug']}.json"
            path.write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", "utf-8")
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
