"""Writes synthetic session logs and recounts them by hand-style loops.

sessions_10.jsonl + summary_10.json: interaction averages per condition.
sessions_20.jsonl + tally_20.json: hotel selection shares per condition.
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).parent
HOTELS = [f"hotel-{i:02d}" for i in range(1, 10)]
SHAPES = {h: ("MONOTONIC_INCREASING" if i < 3 else "J_SHAPED" if i < 6 else "POSITIVELY_SKEWED")
          for i, h in enumerate(HOTELS)}
WIDGETS = ["rating_bar", "pie_sector", "legend", "review_list", "hotel_card"]


def make_session(rng, idx):
    condition = "BASELINE" if idx % 2 == 0 else "BIAS_AWARE"
    start = 1_600_000_000_000 + idx * 10_000_000
    t = start
    events = []
    for _ in range(rng.randint(60, 160)):
        t += rng.randint(200, 9000)
        kind = rng.choice(["CLICK", "HOVER", "HOVER", "SCROLL"])
        widget = rng.choice(WIDGETS)
        ev = {"t_ms": t, "kind": kind, "widget": widget, "hotel_id": rng.choice(HOTELS)}
        if widget in ("rating_bar", "pie_sector"):
            ev["rating"] = rng.randint(1, 5)
        if widget in ("pie_sector", "legend") and condition == "BIAS_AWARE":
            ev["category_id"] = rng.choice(["positive_only", "negative", "food", "service"])
        events.append(ev)
    picks = rng.sample(HOTELS, 3)
    return {
        "session_id": f"fx-{idx:02d}",
        "condition": condition,
        "started_ms": start,
        "ended_ms": t + 1000,
        "events": events,
        "selection": {"hotels": picks, "reasons": ["price", "reviews"]},
    }


def summary(sessions):
    out = {}
    for cond in ["BASELINE", "BIAS_AWARE"]:
        group = [s for s in sessions if s["condition"] == cond]
        if not group:
            continue
        n = len(group)
        per_rating = {}
        for r in range(1, 6):
            clicks = hovers = 0
            for s in group:
                for e in s["events"]:
                    if e.get("rating") == r:
                        if e["kind"] == "CLICK":
                            clicks += 1
                        elif e["kind"] == "HOVER":
                            hovers += 1
            per_rating[str(r)] = {"clicks": clicks / n, "hovers": hovers / n}
        totals = {"CLICK": 0, "HOVER": 0, "SCROLL": 0}
        for s in group:
            for e in s["events"]:
                totals[e["kind"]] += 1
        out[cond] = {
            "participants": n,
            "per_rating": per_rating,
            "overall": {"clicks": totals["CLICK"] / n, "hovers": totals["HOVER"] / n,
                        "scrolls": totals["SCROLL"] / n},
        }
    return out


def tally(sessions):
    out = {}
    for cond in ["BASELINE", "BIAS_AWARE"]:
        group = [s for s in sessions if s["condition"] == cond]
        counts = {h: 0 for h in HOTELS}
        for s in group:
            for h in set(s["selection"]["hotels"]):
                counts[h] += 1
        shape_counts = {}
        for h, c in counts.items():
            shape_counts[SHAPES[h]] = shape_counts.get(SHAPES[h], 0) + c
        out[cond] = {
            "sessions": len(group),
            "hotels": {h: {"selected": c, "pct": 100.0 * c / len(group)} for h, c in counts.items()},
            "by_shape": {k: 100.0 * v / len(group) for k, v in shape_counts.items()},
        }
    return out


def write(name, sessions, expected_name, expected):
    with open(HERE / name, "w") as f:
        for s in sessions:
            f.write(json.dumps(s, sort_keys=True) + "\n")
    with open(HERE / expected_name, "w") as f:
        json.dump(expected, f, indent=2, sort_keys=True)
        f.write("\n")


rng = random.Random(368)
ten = [make_session(rng, i) for i in range(10)]
write("sessions_10.jsonl", ten, "summary_10.json", summary(ten))
twenty = [make_session(rng, i) for i in range(20)]
write("sessions_20.jsonl", twenty, "tally_20.json", tally(twenty))
with open(HERE / "shapes.json", "w") as f:
    json.dump(SHAPES, f, indent=2, sort_keys=True)
    f.write("\n")
