#!/usr/bin/env python3
"""Regenerates fixtures/: the 16-sample dataset manifest, placeholder
recordings, a 288-entry mock response fixture, reviewers and tokens.

Deterministic; rerunning produces identical files.
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

SAMPLES = [
    (1, "Accessories", "Tie Creators", "05:22", "tiecreators.com"),
    (2, "Apparel", "Clothoo", "05:47", "clothoo.com"),
    (3, "Beauty & Health", "eSalon", "04:19", "esalon.com"),
    (4, "Electronics", "AimControllers", "08:44", "aimcontrollers.com"),
    (5, "Food & Packaging", "Oreo", "04:44", "oreo.com"),
    (6, "Footwear", "DIS", "05:49", "designitalianshoes.com/en"),
    (7, "Games & Music", "Fender", "04:17", "fender.com"),
    (8, "House & Garden", "Ergohide", "03:41", "ergohide.com"),
    (9, "Industrial Goods", "Altrex", "01:23", "altrex.com/en"),
    (10, "Kids & Babies", "Nuk", "04:02", "nuk.de"),
    (11, "Motor Vehicles", "Aixam", "02:49", "aixam.com"),
    (12, "Office & Merchandise", "Austrian Post", "03:20", "onlineshop.post.at/en-AT"),
    (13, "Paper & Books", "Packhelp", "07:39", "packhelp.com"),
    (14, "Pet Supplies", "4Pets", "01:13", "4pets-products.com/en"),
    (15, "Printing Platforms", "Namemaker", "01:32", "namemaker.com"),
    (16, "Sportswear & Equipment", "Aurum Bikes", "02:15", "aurumbikes.com"),
]

CRITERIA = ["C1", "C2", "C3", "C4", "C5", "C6", "E1", "E2", "E3", "E4",
            "N1", "N2", "N3", "N4", "N5", "N6", "V1", "V2"]

# (minor, major) per criterion; totals 73 / 75.
SEVERITY_COUNTS = {
    "C1": (5, 6), "C2": (6, 2), "C3": (1, 0), "C4": (4, 7), "C5": (1, 14), "C6": (6, 2),
    "E1": (8, 3), "E2": (7, 5), "E3": (1, 1), "E4": (4, 6),
    "N1": (6, 1), "N2": (1, 0), "N3": (5, 1), "N4": (6, 4), "N5": (2, 13), "N6": (2, 0),
    "V1": (1, 1), "V2": (7, 9),
}

# Minor + major issues per sample, in sample order; sums to 148, spans 5..13.
ISSUES_PER_SAMPLE = [9, 11, 10, 13, 8, 9, 7, 10, 5, 9, 8, 10, 12, 7, 9, 11]

FORCED = {(3, "V1"): "major", (4, "N5"): "major", (8, "E1"): "minor"}

# Latency anchors (seconds): per-sample totals span 135.6..636.7 with mean
# 258.4; single analyses span 3.4..52.8.
TOTAL_MIN, TOTAL_MAX, TOTAL_MEAN = 135.6, 636.7, 258.4
CELL_MIN, CELL_MAX = 3.4, 52.8

ISSUE_TEXT = {
    "C1": ("The option list shows every variant at once with no way to narrow it to the user's stated needs.",
           "Ask two or three needs-based questions first and preselect matching options."),
    "C2": ("Related options are spread over unrelated screens, so the order of decisions feels arbitrary.",
           "Group options by product component and present the groups in a fixed, labelled sequence."),
    "C3": ("Options that cannot be combined with earlier choices stay selectable until an error appears.",
           "Grey out incompatible options and show a short note on why they are unavailable."),
    "C4": ("There is no way to let the system fill in the remaining choices once the key ones are made.",
           "Offer a 'complete for me' button that fills open choices with sensible defaults the user can review."),
    "C5": ("Two configured variants cannot be placed side by side, so differences must be remembered manually.",
           "Add a comparison view listing saved variants in columns with differing attributes highlighted."),
    "C6": ("The user can proceed with a conflicting selection and only learns about it at checkout.",
           "Validate each step immediately and block the next step until conflicts are resolved."),
    "E1": ("Technical option names are shown without any explanation of what they mean for the product.",
           "Attach a short info tooltip with a plain-language explanation and an example image."),
    "E2": ("Selecting one option silently changes another, and the interface never says which rule caused it.",
           "Show a notice naming the changed option and the selection that triggered the change."),
    "E3": ("An error banner appears but does not identify which selection is responsible.",
           "Link the error message to the offending option and scroll it into view."),
    "E4": ("When a conflict occurs the user gets no hint on how to resolve it.",
           "Suggest the smallest set of changes that restores a valid configuration."),
    "N1": ("Header links and promotional pop-ups pull attention away from the configuration flow.",
           "Reduce page chrome during configuration and defer promotions until the summary page."),
    "N2": ("The configurator jumps to the next step automatically before the user has checked the choice.",
           "Advance only on an explicit 'next' action and keep the current choice visible."),
    "N3": ("Earlier steps cannot be revisited without restarting the whole configuration.",
           "Make every completed step clickable in the step bar and keep later choices when possible."),
    "N4": ("Nothing indicates how many steps remain or how far the user has progressed.",
           "Add a step indicator with the current position and the total number of steps."),
    "N5": ("Leaving the page discards the configuration, and there is no way to save or share it.",
           "Persist the configuration in the account or as a shareable link."),
    "N6": ("Every session starts from an empty product with no templates or popular presets.",
           "Offer a few preconfigured starting points that users can adapt."),
    "V1": ("The preview image does not appear until the very end of the configuration.",
           "Show a preview from the first step and keep it visible next to the options."),
    "V2": ("The preview stays generic and does not reflect colour or material changes.",
           "Update the preview immediately after each selection so it matches the current configuration."),
}


def assign_issue_cells():
    """Binary 16x18 matrix with the requested row and column sums (Gale-Ryser greedy)."""
    col_left = {c: sum(SEVERITY_COUNTS[c]) for c in CRITERIA}
    row_left = {s[0]: n for s, n in zip(SAMPLES, ISSUES_PER_SAMPLE)}
    cells = set()
    for (sid, cid) in FORCED:
        cells.add((sid, cid))
        col_left[cid] -= 1
        row_left[sid] -= 1
    for sid in sorted(row_left, key=lambda s: (-row_left[s], s)):
        free = [c for c in CRITERIA if (sid, c) not in cells and col_left[c] > 0]
        free.sort(key=lambda c: (-col_left[c], CRITERIA.index(c)))
        if len(free) < row_left[sid]:
            raise SystemExit(f"cannot place issues for sample {sid}")
        for c in free[: row_left[sid]]:
            cells.add((sid, c))
            col_left[c] -= 1
        row_left[sid] = 0
    assert all(v == 0 for v in col_left.values()), col_left
    return cells


def assign_severities(cells, rng):
    sev = {}
    for cid in CRITERIA:
        minor, major = SEVERITY_COUNTS[cid]
        members = sorted(s for (s, c) in cells if c == cid)
        fixed = {s: FORCED[(s, cid)] for s in members if (s, cid) in FORCED}
        rest = [s for s in members if s not in fixed]
        rng.shuffle(rest)
        need_major = major - sum(1 for v in fixed.values() if v == "major")
        for s, v in fixed.items():
            sev[(s, cid)] = v
        for i, s in enumerate(rest):
            sev[(s, cid)] = "major" if i < need_major else "minor"
        assert sum(1 for s in members if sev[(s, cid)] == "major") == major
        assert sum(1 for s in members if sev[(s, cid)] == "minor") == minor
    return sev


def seconds(mmss):
    m, s = mmss.split(":")
    return int(m) * 60 + int(s)


def sample_totals():
    """Per-sample total latency, increasing with duration, pinned to the anchors."""
    durs = [seconds(s[3]) for s in SAMPLES]
    lo, hi = min(durs), max(durs)

    def totals(p):
        return [TOTAL_MIN + (TOTAL_MAX - TOTAL_MIN) * ((d - lo) / (hi - lo)) ** p for d in durs]

    a, b = 0.5, 5.0
    for _ in range(200):
        mid = (a + b) / 2
        if sum(totals(mid)) / len(durs) > TOTAL_MEAN:
            a = mid
        else:
            b = mid
    tenths = [round(t * 10) for t in totals((a + b) / 2)]
    target = round(TOTAL_MEAN * 10 * len(durs))
    # Fix rounding on the median-duration sample so the mean is exact.
    order = sorted(range(len(durs)), key=lambda i: durs[i])
    tenths[order[len(order) // 2]] += target - sum(tenths)
    return tenths


def cell_latencies(rng):
    totals = sample_totals()
    durs = [seconds(s[3]) for s in SAMPLES]
    shortest = durs.index(min(durs))
    longest = durs.index(max(durs))
    weights = [0.55 + 0.9 * rng.random() for _ in CRITERIA]
    out = {}
    for i, (sid, *_rest) in enumerate(SAMPLES):
        total = totals[i]
        pinned = {}
        if i == shortest:
            pinned[0] = round(CELL_MIN * 10)
        if i == longest:
            pinned[int(max(range(len(CRITERIA)), key=lambda k: weights[k]))] = round(CELL_MAX * 10)
        free = [k for k in range(len(CRITERIA)) if k not in pinned]
        remaining = total - sum(pinned.values())
        wsum = sum(weights[k] for k in free)
        vals = dict(pinned)
        for k in free:
            vals[k] = round(remaining * weights[k] / wsum)
        fix = free[len(free) // 2]
        vals[fix] += total - sum(vals.values())
        for k, cid in enumerate(CRITERIA):
            out[(sid, cid)] = vals[k] / 10
    cell_values = list(out.values())
    assert min(cell_values) == CELL_MIN and cell_values.count(CELL_MIN) == 1, min(cell_values)
    assert max(cell_values) == CELL_MAX and cell_values.count(CELL_MAX) == 1, max(cell_values)
    return out


NO_ISSUE_FORMS = [
    lambda: json.dumps({"severity": "no issue", "issue": None, "improvement": None}),
    lambda: "```json\n" + json.dumps({"severity": "no issue", "issue": None, "improvement": None}, indent=2) + "\n```",
    lambda: "The criterion is fulfilled throughout the recording.\n\n"
    + json.dumps({"severity": "None", "issue_description": "", "improvement_suggestion": ""}),
    lambda: json.dumps({"severity": "NO_ISSUE"}),
]


def issue_forms(label, issue, improvement):
    synonyms = {"minor": ["minor issue", "Minor", "minor_issue"], "major": ["major issue", "Major", "MAJOR-ISSUE"]}[label]
    return [
        json.dumps({"severity": synonyms[0], "issue": issue, "improvement": improvement}),
        "Here is my assessment.\n```json\n"
        + json.dumps({"severity": synonyms[1], "issue": issue, "improvement": improvement}, indent=2)
        + "\n```\nLet me know if you need more detail.",
        json.dumps({"severity": synonyms[2], "issue_description": issue, "improvement_suggestion": improvement}),
    ]


def main():
    rng = random.Random(20260115)
    ROOT.mkdir(parents=True, exist_ok=True)
    rec_dir = ROOT / "recordings"
    rec_dir.mkdir(exist_ok=True)

    manifest = []
    for sid, industry, name, duration, url in SAMPLES:
        rec = rec_dir / f"{sid:02d}.mp4"
        header = b"\x00\x00\x00\x18ftypmp42\x00\x00\x00\x00mp42isom"
        body = bytes((sid * 31 + i * 7) % 256 for i in range(2048 - len(header)))
        rec.write_bytes(header + body)
        manifest.append({"id": sid, "industry": industry, "name": name, "duration": duration,
                         "url": url, "recording_path": f"recordings/{sid:02d}.mp4"})
    (ROOT / "samples.manifest").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")

    cells = assign_issue_cells()
    sev = assign_severities(cells, rng)
    lat = cell_latencies(rng)

    responses = {}
    for sid, *_rest in SAMPLES:
        for cid in CRITERIA:
            key = f"{sid}/{cid}"
            if (sid, cid) in cells:
                issue, improvement = ISSUE_TEXT[cid]
                text = rng.choice(issue_forms(sev[(sid, cid)], issue, improvement))
            else:
                text = rng.choice(NO_ISSUE_FORMS)()
            responses[key] = {"text": text, "latency_s": lat[(sid, cid)]}
    fixture = {"schema": 1, "default_latency_s": 1.0, "responses": responses}
    (ROOT / "mock_responses.json").write_text(json.dumps(fixture, indent=1, ensure_ascii=False) + "\n")

    reviewers = [{"id": f"r{i}", "display_name": f"Reviewer {i}"} for i in range(1, 7)]
    (ROOT / "reviewers.json").write_text(json.dumps(reviewers, indent=2) + "\n")
    tokens = {f"token-r{i}": f"r{i}" for i in range(1, 7)}
    (ROOT / "tokens.json").write_text(json.dumps(tokens, indent=2) + "\n")

    minor = sum(1 for v in sev.values() if v == "minor")
    major = sum(1 for v in sev.values() if v == "major")
    print(f"{len(responses)} responses: {288 - minor - major} no issue, {minor} minor, {major} major")


if __name__ == "__main__":
    main()
