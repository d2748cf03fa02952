#!/usr/bin/env python3
# Copyright 2026 The relassess Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the test fixtures under tests/fixtures.

Output is deterministic for a given seed. The planted sets are built so that
their headline numbers follow from construction:

  planted/   1,000 annotated pairs; the candidate agrees with the human
             majority on exactly 656 of them.
  stats/     100 hard disagreements and 100 adjudications split 50/31/19
             between human_wrong, llm_wrong and both_wrong.
  api/       30 pairs with exactly 10 hard disagreements, 3 of them already
             adjudicated.
"""

import argparse
import json
import random
from pathlib import Path

from PIL import Image, ImageDraw

LABELS = ["irrelevant", "acceptable_substitute", "highly_relevant"]
HUMAN_CLASSES = ["brand_error", "product_error", "too_strict", "too_lenient", "category_error"]
LLM_CLASSES = ["too_strict", "too_lenient", "llm_hallucination", "llm_translation", "llm_understanding", "llm_vision"]

COLOURS = [
    ("black", (20, 20, 20)), ("white", (245, 245, 245)), ("red", (200, 30, 30)), ("green", (40, 150, 60)),
    ("navy", (20, 30, 90)), ("beige", (220, 200, 160)), ("grey", (128, 128, 128)), ("pink", (240, 150, 180)),
]
SHAPES = ["tee", "sneaker", "dress", "jeans", "bag"]

EN_QUERIES = [
    "women's long sleeve t-shirt with green stripes", "black sneakers", "nike red shoes", "levi's 501 jeans",
    "summer dress floral", "men's rain jacket", "white leather trainers", "polo ralph lauren jumper",
    "adidas stan smith", "high waisted mom jeans", "linen shirt men", "beige trench coat",
    "running shorts women", "wool scarf", "chelsea boots brown", "puffer jacket kids",
    "silk blouse", "denim jacket oversized", "yoga leggings black", "straw hat",
    "on vacation shirt", "cashmere cardigan", "ankle socks pack", "crossbody bag leather", "swim shorts",
]
DE_QUERIES = [
    "schwarze sneaker damen", "rotes abendkleid", "herren jeans slim fit", "winterjacke damen lang",
    "weiße bluse", "lederhandtasche braun", "laufschuhe herren", "strickpullover grün",
    "sommerkleid blau", "kapuzenpullover grau", "chino hose beige", "regenjacke kinder",
    "stiefeletten schwarz", "bikini set", "wollmantel camel", "t-shirt gestreift",
    "jeansrock kurz", "sportbh", "daunenweste", "sonnenbrille damen",
    "loafer leder", "pyjama baumwolle", "fleecejacke", "rucksack schwarz", "bademantel",
]


def write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as out:
        for row in rows:
            out.write(json.dumps(row, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n")


def make_images(root: Path, count: int) -> list:
    refs = []
    (root / "images").mkdir(parents=True, exist_ok=True)
    for i in range(count):
        name, rgb = COLOURS[i % len(COLOURS)]
        shape = SHAPES[(i // len(COLOURS)) % len(SHAPES)]
        img = Image.new("RGB", (48, 48), (255, 255, 255))
        draw = ImageDraw.Draw(img)
        if shape == "tee":
            draw.rectangle([12, 10, 36, 42], fill=rgb)
            draw.rectangle([4, 10, 44, 18], fill=rgb)
        elif shape == "sneaker":
            draw.polygon([(6, 34), (20, 20), (42, 30), (42, 38), (6, 38)], fill=rgb)
        elif shape == "dress":
            draw.polygon([(18, 6), (30, 6), (40, 42), (8, 42)], fill=rgb)
        elif shape == "jeans":
            draw.rectangle([14, 6, 34, 14], fill=rgb)
            draw.rectangle([14, 14, 22, 44], fill=rgb)
            draw.rectangle([26, 14, 34, 44], fill=rgb)
        else:
            draw.rectangle([10, 18, 38, 40], fill=rgb)
            draw.arc([16, 6, 32, 26], 180, 360, fill=rgb, width=3)
        if i % 3 == 0:
            for y in range(12, 42, 6):
                draw.line([(12, y), (36, y)], fill=(255, 255, 255), width=1)
        ref = f"images/p{i:02d}.png"
        img.save(root / ref, format="PNG", optimize=False, compress_level=6)
        refs.append(ref)
    return refs


def catalog_pairs(rng: random.Random, image_refs: list) -> list:
    queries = []
    for i in range(50):
        english = i % 2 == 0
        text = EN_QUERIES[i // 2] if english else DE_QUERIES[i // 2]
        gender = ["women", "men", "unisex", None][i % 4]
        query = {
            "query_id": f"q{i + 1:03d}",
            "query_text": text,
            "language": "en" if english else "de",
            "market": "UK" if english else "DE",
            "search_engine_id": "engine-a",
        }
        if gender:
            query["gender_filter"] = gender
        queries.append(query)
    queries[0]["gender_filter"] = "women"

    pairs = []
    for qi, query in enumerate(queries):
        for pi in range(20):
            pid = f"p{qi + 1:03d}-{pi + 1:02d}"
            colour = COLOURS[(qi + pi) % len(COLOURS)][0]
            kind = SHAPES[(qi * 7 + pi) % len(SHAPES)]
            product = {
                "product_id": pid,
                "title": f"{colour.capitalize()} {kind} {pi + 1}",
                "attributes": [["colour", colour], ["category", kind], ["material", rng.choice(["cotton", "wool", "leather", "polyester"])]],
                "description": f"A {colour} {kind} from the fixture catalogue, item {pid}.",
                "image_ref": image_refs[(qi * 20 + pi) % len(image_refs)],
            }
            pairs.append({"query": query, "product": product})
    # The worked example: a women's striped long sleeve shirt.
    pairs[0]["product"].update({
        "title": "Striped long sleeve shirt - green/white",
        "attributes": [["assortment", "women"], ["sleeve length", "long"], ["pattern", "striped"], ["colour", "green/white"]],
        "description": "Long sleeve t-shirt in soft cotton jersey with horizontal stripes.",
        "image_ref": image_refs[3],
    })
    return pairs


def majority(a1, a2, tb):
    return a1 if a1 == a2 else tb


def planted(rng: random.Random, n: int, matches: int):
    annotations, judgments = [], []
    match_idx = set(rng.sample(range(n), matches))
    for i in range(n):
        pair = {"query_id": f"pq{i // 20:03d}", "product_id": f"pp{i:04d}"}
        a1, a2 = rng.choice(LABELS), rng.choice(LABELS)
        tb = rng.choice(LABELS) if a1 != a2 else None
        row = {"pair_id": pair, "a1": a1, "a2": a2}
        if tb:
            row["tiebreaker"] = tb
        annotations.append(row)
        maj = majority(a1, a2, tb)
        label = maj if i in match_idx else rng.choice([l for l in LABELS if l != maj])
        judgments.append(judgment_record(pair, "planted-judge", label, i))
    return annotations, judgments


def judgment_record(pair, model, label, i):
    return {
        "pair_id": pair,
        "model_id": model,
        "variant": "llm_text",
        "guideline_mode": "query_specific",
        "label": label,
        "reasoning": f"fixture reasoning {i}",
        "usage": {"input_tokens": 1000 + i % 7, "output_tokens": 120 + i % 5},
        "analysis_digest": "",
        "guideline_digest": "",
        "refs": {},
    }


def hard_set(rng: random.Random, prefix: str, n_hard: int, n_soft: int, image_refs: list):
    """Pairs where the first n_hard are hard disagreements and the rest are not."""
    pairs, annotations, judgments = [], [], []
    for i in range(n_hard + n_soft):
        qid = f"{prefix}q{i // 10:02d}"
        pid = f"{prefix}p{i:03d}"
        pair = {"query_id": qid, "product_id": pid}
        pairs.append({
            "query": {"query_id": qid, "query_text": EN_QUERIES[i // 10], "language": "en", "market": "UK"},
            "product": {"product_id": pid, "title": f"Fixture product {i}", "attributes": [["colour", "black"]],
                        "description": f"Item {pid}.", "image_ref": image_refs[i % len(image_refs)]},
        })
        if i < n_hard:
            human, llm = ("irrelevant", "highly_relevant") if i % 2 == 0 else ("highly_relevant", "irrelevant")
            annotations.append({"pair_id": pair, "a1": human, "a2": human})
        else:
            llm = rng.choice(LABELS)
            other = "acceptable_substitute" if llm != "acceptable_substitute" else "irrelevant"
            annotations.append({"pair_id": pair, "a1": other, "a2": llm, "tiebreaker": "acceptable_substitute"})
        judgments.append(judgment_record(pair, "fixture-judge", llm, i))
    # Interleave so that hard pairs are not contiguous in file order.
    order = list(range(len(pairs)))
    rng.shuffle(order)
    return [pairs[i] for i in order], [annotations[i] for i in order], [judgments[i] for i in order]


def adjudication(pair, fault, rng: random.Random, i):
    row = {"pair_id": pair, "fault": fault, "notes": f"fixture adjudication {i}", "adjudicator": "fixture",
           "human_error_classes": [], "llm_error_classes": []}
    if fault in ("human_wrong", "both_wrong"):
        row["human_error_classes"] = sorted(rng.sample(HUMAN_CLASSES, rng.randint(1, 2)))
    if fault in ("llm_wrong", "both_wrong"):
        row["llm_error_classes"] = sorted(rng.sample(LLM_CLASSES, rng.randint(1, 2)))
    row["final_label"] = "acceptable_substitute" if fault == "both_wrong" else rng.choice(["irrelevant", "highly_relevant"])
    return row


def query_log(rng: random.Random):
    rows = []
    words = ["shirt", "dress", "jeans", "boots", "jacket", "bag", "scarf", "hat", "socks", "coat"]
    colours = [c for c, _ in COLOURS]
    for i in range(400):
        length = rng.choice([1, 1, 2, 2, 3, 4, 5])
        text = " ".join([rng.choice(colours)] * (length > 1) + [rng.choice(words) for _ in range(max(1, length - 1))])
        row = {
            "query_text": text,
            "language": rng.choice(["en", "de"]),
            "search_engine_id": rng.choice(["engine-a", "engine-b"]),
            "frequency": max(1, int(rng.paretovariate(1.2) * 3)),
        }
        gender = rng.choice(["women", "men", None])
        if gender:
            row["gender_filter"] = gender
        if i % 4 != 0:
            row["signals"] = {"reformulation_rate": round(rng.random(), 3), "exit_rate": round(rng.random(), 3)}
        rows.append(row)
    return rows


def rankings(rng: random.Random):
    out = []
    for q, size in (("rq01", 600), ("rq02", 600), ("rq03", 300)):
        ids = [f"{q}-item{i:04d}" for i in range(size)]
        rng.shuffle(ids)
        out.append({"query_id": q, "ranking": ids})
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent)
    parser.add_argument("--seed", type=int, default=1729)
    args = parser.parse_args()
    root: Path = args.out
    rng = random.Random(args.seed)

    image_refs = make_images(root, 40)
    write_jsonl(root / "catalog" / "pairs.jsonl", catalog_pairs(rng, image_refs))

    annotations, judgments = planted(rng, 1000, 656)
    write_jsonl(root / "planted" / "annotations.jsonl", annotations)
    write_jsonl(root / "planted" / "judgments.jsonl", judgments)

    pairs, annotations, judgments = hard_set(rng, "s", 100, 50, image_refs)
    write_jsonl(root / "stats" / "pairs.jsonl", pairs)
    write_jsonl(root / "stats" / "annotations.jsonl", annotations)
    write_jsonl(root / "stats" / "judgments.jsonl", judgments)
    hard_ids = sorted(a["pair_id"]["product_id"] for a in annotations if a.get("a1") == a.get("a2")
                      and a["a1"] != "acceptable_substitute")
    faults = ["human_wrong"] * 50 + ["llm_wrong"] * 31 + ["both_wrong"] * 19
    rng.shuffle(faults)
    adjudications = []
    for i, (pid, fault) in enumerate(zip(hard_ids, faults)):
        qid = next(a["pair_id"]["query_id"] for a in annotations if a["pair_id"]["product_id"] == pid)
        adjudications.append(adjudication({"query_id": qid, "product_id": pid}, fault, rng, i))
    write_jsonl(root / "stats" / "adjudications.jsonl", adjudications)

    pairs, annotations, judgments = hard_set(rng, "a", 10, 20, image_refs)
    write_jsonl(root / "api" / "pairs.jsonl", pairs)
    write_jsonl(root / "api" / "annotations.jsonl", annotations)
    write_jsonl(root / "api" / "judgments.jsonl", judgments)
    hard = sorted((a["pair_id"] for a in annotations if a.get("a1") == a.get("a2") and a["a1"] != "acceptable_substitute"),
                  key=lambda p: (p["query_id"], p["product_id"]))
    done = [adjudication(p, f, rng, i) for i, (p, f) in enumerate(zip(hard[:3], ["human_wrong", "llm_wrong", "both_wrong"]))]
    for row in done:
        row["created_at"] = "2026-01-01T00:00:00.000Z"
    write_jsonl(root / "api" / "adjudications.jsonl", done)

    write_jsonl(root / "datasets" / "query_log.jsonl", query_log(rng))
    write_jsonl(root / "datasets" / "rankings.jsonl", rankings(rng))
    (root / "datasets" / "curation.json").write_text(
        json.dumps({"exclude": ["red"], "replace": {"black shirt": "black shirts"}}, indent=2) + "\n")


if __name__ == "__main__":
    main()
