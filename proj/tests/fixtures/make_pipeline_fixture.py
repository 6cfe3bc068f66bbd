#!/usr/bin/env python3
"""Regenerates tests/fixtures/pipeline: a small two-source manifest with unknown
labels, per-image labels, and predictions from three synthetic models of different
quality. Output is fully determined by SEED."""

import random
from pathlib import Path

SEED = 20240611
OUT = Path(__file__).resolve().parent / "pipeline"

# (source, benign, malignant, unknown)
SOURCES = [("srcA", 310, 62, 45), ("srcB", 205, 94, 0)]
# name -> (separation, noise)
MODELS = {"densenet": (0.21, 0.22), "inception": (0.18, 0.23), "resnet": (0.13, 0.25)}


def main() -> None:
    rng = random.Random(SEED)
    OUT.mkdir(parents=True, exist_ok=True)
    records = []
    for source, nb, nm, nu in SOURCES:
        labels = ["benign"] * nb + ["malignant"] * nm + ["unknown"] * nu
        rng.shuffle(labels)
        for i, label in enumerate(labels):
            records.append((f"{source}_{i:04d}", f"images/{source}_{i:04d}.jpg", label, source))

    with open(OUT / "manifest.csv", "w", newline="\n") as f:
        f.write("image_id,path,label,source\n")
        for r in records:
            f.write(",".join(r) + "\n")

    known = [r for r in records if r[2] != "unknown"]
    with open(OUT / "labels.csv", "w", newline="\n") as f:
        f.write("image_id,label\n")
        for image_id, _, label, _ in known:
            f.write(f"{image_id},{label}\n")

    for name, (sep, noise) in MODELS.items():
        with open(OUT / f"{name}.csv", "w", newline="\n") as f:
            f.write("image_id,p_benign,p_malignant\n")
            for image_id, _, label, _ in known:
                centre = 0.5 + (sep if label == "malignant" else -sep)
                m = min(max(rng.gauss(centre, noise), 0.0), 1.0)
                m_milli = round(m * 10000)
                f.write(f"{image_id},{(10000 - m_milli) / 10000:.4f},{m_milli / 10000:.4f}\n")


if __name__ == "__main__":
    main()
