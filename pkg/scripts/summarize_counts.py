#!/usr/bin/env python3
"""
Enumeration Summary Tables

Counts rooted bipartite maps, well-charged trees and tight pointed maps at
small sizes and writes the tables used in docs/REPRODUCTION.md:
- rooted planar and plane maps per edge count, with growth ratios
- well-charged trees per charge and closure size
- pointed maps per tightness verdict

Usage: python scripts/summarize_counts.py [--edges 4]
"""

import argparse
import json
import os
import sys
from collections import Counter

import numpy as np
import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.blossom.blossoming import enumerate_well_charged_trees
from src.blossom.orientation import classify_tightness
from src.blossom.planar_map import (
    enumerate_bipartite_plane_maps, enumerate_bipartite_planar_maps, enumerate_pointed_maps,
)


def map_counts(max_edges):
    """Rooted planar and plane bipartite maps per edge count."""
    rows = []
    for n in range(1, max_edges + 1):
        rows.append({
            "edges": n,
            "planar": len(enumerate_bipartite_planar_maps(n)),
            "plane": len(enumerate_bipartite_plane_maps(n)),
        })
    df = pd.DataFrame(rows)
    planar = df["planar"].to_numpy(dtype=float)
    df["planar_ratio"] = np.round(np.concatenate([[np.nan], planar[1:] / planar[:-1]]), 3)
    return df


def tree_counts(max_edges, charges=(-2, -1, 0, 1, 2)):
    """Well-charged white-rooted trees per charge and number of tree edges."""
    rows = []
    for c in charges:
        for tree in enumerate_well_charged_trees(c, max_edges):
            rows.append({"charge": c, "tree_edges": tree.num_edges(), "stems": len(tree.stem_darts())})
    df = pd.DataFrame(rows, columns=["charge", "tree_edges", "stems"])
    return df.groupby(["charge", "tree_edges"]).size().reset_index(name="trees")


def tightness_counts(max_edges):
    """Pointed maps per tau color and tightness verdict."""
    counts = Counter()
    for n in range(1, max_edges + 1):
        for m, tau in enumerate_pointed_maps(n):
            counts[(n, m.color(tau).value, classify_tightness(m, tau).verdict.value)] += 1
    rows = [{"edges": n, "tau_color": c, "verdict": v, "maps": counts[(n, c, v)]}
            for n, c, v in sorted(counts)]
    return pd.DataFrame(rows, columns=["edges", "tau_color", "verdict", "maps"])


def run_summary(max_edges):
    print("=" * 60)
    print("Blossom Enumeration Summary")
    print("=" * 60)

    tables = {
        "map_counts": map_counts(max_edges),
        "tree_counts": tree_counts(max_edges),
        "tightness_counts": tightness_counts(min(max_edges, 4)),
    }
    for name, df in tables.items():
        print(f"\n{name}:")
        print(df.to_string(index=False))

    os.makedirs("data/processed", exist_ok=True)
    for name, df in tables.items():
        df.to_csv(f"data/processed/{name}.csv", index=False)
    with open("data/processed/summary.json", "w") as f:
        json.dump({name: df.to_dict("records") for name, df in tables.items()}, f, indent=2, default=str)

    print(f"\n{'='*60}")
    print("Summary complete. Tables saved to data/processed/")
    print(f"{'='*60}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Enumeration summary tables")
    parser.add_argument("--edges", type=int, default=4)
    args = parser.parse_args()
    run_summary(args.edges)
