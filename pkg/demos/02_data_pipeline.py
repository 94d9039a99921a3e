#!/usr/bin/env python3
# The data pipeline end to end on a generated MovieLens-layout directory:
# parsing, side-information encoding, splitting, binarization and the dense
# partial-observed vectors the trainers consume.

import tempfile
from pathlib import Path

import numpy as np

from semiae.dataset import (binarize, build_vectors, load_raw_directory,
                            split)
from semiae.synthetic import write_ml100k_layout

raw = write_ml100k_layout(Path(tempfile.mkdtemp()) / "ml-100k-mini",
                          num_users=12, num_items=9, num_ratings=60, seed=5)
print("raw files:", sorted(p.name for p in raw.iterdir()))

data = load_raw_directory(raw, "ml-100k")
ds = data.ratings
print(f"\nparsed: {ds.num_users} users x {ds.num_items} items, "
      f"{len(ds)} observed ratings")
print("first triple (user, item, rating, timestamp):", ds.triples()[0])

print("\nuser profile encoding:", data.user_side.dim, "columns")
print("  blocks:", data.user_side.column_labels[:2], "...",
      data.user_side.column_labels[-7:])
print("  one row:", np.flatnonzero(data.user_side.rows[0]),
      "<- indices of the hot entries")
print("item feature encoding:", data.item_side.dim, "columns "
      "(19 genre flags + a year scalar)")
print("  one row, year scalar:", data.item_side.rows[0][-1])

# Seeded splitting partitions the observed set exactly.
train, test = split(ds, train_fraction=0.7, seed=1)
print(f"\nsplit 70/30: |train|={len(train)} |test|={len(test)} "
      f"(sum {len(train) + len(test)})")

# Binarization for the ranking task: only ratings above the threshold
# survive, as 1s; the rest leave the observed set entirely.
btrain = binarize(train, threshold=4.0)
print(f"binarized train: {len(btrain)} liked interactions "
      f"out of {len(train)} ratings")

iv = build_vectors(btrain, "user")
print("\nuser-based interaction matrix:", iv.vectors.shape,
      "| observed cells:", int(iv.mask.sum()))
item_view = build_vectors(btrain, "item")
print("item-based view is its transpose:",
      np.array_equal(iv.vectors.T, item_view.vectors))
