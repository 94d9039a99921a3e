"""Shared helpers for the test suite."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from semiae.dataset import RatingDataset


def make_random_dataset(rng: np.random.Generator, num_users: int,
                        num_items: int, num_ratings: int,
                        integer_ratings: bool = True) -> RatingDataset:
    """A random explicit-rating dataset with distinct (user, item) pairs."""
    total = num_users * num_items
    num_ratings = min(num_ratings, total)
    flat = rng.choice(total, size=num_ratings, replace=False)
    users, items = np.divmod(np.sort(flat), num_items)
    if integer_ratings:
        ratings = rng.integers(1, 6, num_ratings).astype(np.float64)
    else:
        ratings = rng.uniform(1.0, 5.0, num_ratings)
    return RatingDataset(
        num_users=num_users,
        num_items=num_items,
        users=users.astype(np.int32),
        items=items.astype(np.int32),
        ratings=ratings,
        timestamps=rng.integers(8.7e8, 9e8, num_ratings),
    )


def find_real_data(name: str) -> Path | None:
    """Locate a real MovieLens directory (ml-100k or ml-1m), if present.

    Looks under $SEMIAE_DATA_DIR and ./data.  Returns None when the raw
    files are not on disk, so data-dependent tests can skip with a message.
    """
    candidates = []
    env = os.environ.get("SEMIAE_DATA_DIR")
    if env:
        candidates.append(Path(env) / name)
    candidates.append(Path(__file__).resolve().parents[1] / "data" / name)
    probe = {"ml-100k": "u.data", "ml-1m": "ratings.dat"}[name]
    for cand in candidates:
        if (cand / probe).exists():
            return cand
    return None


MISSING_DATA_MSG = (
    "real MovieLens data not found; place the extracted {name} directory "
    "under ./data/ or $SEMIAE_DATA_DIR (python3 tools/fetch_movielens.py "
    "downloads it on a networked machine)"
)


# --------------------------------------------------------------------------
# Independent oracles.  These deliberately avoid the library's forward/loss/
# gradient code paths so that agreement is evidence, not tautology.
# --------------------------------------------------------------------------

def finite_difference_grads(params, batch_x, targets, mask=None, reg=0.0,
                            eps=1e-5):
    """Central-difference gradients of the (masked) loss, coordinate by
    coordinate."""
    from dataclasses import replace

    from semiae.model import masked_loss, subset_loss

    def loss_of(p):
        if mask is not None:
            return masked_loss(p, batch_x, targets, mask, reg)
        return subset_loss(p, batch_x, targets, reg)

    grads = {}
    for name in ("Q", "Q1", "p", "p1"):
        base = getattr(params, name)
        g = np.zeros_like(base)
        it = np.nditer(base, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            plus, minus = base.copy(), base.copy()
            plus[idx] += eps
            minus[idx] -= eps
            g[idx] = (loss_of(replace(params, **{name: plus}))
                      - loss_of(replace(params, **{name: minus}))) / (2 * eps)
        grads[name] = g
    return grads


def gradcheck_error(analytic, numeric):
    """Worst symmetric relative error, with a small floor for near-zero
    entries."""
    worst = 0.0
    for name in ("Q", "Q1", "p", "p1"):
        a = analytic[name]
        n = numeric[name]
        err = np.abs(a - n) / (np.abs(a) + np.abs(n) + 1e-3)
        worst = max(worst, float(err.max()))
    return worst


_NAIVE_ACTS = {
    "identity": (lambda z: z, lambda z: np.ones_like(z)),
    "sigmoid": (lambda z: 1.0 / (1.0 + np.exp(-z)),
                lambda z: np.exp(-z) / (1.0 + np.exp(-z)) ** 2),
    "tanh": (np.tanh, lambda z: 1.0 / np.cosh(z) ** 2),
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(float)),
}


def classical_autoencoder(W, b, W1, b1, g_name, f_name, batch_x):
    """Plain three-layer autoencoder in column convention:

        h = g(W x + b),  x' = f(W1 h + b1),  loss = mean_rows ||x - x'||^2

    computed sample by sample with its own activation formulas and loop
    gradients.  W is (H, D), W1 is (D, H).
    """
    g, dg = _NAIVE_ACTS[g_name]
    f, df = _NAIVE_ACTS[f_name]
    n_rows = batch_x.shape[0]
    hidden, outputs = [], []
    d_w = np.zeros_like(W)
    d_b = np.zeros_like(b)
    d_w1 = np.zeros_like(W1)
    d_b1 = np.zeros_like(b1)
    total = 0.0
    for x in batch_x:
        z1 = W @ x + b
        h = g(z1)
        z2 = W1 @ h + b1
        xp = f(z2)
        hidden.append(h)
        outputs.append(xp)
        e = xp - x
        total += float(e @ e)
        dz2 = (2.0 / n_rows) * e * df(z2)
        d_w1 += np.outer(dz2, h)
        d_b1 += dz2
        dz1 = (W1.T @ dz2) * dg(z1)
        d_w += np.outer(dz1, x)
        d_b += dz1
    return (np.asarray(hidden), np.asarray(outputs), total / n_rows,
            d_w, d_b, d_w1, d_b1)


def brute_force_masked_loss(out, targets, mask, Q, Q1, reg):
    """Masked squared-error objective, one explicit term per observed entry.

    Terms are combined with math.fsum (exactly rounded), so the value does
    not depend on enumeration order and can be compared with ``==``.
    """
    import math

    n_rows = out.shape[0]
    terms = []
    for r in range(out.shape[0]):
        for c in range(out.shape[1]):
            if mask[r][c]:
                d = float(out[r][c]) - float(targets[r][c])
                terms.append(d * d)
    penalty = 0.0
    if reg != 0.0:
        sq = math.fsum(float(v) * float(v) for row in Q for v in row)
        sq1 = math.fsum(float(v) * float(v) for row in Q1 for v in row)
        penalty = 0.5 * reg * (sq + sq1)
    return math.fsum(terms) / n_rows + penalty
