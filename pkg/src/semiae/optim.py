"""Parameter-update rules: plain gradient descent, RMSProp and Adam.

Updates are functional: ``update`` returns a new state and new parameters,
leaving its inputs untouched, so a training loop stays a pure fold and two
runs from the same seed are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .model import GradientSet, SemiAEParams, with_arrays

OPTIMIZER_KINDS = ("sgd", "rmsprop", "adam")

_SLOT_NAMES = ("Q", "Q1", "p", "p1")


@dataclass(frozen=True)
class OptimizerState:
    """Optimizer kind, hyperparameters and per-parameter accumulators.

    ``slots`` maps parameter name -> accumulator dict ("m"/"v" for adam,
    "acc" for rmsprop); sgd keeps none.  ``t`` counts completed updates.
    """

    kind: str
    learning_rate: float
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rho: float = 0.9
    slots: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer {self.kind!r}; "
                             f"valid: {OPTIMIZER_KINDS}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def make_optimizer(kind: str, learning_rate: float, **hyper) -> OptimizerState:
    """Fresh optimizer state with canonical default hyperparameters."""
    return OptimizerState(kind=kind, learning_rate=learning_rate, **hyper)


def _grad_items(grads: GradientSet):
    return zip(_SLOT_NAMES, (grads.dQ, grads.dQ1, grads.dp, grads.dp1))


def _param_arrays(params: SemiAEParams):
    return params.Q, params.Q1, params.p, params.p1


def update(state: OptimizerState, params: SemiAEParams,
           grads: GradientSet) -> tuple[OptimizerState, SemiAEParams]:
    """Apply one optimizer step; returns (new state, new parameters)."""
    grads.check_shapes(params)
    for name, g in _grad_items(grads):
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient for parameter {name}")

    eta = state.learning_rate
    t = state.t + 1
    new_slots: dict = {}
    new_arrays = []
    # accumulators and steps are built with explicit buffers: parameters can
    # hold millions of entries and temporary churn dominates the update cost
    for (name, g), theta in zip(_grad_items(grads), _param_arrays(params)):
        if state.kind == "sgd":
            step = np.multiply(g, eta)
            np.subtract(theta, step, out=step)
            new_arrays.append(step)
        elif state.kind == "rmsprop":
            acc_prev = state.slots.get(name, {}).get("acc")
            # acc = rho * acc_prev + (1 - rho) * g * g
            scaled = np.multiply(g, 1.0 - state.rho)
            scaled *= g
            if acc_prev is None:
                acc = scaled
            else:
                acc = np.multiply(acc_prev, state.rho)
                acc += scaled
            # theta - eta * g / sqrt(acc + eps)
            denom = np.add(acc, state.eps)
            np.sqrt(denom, out=denom)
            step = np.multiply(g, eta)
            step /= denom
            np.subtract(theta, step, out=step)
            new_arrays.append(step)
            new_slots[name] = {"acc": acc}
        else:  # adam
            slot = state.slots.get(name, {})
            m_prev, v_prev = slot.get("m"), slot.get("v")
            # m = beta1 * m_prev + (1 - beta1) * g
            m = np.multiply(g, 1.0 - state.beta1)
            if m_prev is not None:
                m += state.beta1 * m_prev
            # v = beta2 * v_prev + (1 - beta2) * g * g
            v = np.multiply(g, 1.0 - state.beta2)
            v *= g
            if v_prev is not None:
                v += state.beta2 * v_prev
            # theta - eta * (m / (1-beta1^t)) / (sqrt(v / (1-beta2^t)) + eps)
            step = np.divide(m, 1.0 - state.beta1 ** t)
            step *= eta
            denom = np.divide(v, 1.0 - state.beta2 ** t)
            np.sqrt(denom, out=denom)
            denom += state.eps
            step /= denom
            np.subtract(theta, step, out=step)
            new_arrays.append(step)
            new_slots[name] = {"m": m, "v": v}

    new_state = replace(state, t=t, slots=new_slots)
    return new_state, with_arrays(params, *new_arrays)
