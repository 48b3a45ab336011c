"""Adam with coupled L2 weight decay (biases are not decayed)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def decays(name: str) -> bool:
    return not name.endswith(".b")


@dataclass
class Adam:
    lr: float = 1e-3
    weight_decay: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params: dict, grads: dict) -> None:
        """Update ``params`` in place."""
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1 ** t
        c2 = 1.0 - self.beta2 ** t
        for k in sorted(params):
            g = grads[k]
            if self.weight_decay and decays(k):
                g = g + self.weight_decay * params[k]
            m = self.m.get(k)
            if m is None:
                m = self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])
            v = self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self) -> dict:
        return {"lr": self.lr, "weight_decay": self.weight_decay, "beta1": self.beta1,
                "beta2": self.beta2, "eps": self.eps, "step": self.step_count,
                "m": {k: v.tolist() for k, v in self.m.items()},
                "v": {k: v.tolist() for k, v in self.v.items()}}

    @classmethod
    def from_state(cls, d: dict) -> "Adam":
        return cls(d["lr"], d["weight_decay"], d["beta1"], d["beta2"], d["eps"], int(d["step"]),
                   {k: np.asarray(v, dtype=np.float64) for k, v in d["m"].items()},
                   {k: np.asarray(v, dtype=np.float64) for k, v in d["v"].items()})
