import logging

import numpy as np

log = logging.getLogger(__name__)


class Adam:
    """Adam with bias correction. State is keyed by parameter name."""

    def __init__(self, params, lr=3e-4, betas=(0.9, 0.999), eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.betas = tuple(betas)
        self.eps = eps
        self.t = 0
        self.skipped = 0
        self.m = {p.name: np.zeros_like(p.data) for p in self.params}
        self.v = {p.name: np.zeros_like(p.data) for p in self.params}

    def step(self):
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data)
                 for p in self.params]
        if not all(np.all(np.isfinite(g)) for g in grads):
            self.skipped += 1
            log.warning("non-finite gradient, Adam step skipped (%d so far)", self.skipped)
            return False
        self.t += 1
        b1, b2 = self.betas
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g in zip(self.params, grads):
            m = self.m[p.name]
            v = self.v[p.name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        return True

    def state_dict(self):
        state = {}
        for name in self.m:
            state[f"optim.m.{name}"] = self.m[name]
            state[f"optim.v.{name}"] = self.v[name]
        return state

    def load_state_dict(self, arrays, t, skipped=0):
        for name in self.m:
            self.m[name] = np.array(arrays[f"optim.m.{name}"], dtype=np.float64)
            self.v[name] = np.array(arrays[f"optim.v.{name}"], dtype=np.float64)
        self.t = int(t)
        self.skipped = int(skipped)


def adam_step(optimizer):
    """Functional alias for ``optimizer.step()``."""
    return optimizer.step()


def clip_grad_norm(params, max_norm):
    """Scale gradients in place so their global L2 norm is at most ``max_norm``."""
    grads = [p.grad for p in params if p.grad is not None]
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if np.isfinite(norm) and norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for g in grads:
            g *= scale
    return norm
