"""Parameters and the small set of layers the vocoder is built from."""
import numpy as np

from . import tensor as T


class Parameter(T.Tensor):
    """A trainable leaf tensor. ``name`` is filled in by the owning Module."""

    __slots__ = ("name",)

    def __init__(self, data, name=""):
        super().__init__(data, requires_grad=True)
        self.name = name


class Module:
    """Container that discovers Parameters and sub-Modules among its attributes.

    Registration order is attribute assignment order, so parameter names and
    their iteration order are stable across runs.
    """

    def named_parameters(self, prefix=""):
        for key, value in vars(self).items():
            path = f"{prefix}{key}"
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(path + ".")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{path}.{i}.")
                    elif isinstance(item, Parameter):
                        yield f"{path}.{i}", item

    def parameters(self):
        params = []
        for name, p in self.named_parameters():
            p.name = name
            params.append(p)
        return params

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise KeyError(f"parameter mismatch: missing={missing} unexpected={unexpected}")
        for name, p in own.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.shape:
                raise T.ShapeError(f"{name}: checkpoint shape {arr.shape} vs model {p.shape}")
            p.data = arr.copy()

    def num_parameters(self):
        return sum(p.size for _, p in self.named_parameters())


def _uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    """Feed-forward layer on (T, in) -> (T, out)."""

    def __init__(self, n_in, n_out, rng):
        self.weight = Parameter(_uniform(rng, (n_in, n_out), n_in))
        self.bias = Parameter(_uniform(rng, (n_out,), n_in))

    def __call__(self, x):
        return T.add(T.matmul(x, self.weight), self.bias)


class Conv1d(Module):
    def __init__(self, n_in, n_out, kernel, rng, dilation=1):
        self.dilation = dilation
        fan_in = n_in * kernel
        self.weight = Parameter(_uniform(rng, (n_out, n_in, kernel), fan_in))
        self.bias = Parameter(_uniform(rng, (n_out,), fan_in))

    def __call__(self, x):
        return T.conv1d(x, self.weight, self.bias, self.dilation)


class LSTM(Module):
    def __init__(self, n_in, hidden, rng, reverse=False):
        self.reverse = reverse
        self.w_ih = Parameter(_uniform(rng, (4 * hidden, n_in), hidden))
        self.w_hh = Parameter(_uniform(rng, (4 * hidden, hidden), hidden))
        b = _uniform(rng, (4 * hidden,), hidden)
        b[hidden:2 * hidden] = 1.0
        self.bias = Parameter(b)

    def __call__(self, x):
        return T.lstm(x, self.w_ih, self.w_hh, self.bias, reverse=self.reverse)


class BiLSTM(Module):
    """Output width is 2 * hidden_per_direction."""

    def __init__(self, n_in, hidden_per_direction, rng):
        self.fwd = LSTM(n_in, hidden_per_direction, rng)
        self.bwd = LSTM(n_in, hidden_per_direction, rng, reverse=True)

    def __call__(self, x):
        return T.concat([self.fwd(x), self.bwd(x)], axis=1)


def zero_parameters(module):
    """Set every parameter of ``module`` to zero (used by structural tests)."""
    for p in module.parameters():
        p.data[...] = 0.0
