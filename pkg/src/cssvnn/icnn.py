"""Input convex neural network with exact first and mixed second derivatives.

Layer recursion for hidden layers ``i = 0 .. k-2``::

    a_0 = Wx_0 x + b_0
    a_i = Wz_i z_i + (Wx_i + Wxa_i) x + b_i        (i >= 1)
    z_{i+1} = softplus(a_i)

and a linear output ``y = Wz_{k-1} z_{k-1}`` with no input pass-through
and no bias. Hidden layers after the first see the input through two
pass-through matrices ``Wx_i`` and ``Wxa_i``; with this layout the
parameter totals of the reference architectures (e.g. 7-8-4-4-1 -> 236)
are the actual parameter counts. The output bias is omitted because a
constant is invisible to stress training and is absorbed by the energy
offset of the models built on top.

``y`` is convex in ``x`` whenever every ``Wz`` entry is non-negative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1
ACTIVATION = "softplus"


def softplus(a):
    return np.logaddexp(0.0, a)


def sigmoid(a):
    # Split form avoids overflow in exp for large |a|.
    out = np.empty_like(a, dtype=np.float64)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True)
class IcnnArch:
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 3:
            raise ValueError("architecture needs an input, at least one hidden layer and an output")
        if sizes[-1] != 1:
            raise ValueError("output layer must have size 1")
        if any(s < 1 for s in sizes):
            raise ValueError("layer sizes must be positive")

    @classmethod
    def parse(cls, text: str) -> "IcnnArch":
        try:
            return cls(tuple(int(t) for t in text.strip().split("-")))
        except ValueError as exc:
            raise ValueError(f"invalid architecture string {text!r}: {exc}") from None

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def hidden(self) -> tuple[int, ...]:
        return self.sizes[1:-1]

    def __str__(self) -> str:
        return "-".join(str(s) for s in self.sizes)


def param_count(arch: IcnnArch) -> int:
    n, h = arch.n_in, arch.hidden
    total = h[0] * (n + 1)
    for prev, cur in zip(h[:-1], h[1:]):
        total += cur * (prev + 2 * n + 1)
    return total + h[-1]


@dataclass
class IcnnParams:
    """Weights of an ICNN.

    Hidden layer ``i`` owns ``wx[i]`` and ``b[i]``; for ``i >= 1`` also
    ``wz[i]`` and ``wxa[i]`` (``None`` at ``i = 0``). ``w_out`` holds the
    output weights. Input columns listed in ``nonneg_inputs`` are
    constrained non-negative in every pass-through matrix.
    """

    arch: IcnnArch
    wx: list
    wxa: list
    wz: list
    b: list
    w_out: np.ndarray
    nonneg_inputs: tuple[int, ...] = field(default_factory=tuple)

    @property
    def n_hidden_layers(self) -> int:
        return len(self.b)

    def copy(self) -> "IcnnParams":
        cp = lambda seq: [None if a is None else a.copy() for a in seq]  # noqa: E731
        return IcnnParams(
            self.arch, cp(self.wx), cp(self.wxa), cp(self.wz), cp(self.b), self.w_out.copy(), self.nonneg_inputs
        )

    def zeros_like(self) -> "IcnnParams":
        zl = lambda seq: [None if a is None else np.zeros_like(a) for a in seq]  # noqa: E731
        return IcnnParams(
            self.arch, zl(self.wx), zl(self.wxa), zl(self.wz), zl(self.b), np.zeros_like(self.w_out), self.nonneg_inputs
        )

    def arrays(self) -> list[np.ndarray]:
        """Parameter arrays in canonical flat order."""
        out = []
        for i in range(self.n_hidden_layers):
            if i > 0:
                out.append(self.wz[i])
            out.append(self.wx[i])
            if i > 0:
                out.append(self.wxa[i])
            out.append(self.b[i])
        out.append(self.w_out)
        return out

    def to_vector(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def from_vector(self, vec) -> "IcnnParams":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != param_count(self.arch):
            raise ValueError(f"expected {param_count(self.arch)} parameters, got {vec.size}")
        p = self.zeros_like()
        pos = 0
        for a in p.arrays():
            a[...] = vec[pos : pos + a.size].reshape(a.shape)
            pos += a.size
        return p

    def nonneg_vector_mask(self) -> np.ndarray:
        """Boolean mask over ``to_vector()`` marking constrained entries."""
        m = self.zeros_like()
        for i in range(self.n_hidden_layers):
            if i > 0:
                m.wz[i][...] = 1.0
            for mat in (m.wx[i], m.wxa[i]):
                if mat is not None and self.nonneg_inputs:
                    mat[:, list(self.nonneg_inputs)] = 1.0
        m.w_out[...] = 1.0
        return m.to_vector() > 0.5

    def nonneg_violation(self) -> float:
        """Most negative constrained entry (0.0 when feasible)."""
        v = self.to_vector()[self.nonneg_vector_mask()]
        return float(max(0.0, -v.min())) if v.size else 0.0

    def layer_offsets(self) -> np.ndarray:
        """Flat offsets ``(wz, wx, wxa, b)`` per layer, -1 where absent; last row is the output."""
        rows = []
        pos = 0
        for i in range(self.n_hidden_layers):
            row = [-1, -1, -1, -1]
            if i > 0:
                row[0] = pos
                pos += self.wz[i].size
            row[1] = pos
            pos += self.wx[i].size
            if i > 0:
                row[2] = pos
                pos += self.wxa[i].size
            row[3] = pos
            pos += self.b[i].size
            rows.append(row)
        rows.append([pos, -1, -1, -1])
        return np.array(rows, dtype=np.int64)


def init(arch: IcnnArch, seed: int, nonneg_inputs=()) -> IcnnParams:
    """Glorot-uniform weights, zero biases, constrained entries made non-negative."""
    rng = np.random.default_rng(seed)
    n, h = arch.n_in, arch.hidden

    def glorot(rows, cols):
        lim = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-lim, lim, size=(rows, cols))

    wx, wxa, wz, b = [], [], [], []
    prev = None
    for i, cur in enumerate(h):
        if i == 0:
            wz.append(None)
            wxa.append(None)
        else:
            wz.append(np.abs(glorot(cur, prev)))
        wx.append(glorot(cur, n))
        if i > 0:
            wxa.append(glorot(cur, n))
        b.append(np.zeros(cur))
        prev = cur
    w_out = np.abs(glorot(1, h[-1]))[0]
    p = IcnnParams(arch, wx, wxa, wz, b, w_out, tuple(nonneg_inputs))
    return project_nonneg(p)


def project_nonneg(params: IcnnParams) -> IcnnParams:
    """Clamp constrained entries at zero; everything else is returned untouched."""
    p = params.copy()
    cols = list(p.nonneg_inputs)
    for i in range(p.n_hidden_layers):
        if p.wz[i] is not None:
            np.maximum(p.wz[i], 0.0, out=p.wz[i])
        if cols:
            for mat in (p.wx[i], p.wxa[i]):
                if mat is not None:
                    mat[:, cols] = np.maximum(mat[:, cols], 0.0)
    np.maximum(p.w_out, 0.0, out=p.w_out)
    return p


def _as_batch(params: IcnnParams, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    if xb.ndim != 2 or xb.shape[1] != params.arch.n_in:
        raise ValueError(f"input must have {params.arch.n_in} features, got shape {x.shape}")
    return xb, single


def _pass(params: IcnnParams, i: int) -> np.ndarray:
    if params.wxa[i] is None:
        return params.wx[i]
    return params.wx[i] + params.wxa[i]


def _trace(params: IcnnParams, xb):
    """Pre-activations ``a[i]`` and activations ``z[i]`` (``z[0]`` unused)."""
    a, z = [], [None]
    for i in range(params.n_hidden_layers):
        pre = xb @ _pass(params, i).T + params.b[i]
        if i > 0:
            pre = pre + z[i] @ params.wz[i].T
        a.append(pre)
        z.append(softplus(pre))
    return a, z


def forward(params: IcnnParams, x):
    xb, single = _as_batch(params, x)
    _, z = _trace(params, xb)
    y = z[-1] @ params.w_out
    return float(y[0]) if single else y


def grad_input(params: IcnnParams, x):
    xb, single = _as_batch(params, x)
    a, _ = _trace(params, xb)
    zbar = np.broadcast_to(params.w_out, a[-1].shape)
    g = np.zeros_like(xb)
    for i in reversed(range(params.n_hidden_layers)):
        abar = zbar * sigmoid(a[i])
        g += abar @ _pass(params, i)
        if i > 0:
            zbar = abar @ params.wz[i]
    return g[0] if single else g


def grad_params_value(params: IcnnParams, x, adjoint) -> IcnnParams:
    """d(sum_n adjoint_n * y(x_n)) / d theta."""
    xb, _ = _as_batch(params, x)
    c = np.broadcast_to(np.asarray(adjoint, dtype=np.float64), (xb.shape[0],))
    a, z = _trace(params, xb)
    gp = params.zeros_like()
    gp.w_out[...] = c @ z[-1]
    zbar = c[:, None] * params.w_out[None, :]
    for i in reversed(range(params.n_hidden_layers)):
        abar = zbar * sigmoid(a[i])
        gp.b[i][...] = abar.sum(axis=0)
        gx = abar.T @ xb
        gp.wx[i][...] = gx
        if i > 0:
            gp.wxa[i][...] = gx
            gp.wz[i][...] = abar.T @ z[i]
            zbar = abar @ params.wz[i]
    return gp


def grad_params_of_input_gradient(params: IcnnParams, x, u) -> IcnnParams:
    """d(sum_n u_n . grad_input(x_n)) / d theta.

    The directional derivative ``u . dy/dx`` is propagated forward as a
    tangent and then differentiated in reverse.
    """
    xb, single = _as_batch(params, x)
    ub = np.asarray(u, dtype=np.float64)
    ub = ub[None, :] if ub.ndim == 1 else ub
    if ub.shape != xb.shape:
        raise ValueError(f"direction shape {ub.shape} does not match input shape {xb.shape}")
    a, z = _trace(params, xb)
    L = params.n_hidden_layers
    adot, zdot = [], [None]
    for i in range(L):
        t = ub @ _pass(params, i).T
        if i > 0:
            t = t + zdot[i] @ params.wz[i].T
        adot.append(t)
        zdot.append(sigmoid(a[i]) * t)

    gp = params.zeros_like()
    gp.w_out[...] = zdot[-1].sum(axis=0)
    zdbar = np.broadcast_to(params.w_out, a[-1].shape)
    zbar = np.zeros_like(a[-1])
    for i in reversed(range(L)):
        s1 = sigmoid(a[i])
        s2 = s1 * (1.0 - s1)
        adbar = zdbar * s1
        abar = zdbar * s2 * adot[i] + zbar * s1
        gp.b[i][...] = abar.sum(axis=0)
        gx = abar.T @ xb + adbar.T @ ub
        gp.wx[i][...] = gx
        if i > 0:
            gp.wxa[i][...] = gx
            gp.wz[i][...] = abar.T @ z[i] + adbar.T @ zdot[i]
            zbar = abar @ params.wz[i]
            zdbar = adbar @ params.wz[i]
    return gp


# ---------------------------------------------------------------- checkpoints


def _float_list(a):
    return [float(v) for v in np.asarray(a).ravel()]


def params_to_dict(params: IcnnParams) -> dict:
    layers = []
    for i in range(params.n_hidden_layers):
        layer = {"wx": _float_list(params.wx[i]), "b": _float_list(params.b[i])}
        if i > 0:
            layer["wz"] = _float_list(params.wz[i])
            layer["wxa"] = _float_list(params.wxa[i])
        layers.append(layer)
    return {
        "layer_sizes": list(params.arch.sizes),
        "activation": ACTIVATION,
        "layers": layers,
        "w_out": _float_list(params.w_out),
        "nonneg_inputs": list(params.nonneg_inputs),
    }


def params_from_dict(d: dict) -> IcnnParams:
    arch = IcnnArch(tuple(d["layer_sizes"]))
    if d.get("activation", ACTIVATION) != ACTIVATION:
        raise ValueError(f"unsupported activation {d['activation']!r}")
    n, h = arch.n_in, arch.hidden
    if len(d["layers"]) != len(h):
        raise ValueError("layer count does not match layer_sizes")

    def arr(values, shape):
        a = np.array(values, dtype=np.float64)
        if a.size != int(np.prod(shape)):
            raise ValueError(f"weight array of size {a.size} cannot take shape {shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("checkpoint contains non-finite weights")
        return a.reshape(shape)

    wx, wxa, wz, b = [], [], [], []
    for i, (layer, cur) in enumerate(zip(d["layers"], h)):
        wx.append(arr(layer["wx"], (cur, n)))
        b.append(arr(layer["b"], (cur,)))
        if i == 0:
            wz.append(None)
            wxa.append(None)
        else:
            wz.append(arr(layer["wz"], (cur, h[i - 1])))
            wxa.append(arr(layer["wxa"], (cur, n)))
    w_out = arr(d["w_out"], (h[-1],))
    return IcnnParams(arch, wx, wxa, wz, b, w_out, tuple(int(c) for c in d.get("nonneg_inputs", ())))


def dumps_checkpoint(doc: dict) -> str:
    return json.dumps(doc, indent=1, allow_nan=False)
