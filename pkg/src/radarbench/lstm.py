"""Stacked LSTM classifier implemented from scratch on numpy.

Cell equations, per time step, with z = [a_prev, x_t]:

    cand = tanh(W_c . z + b_c)
    i    = sigmoid(W_u . z + b_u)      (update gate)
    f    = sigmoid(W_f . z + b_f)      (forget gate)
    o    = sigmoid(W_o . z + b_o)      (output gate)
    c    = f * c_prev + i * cand       ("standard" gating)
    a    = o * tanh(c)

The alternative "printed" gating c = f * cand + i * c_prev is kept behind
``cell_variant`` for comparison; "standard" is the default.

The default classifier is three stacked layers of 128 cells over
1024 x 2 I/Q sequences: the first layers return the full activation
sequence, the last returns only its final activation, which feeds a
dense softmax head. Training runs in float32; gradient checks use
float64 models.

Checkpoint format (little-endian): magic b"DRLM", format_version u16,
flags u16 (bit0 = printed gating, bit1 = autocorrelation input domain),
n_layers u16, n_classes u16, input_dim u16, then hidden size u16 per
layer, then per layer the stacked gate weights W (4H x (input+H), gate
row order candidate/update/forget/output) and bias b (4H), then the head
weights (n_classes x H) and bias, all float32 C-order.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

CKPT_MAGIC = b"DRLM"
CKPT_VERSION = 1
_FLAG_PRINTED = 1
_FLAG_AUTOCORR = 2


class NumericError(RuntimeError):
    """A non-finite value appeared during forward or backward."""


@dataclass
class CellState:
    """Short-term activation a and long-term memory c of one layer."""

    a: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden: int, dtype=np.float64) -> "CellState":
        return cls(np.zeros(hidden, dtype=dtype), np.zeros(hidden, dtype=dtype))


class LstmLayerParams:
    """Gate weights of one layer, stored stacked for fast math.

    ``w`` has shape (4*hidden, input_dim + hidden) with gate rows ordered
    candidate, update, forget, output; each gate row block applies to the
    concatenation [a_prev, x]. Per-gate views are exposed as w_c/w_u/w_f/
    w_o and b_c/b_u/b_f/b_o.
    """

    def __init__(self, w: np.ndarray, b: np.ndarray, input_dim: int, hidden: int):
        if w.shape != (4 * hidden, input_dim + hidden) or b.shape != (4 * hidden,):
            raise ValueError(f"inconsistent layer shapes {w.shape}, {b.shape}")
        self.w = w
        self.b = b
        self.input_dim = input_dim
        self.hidden = hidden

    def _gate(self, k: int) -> np.ndarray:
        return self.w[k * self.hidden : (k + 1) * self.hidden]

    def _bias(self, k: int) -> np.ndarray:
        return self.b[k * self.hidden : (k + 1) * self.hidden]

    w_c = property(lambda self: self._gate(0))
    w_u = property(lambda self: self._gate(1))
    w_f = property(lambda self: self._gate(2))
    w_o = property(lambda self: self._gate(3))
    b_c = property(lambda self: self._bias(0))
    b_u = property(lambda self: self._bias(1))
    b_f = property(lambda self: self._bias(2))
    b_o = property(lambda self: self._bias(3))

    @property
    def n_params(self) -> int:
        return self.w.size + self.b.size


@dataclass
class Model:
    """Stacked LSTM layers plus a dense softmax head."""

    layers: list
    head_w: np.ndarray
    head_b: np.ndarray
    n_classes: int
    cell_variant: str = "standard"
    input_domain: str = "time"

    def parameters(self) -> list:
        """All parameter arrays in checkpoint order (views, not copies)."""
        out = []
        for layer in self.layers:
            out.extend([layer.w, layer.b])
        out.extend([self.head_w, self.head_b])
        return out

    @property
    def input_dim(self) -> int:
        return self.layers[0].input_dim

    @property
    def dtype(self):
        return self.layers[0].w.dtype

    def copy(self) -> "Model":
        return Model(
            layers=[
                LstmLayerParams(l.w.copy(), l.b.copy(), l.input_dim, l.hidden)
                for l in self.layers
            ],
            head_w=self.head_w.copy(),
            head_b=self.head_b.copy(),
            n_classes=self.n_classes,
            cell_variant=self.cell_variant,
            input_domain=self.input_domain,
        )


def count_params(model: Model) -> int:
    """Trainable parameter count of the LSTM stack (head excluded)."""
    return sum(layer.n_params for layer in model.layers)


def count_head_params(model: Model) -> int:
    return model.head_w.size + model.head_b.size


def init_model(
    n_classes: int,
    layer_sizes=(128, 128, 128),
    input_dim: int = 2,
    seed: int = 0,
    dtype=np.float32,
    cell_variant: str = "standard",
    input_domain: str = "time",
) -> Model:
    """Seeded model initialization.

    Each gate matrix is uniform in +/- sqrt(6 / (fan_in + fan_out));
    biases start at zero except the forget gate's, which starts at 1 to
    keep early memory open. Identical seeds give identical models.
    """
    from . import rng as rngmod

    if n_classes < 2 or any(h < 1 for h in layer_sizes) or input_dim < 1:
        raise ValueError("model sizes must be positive (and at least 2 classes)")
    if cell_variant not in ("standard", "printed"):
        raise ValueError(f"unknown cell variant {cell_variant!r}")
    gen = rngmod.stream(seed, rngmod.DOMAIN_INIT)
    layers = []
    d = input_dim
    for h in layer_sizes:
        w = np.empty((4 * h, d + h))
        limit = np.sqrt(6.0 / ((d + h) + h))
        for k in range(4):  # candidate, update, forget, output
            w[k * h : (k + 1) * h] = gen.uniform(-limit, limit, size=(h, d + h))
        b = np.zeros(4 * h)
        b[2 * h : 3 * h] = 1.0  # forget gate
        layers.append(LstmLayerParams(w.astype(dtype), b.astype(dtype), d, h))
        d = h
    limit = np.sqrt(6.0 / (d + n_classes))
    head_w = gen.uniform(-limit, limit, size=(n_classes, d)).astype(dtype)
    head_b = np.zeros(n_classes, dtype=dtype)
    return Model(layers, head_w, head_b, n_classes, cell_variant, input_domain)


# -- single-step / single-sequence reference path ---------------------------

def lstm_cell_forward(
    params: LstmLayerParams,
    x_t: np.ndarray,
    state_prev: CellState,
    variant: str = "standard",
):
    """One cell step for a single time sample (vector input).

    Returns the new CellState and a cache of gate activations for
    inspection or backprop.
    """
    x_t = np.asarray(x_t)
    if x_t.shape != (params.input_dim,) or state_prev.a.shape != (params.hidden,):
        raise ValueError(
            f"shape mismatch: x {x_t.shape}, state {state_prev.a.shape}, "
            f"layer ({params.input_dim}, {params.hidden})"
        )
    z = np.concatenate([state_prev.a, x_t])
    g = params.w @ z + params.b
    h = params.hidden
    cand = np.tanh(g[:h])
    i_g = expit(g[h : 2 * h])
    f_g = expit(g[2 * h : 3 * h])
    o_g = expit(g[3 * h :])
    if variant == "standard":
        c = f_g * state_prev.c + i_g * cand
    elif variant == "printed":
        c = f_g * cand + i_g * state_prev.c
    else:
        raise ValueError(f"unknown cell variant {variant!r}")
    a = o_g * np.tanh(c)
    cache = {"cand": cand, "i": i_g, "f": f_g, "o": o_g, "z": z, "c_prev": state_prev.c}
    return CellState(a, c), cache


def lstm_layer_forward(
    params: LstmLayerParams,
    seq: np.ndarray,
    return_sequences: bool = True,
    variant: str = "standard",
) -> np.ndarray:
    """Run one layer over a (T, input_dim) sequence from a zero state.

    Returns (T, hidden) activations, or only the final (hidden,) vector
    when return_sequences is False.
    """
    seq = np.asarray(seq)
    if seq.ndim != 2 or seq.shape[1] != params.input_dim:
        raise ValueError(f"expected (T, {params.input_dim}) input, got {seq.shape}")
    if seq.shape[0] < 1:
        raise ValueError("sequence must have at least one step")
    a_states, _ = _layer_forward_batch(params, seq[None, :, :], variant, with_cache=False)
    out = a_states[1:, 0, :]
    return out if return_sequences else out[-1]


# -- batched fast path -------------------------------------------------------

def _layer_forward_batch(params, x, variant, with_cache):
    """Forward a (B, T, D) batch; returns (a_states, cache).

    a_states has shape (T+1, B, H) with the zero initial state at index 0.
    """
    b_n, t_n, d = x.shape
    h = params.hidden
    if d != params.input_dim:
        raise ValueError(f"layer expects input dim {params.input_dim}, got {d}")
    dtype = params.w.dtype
    wa = params.w[:, :h]
    wx = params.w[:, h:]
    xp = x.reshape(b_n * t_n, d) @ wx.T
    xp = np.ascontiguousarray(xp.reshape(b_n, t_n, 4 * h).transpose(1, 0, 2))
    xp += params.b

    a_states = np.zeros((t_n + 1, b_n, h), dtype=dtype)
    c_states = np.zeros((t_n + 1, b_n, h), dtype=dtype)
    acts = np.empty((t_n, b_n, 4 * h), dtype=dtype) if with_cache else None
    tanh_c = np.empty((t_n, b_n, h), dtype=dtype) if with_cache else None

    a_t = a_states[0]
    c_t = c_states[0]
    for t in range(t_n):
        g = xp[t] + a_t @ wa.T
        cand = np.tanh(g[:, :h])
        gates = expit(g[:, h:])
        i_g = gates[:, :h]
        f_g = gates[:, h : 2 * h]
        o_g = gates[:, 2 * h :]
        if variant == "standard":
            c_new = f_g * c_t + i_g * cand
        else:
            c_new = f_g * cand + i_g * c_t
        th = np.tanh(c_new)
        a_new = o_g * th
        a_states[t + 1] = a_new
        c_states[t + 1] = c_new
        if with_cache:
            acts[t, :, :h] = cand
            acts[t, :, h:] = gates
            tanh_c[t] = th
        a_t = a_states[t + 1]
        c_t = c_states[t + 1]

    cache = (a_states, c_states, acts, tanh_c, x) if with_cache else None
    return a_states, cache


def _layer_backward_batch(params, cache, variant, d_seq=None, d_last=None):
    """Backprop one layer; d_seq is (B, T, H) upstream gradient for all
    steps, d_last an extra (B, H) gradient on the final activation.

    Returns (dW, db, dx) with dx shaped like the layer input.
    """
    a_states, c_states, acts, tanh_c, x = cache
    b_n, t_n, d = x.shape
    h = params.hidden
    dtype = params.w.dtype
    wa = params.w[:, :h]
    wx = params.w[:, h:]
    upstream = None if d_seq is None else np.ascontiguousarray(d_seq.transpose(1, 0, 2))

    # Local activation derivatives for every step at once; the reverse
    # loop then only chains the recurrent terms.
    act_deriv = np.empty_like(acts)
    np.multiply(acts[:, :, :h], acts[:, :, :h], out=act_deriv[:, :, :h])
    np.subtract(1.0, act_deriv[:, :, :h], out=act_deriv[:, :, :h])  # 1 - cand^2
    gates = acts[:, :, h:]
    np.subtract(1.0, gates, out=act_deriv[:, :, h:])
    act_deriv[:, :, h:] *= gates  # g * (1 - g)
    o_term = (1.0 - tanh_c * tanh_c) * acts[:, :, 3 * h :]  # o * (1 - tanh(c)^2)

    d_z = np.empty((t_n, b_n, 4 * h), dtype=dtype)
    da_next = np.zeros((b_n, h), dtype=dtype)
    dc_next = np.zeros((b_n, h), dtype=dtype)
    for t in range(t_n - 1, -1, -1):
        da = da_next if upstream is None else da_next + upstream[t]
        if d_last is not None and t == t_n - 1:
            da = da + d_last
        cand = acts[t, :, :h]
        i_g = acts[t, :, h : 2 * h]
        f_g = acts[t, :, 2 * h : 3 * h]
        dz_t = d_z[t]
        dc = dc_next + da * o_term[t]
        if variant == "standard":
            np.multiply(dc, c_states[t], out=dz_t[:, 2 * h : 3 * h])  # df
            np.multiply(dc, cand, out=dz_t[:, h : 2 * h])             # di
            np.multiply(dc, i_g, out=dz_t[:, :h])                     # dcand
            dc_next = dc * f_g
        else:
            np.multiply(dc, cand, out=dz_t[:, 2 * h : 3 * h])
            np.multiply(dc, c_states[t], out=dz_t[:, h : 2 * h])
            np.multiply(dc, f_g, out=dz_t[:, :h])
            dc_next = dc * i_g
        np.multiply(da, tanh_c[t], out=dz_t[:, 3 * h :])              # do
        dz_t *= act_deriv[t]
        da_next = dz_t @ wa

    d_z_flat = d_z.reshape(t_n * b_n, 4 * h)
    d_wa = d_z_flat.T @ a_states[:-1].reshape(t_n * b_n, h)
    d_wx = d_z_flat.T @ np.ascontiguousarray(x.transpose(1, 0, 2)).reshape(t_n * b_n, d)
    d_w = np.concatenate([d_wa, d_wx], axis=1)
    d_b = d_z_flat.sum(axis=0)
    d_x = np.ascontiguousarray(
        (d_z_flat @ wx).reshape(t_n, b_n, d).transpose(1, 0, 2)
    )
    return d_w, d_b, d_x


# -- full model --------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(probs: np.ndarray, label: int) -> float:
    """Negative log likelihood with the probability floored at 1e-12."""
    probs = np.asarray(probs)
    if not 0 <= label < probs.shape[-1]:
        raise ValueError(f"label {label} out of range for {probs.shape[-1]} classes")
    return float(-np.log(max(float(probs[label]), 1e-12)))


def _check_finite(arr, where: str):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {where}")


def model_forward_batch(model: Model, x: np.ndarray, check: bool = False) -> np.ndarray:
    """Class probabilities for a (B, T, input_dim) feature batch."""
    x = np.asarray(x, dtype=model.dtype)
    out = x
    for k, layer in enumerate(model.layers):
        a_states, _ = _layer_forward_batch(layer, out, model.cell_variant, with_cache=False)
        last = k == len(model.layers) - 1
        out = a_states[-1] if last else np.ascontiguousarray(a_states[1:].transpose(1, 0, 2))
        if check:
            _check_finite(out, f"layer {k} activations")
    logits = out @ model.head_w.T + model.head_b
    if check:
        _check_finite(logits, "head logits")
    return softmax(logits)


def model_forward(model: Model, signal, check: bool = False) -> np.ndarray:
    """Probability vector for one signal.

    Accepts a complex sequence, a (T, 2) I/Q array, or an IQSignal.
    """
    x = signal.samples if hasattr(signal, "samples") else np.asarray(signal)
    if np.iscomplexobj(x):
        x = np.stack([x.real, x.imag], axis=-1)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(f"expected (T, {model.input_dim}) input, got {x.shape}")
    return model_forward_batch(model, x[None], check=check)[0]


def model_backward(model: Model, x: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy loss and its gradient for a feature batch.

    x is (B, T, input_dim), labels (B,) integer classes. Returns
    (loss, grads) with grads a list of arrays aligned with
    model.parameters(). Raises NumericError naming the first layer whose
    forward or backward values go non-finite.
    """
    x = np.asarray(x, dtype=model.dtype)
    labels = np.asarray(labels)
    if x.ndim != 3 or len(labels) != x.shape[0]:
        raise ValueError("expected (B, T, D) features with one label per row")
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    b_n = x.shape[0]

    caches = []
    out = x
    for k, layer in enumerate(model.layers):
        a_states, cache = _layer_forward_batch(layer, out, model.cell_variant, with_cache=True)
        _check_finite(a_states[-1], f"layer {k} activations")
        caches.append(cache)
        last = k == len(model.layers) - 1
        out = a_states[-1] if last else np.ascontiguousarray(a_states[1:].transpose(1, 0, 2))

    logits = out @ model.head_w.T + model.head_b
    _check_finite(logits, "head logits")
    probs = softmax(logits)
    p_true = probs[np.arange(b_n), labels]
    loss = float(np.mean(-np.log(np.maximum(p_true, 1e-12))))

    d_logits = probs.copy()
    d_logits[np.arange(b_n), labels] -= 1.0
    d_logits /= b_n
    d_head_w = d_logits.T @ out
    d_head_b = d_logits.sum(axis=0)
    d_out = d_logits @ model.head_w

    grads = [None] * (2 * len(model.layers)) + [d_head_w, d_head_b]
    d_seq = None
    d_last = d_out
    for k in range(len(model.layers) - 1, -1, -1):
        d_w, d_b, d_x = _layer_backward_batch(
            model.layers[k], caches[k], model.cell_variant, d_seq=d_seq, d_last=d_last
        )
        _check_finite(d_w, f"layer {k} weight gradient")
        grads[2 * k] = d_w
        grads[2 * k + 1] = d_b
        d_seq, d_last = d_x, None
    return loss, grads


# -- checkpoints -------------------------------------------------------------

def save_model(model: Model, path) -> Path:
    path = Path(path)
    flags = 0
    if model.cell_variant == "printed":
        flags |= _FLAG_PRINTED
    if model.input_domain == "autocorrelation":
        flags |= _FLAG_AUTOCORR
    with open(path, "wb") as fh:
        fh.write(
            struct.pack(
                "<4sHHHHH",
                CKPT_MAGIC,
                CKPT_VERSION,
                flags,
                len(model.layers),
                model.n_classes,
                model.input_dim,
            )
        )
        fh.write(struct.pack(f"<{len(model.layers)}H", *(l.hidden for l in model.layers)))
        for layer in model.layers:
            fh.write(layer.w.astype("<f4").tobytes())
            fh.write(layer.b.astype("<f4").tobytes())
        fh.write(model.head_w.astype("<f4").tobytes())
        fh.write(model.head_b.astype("<f4").tobytes())
    return path


def load_model(path) -> Model:
    path = Path(path)
    blob = path.read_bytes()
    head = struct.Struct("<4sHHHHH")
    if len(blob) < head.size:
        raise ValueError(f"{path}: truncated checkpoint")
    magic, version, flags, n_layers, n_classes, input_dim = head.unpack_from(blob)
    if magic != CKPT_MAGIC:
        raise ValueError(f"{path}: bad checkpoint magic {magic!r}")
    if version != CKPT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    offset = head.size
    hiddens = struct.unpack_from(f"<{n_layers}H", blob, offset)
    offset += 2 * n_layers

    def take(shape):
        nonlocal offset
        n = int(np.prod(shape))
        arr = np.frombuffer(blob, dtype="<f4", count=n, offset=offset).reshape(shape)
        offset += 4 * n
        return arr.copy()

    layers = []
    d = input_dim
    for h in hiddens:
        w = take((4 * h, d + h))
        b = take((4 * h,))
        layers.append(LstmLayerParams(w, b, d, h))
        d = h
    head_w = take((n_classes, d))
    head_b = take((n_classes,))
    if offset != len(blob):
        raise ValueError(f"{path}: trailing bytes in checkpoint")
    return Model(
        layers,
        head_w,
        head_b,
        n_classes,
        cell_variant="printed" if flags & _FLAG_PRINTED else "standard",
        input_domain="autocorrelation" if flags & _FLAG_AUTOCORR else "time",
    )
