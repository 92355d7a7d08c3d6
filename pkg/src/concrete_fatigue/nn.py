"""Feed-forward surrogate for the accumulated fatigue life of two-stage loading.

Plain numpy: forward pass, backpropagation through a physics-augmented loss,
Adam, early stopping and a text model format. Inputs are the raw features
``(s1max, delta_smax, eta_cons)``; the model owns a fixed min-max scaler.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_LEVELS, rng
from .errors import CorruptFile, NonFiniteLoss, VersionMismatch, ZeroVariance

log = logging.getLogger(__name__)

MAGIC = "concrete-fatigue-surrogate"
FORMAT_VERSION = 1
HISTORY_HEADER = "epoch,l_data,l_const,l_bound,l_spars,l_total,l_val"
SPARSE_ETAS = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30)


@dataclass(frozen=True)
class NetworkConfig:
    layer_sizes: tuple = (3,) + (16,) * 10 + (1,)
    zeta: float = 1.0
    activation: str = "elu"

    def __post_init__(self):
        if self.layer_sizes[0] != 3 or self.layer_sizes[-1] != 1:
            raise ValueError("network must map 3 features to 1 output")
        if self.activation not in ("elu", "relu"):
            raise ValueError("activation must be 'elu' or 'relu'")

    @classmethod
    def deep(cls, hidden_layers=10, width=16, **kw):
        return cls(layer_sizes=(3,) + (width,) * hidden_layers + (1,), **kw)


@dataclass(frozen=True)
class Scaler:
    lo: tuple = (0.60, -0.30, 0.0)
    hi: tuple = (0.95, 0.30, 1.0)

    def __post_init__(self):
        if any(not a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("scaler needs min < max for every feature")

    def transform(self, x):
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        z = (np.asarray(x, dtype=float) - lo) / (hi - lo)
        if np.any((z < 0) | (z > 1)):
            log.debug("features outside the scaler range; extrapolating")
        return z

    def inverse(self, z):
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.asarray(z, dtype=float) * (hi - lo) + lo


@dataclass(frozen=True)
class LossWeights:
    w_const: float = 0.5
    w_bound: float = 1.0
    w_spars: float = 2.0
    use_const: bool = True
    use_bound: bool = True
    use_spars: bool = True

    def __post_init__(self):
        if min(self.w_const, self.w_bound, self.w_spars) < 0:
            raise ValueError("loss weights must be >= 0")

    @classmethod
    def data_only(cls):
        return cls(0.0, 0.0, 0.0, False, False, False)

    @property
    def const(self):
        return self.w_const if self.use_const else 0.0

    @property
    def bound(self):
        return self.w_bound if self.use_bound else 0.0

    @property
    def spars(self):
        return self.w_spars if self.use_spars else 0.0


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-4
    batch_size: int = 0          # 0: full batch
    max_epochs: int = 20000
    patience: int = 500
    loss_tolerance: float = 0.0
    min_delta: float = 0.0
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 1 (or 0 for full batch)")


@dataclass
class SurrogateModel:
    weights: list                 # W[l] has shape (n_out, n_in)
    biases: list
    scaler: Scaler = field(default_factory=Scaler)
    config: NetworkConfig = field(default_factory=NetworkConfig)

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self):
        return SurrogateModel([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                              self.scaler, self.config)


def init_model(config=None, seed=0, scaler=None):
    """Glorot-uniform weights, zero biases."""
    config = config or NetworkConfig()
    g = rng(seed, "nn-init")
    weights, biases = [], []
    for n_in, n_out in zip(config.layer_sizes[:-1], config.layer_sizes[1:]):
        lim = math.sqrt(6.0 / (n_in + n_out))
        weights.append(g.uniform(-lim, lim, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return SurrogateModel(weights, biases, scaler or Scaler(), config)


def elu(x, zeta=1.0):
    return np.where(x > 0, x, zeta * np.expm1(np.minimum(x, 0.0)))


def _act(x, cfg):
    if cfg.activation == "relu":
        return np.maximum(x, 0.0)
    return elu(x, cfg.zeta)


def _act_grad(x, cfg):
    if cfg.activation == "relu":
        return (x > 0).astype(float)
    return np.where(x > 0, 1.0, cfg.zeta * np.exp(np.minimum(x, 0.0)))


def _forward(model, z):
    """Forward pass on scaled inputs ``(N, 3)``; returns output and pre-activations."""
    a = z
    pre = []
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = a @ w.T + b
        pre.append((a, h))
        a = h if l == last else _act(h, model.config)
    return a[:, 0], pre


def forward(model, z):
    """Raw (unclamped) network output for scaled inputs."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return _forward(model, z)[0]


def predict_raw(model, x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return _forward(model, model.scaler.transform(x))[0]


def predict(model, s1max, delta_smax, eta_cons):
    """Accumulated life with the inference clamp ``max(y, eta_cons)``."""
    y = predict_raw(model, [[s1max, delta_smax, eta_cons]])[0]
    return max(float(y), float(eta_cons))


def predict_many(model, x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.maximum(predict_raw(model, x), x[:, 2])


def _backward(model, pre, dy):
    """Gradients for upstream derivative ``dy`` of the loss w.r.t. raw outputs."""
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    delta = dy[:, None]
    for l in range(len(model.weights) - 1, -1, -1):
        a_in, _ = pre[l]
        grads_w[l] = delta.T @ a_in
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l]) * _act_grad(pre[l - 1][1], model.config)
    return grads_w, grads_b


@dataclass(frozen=True)
class Collocation:
    boundary: np.ndarray    # raw features at eta in {0, 1}
    sparse: np.ndarray      # raw features at eta in 0.05..0.30

    @property
    def size(self):
        return len(self.boundary) + len(self.sparse)


def make_collocation(levels=DEFAULT_LEVELS, sparse_etas=SPARSE_ETAS):
    pairs = []
    levels = sorted(levels)
    for s1 in levels:
        for s2 in levels:
            if s2 != s1:
                pairs.append((s1, round(s1 - s2, 9)))
    boundary = np.array([(s1, d, e) for s1, d in pairs for e in (0.0, 1.0)])
    sparse = np.array([(s1, d, e) for s1, d in pairs for e in sparse_etas])
    return Collocation(boundary, sparse)


def _loss_parts(y, t, sign, yb, ys, w):
    """Loss components and d(total)/dy for data rows, boundary rows, sparse rows."""
    n = len(y)
    r = y - t
    l_data = float(np.mean(r * r))
    d_data = 2.0 * r / n
    comps = {"l_data": l_data, "l_const": 0.0, "l_bound": 0.0, "l_spars": 0.0}
    d_b = np.zeros(len(yb))
    d_s = np.zeros(len(ys))
    if w.const:
        # hinge: H-L rows may not exceed 1, L-H rows may not fall below 1
        over = np.where(sign > 0, np.maximum(y - 1.0, 0.0), 0.0)
        under = np.where(sign < 0, np.maximum(1.0 - y, 0.0), 0.0)
        comps["l_const"] = w.const * float(np.mean(over * over + under * under))
        d_data = d_data + w.const * 2.0 * (over - under) / n
    if w.bound and len(yb):
        rb = yb - 1.0
        comps["l_bound"] = w.bound * float(np.mean(rb * rb))
        d_b = w.bound * 2.0 * rb / len(yb)
    if w.spars and len(ys):
        rs = ys - 1.0
        comps["l_spars"] = w.spars * float(np.mean(rs * rs))
        d_s = w.spars * 2.0 * rs / len(ys)
    comps["l_total"] = comps["l_data"] + comps["l_const"] + comps["l_bound"] + comps["l_spars"]
    return comps, d_data, d_b, d_s


def _stack(model, x, colloc, w):
    parts = [model.scaler.transform(x)]
    nb = ns = 0
    if colloc is not None and w.bound:
        parts.append(model.scaler.transform(colloc.boundary))
        nb = len(colloc.boundary)
    if colloc is not None and w.spars:
        parts.append(model.scaler.transform(colloc.sparse))
        ns = len(colloc.sparse)
    return np.vstack(parts), nb, ns


def loss_and_gradients(model, x, t, colloc=None, w=None, need_grad=True):
    """Total loss, its components and (optionally) exact parameter gradients.

    ``x`` holds raw features, ``t`` the targets. Collocation rows go through
    the same forward pass as data rows; no output clamp is applied.
    """
    w = w or LossWeights()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    if len(x) == 0:
        raise ValueError("empty batch")
    z, nb, ns = _stack(model, x, colloc, w)
    y_all, pre = _forward(model, z)
    n = len(x)
    y, yb, ys = y_all[:n], y_all[n:n + nb], y_all[n + nb:]
    comps, d_data, d_b, d_s = _loss_parts(y, t, np.sign(x[:, 1]), yb, ys, w)
    if not need_grad:
        return comps, None
    gw, gb = _backward(model, pre, np.concatenate([d_data, d_b, d_s]))
    return comps, (gw, gb)


def loss_total(model, x, t, colloc=None, w=None):
    comps, _ = loss_and_gradients(model, x, t, colloc, w, need_grad=False)
    return comps["l_total"], comps


def gradients(model, x, t, colloc=None, w=None):
    return loss_and_gradients(model, x, t, colloc, w)[1]


class Adam:
    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainingHistory:
    rows: list = field(default_factory=list)
    stop_reason: str = ""
    best_epoch: int = 0

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(HISTORY_HEADER + "\n")
            for r in self.rows:
                vals = [str(r["epoch"])] + [repr(float(r[k])) for k in
                                            ("l_data", "l_const", "l_bound", "l_spars", "l_total", "l_val")]
                fh.write(",".join(vals) + "\n")


def _interleave(gw, gb):
    out = []
    for a, b in zip(gw, gb):
        out += [a, b]
    return out


def train(x, t, net_cfg=None, train_cfg=None, w=None, x_val=None, t_val=None,
          colloc=None, model=None, callback=None):
    """Fit a surrogate; returns ``(model, history)``.

    Early stopping tracks the validation MSE when a validation set is given,
    otherwise the training total loss. The best parameters seen are restored.
    """
    net_cfg = net_cfg or NetworkConfig()
    cfg = train_cfg or TrainingConfig()
    w = w or LossWeights()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    if len(x) == 0:
        raise ValueError("training set is empty")
    if colloc is None and (w.bound or w.spars):
        colloc = make_collocation()
    model = model.copy() if model is not None else init_model(net_cfg, cfg.seed)
    params = model.params()
    opt = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    shuffle = rng(cfg.seed, "nn-batches")
    n = len(x)
    bs = n if cfg.batch_size in (0, None) or cfg.batch_size >= n else cfg.batch_size
    has_val = x_val is not None and len(x_val) > 0
    hist = TrainingHistory()
    best, best_params, wait = math.inf, [p.copy() for p in params], 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle.permutation(n) if bs < n else np.arange(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            comps, (gw, gb) = loss_and_gradients(model, x[idx], t[idx], colloc, w)
            if not math.isfinite(comps["l_total"]):
                raise NonFiniteLoss(f"non-finite loss at epoch {epoch}: {comps}")
            opt.step(params, _interleave(gw, gb))
        comps, _ = loss_and_gradients(model, x, t, colloc, w, need_grad=False)
        if not math.isfinite(comps["l_total"]):
            raise NonFiniteLoss(f"non-finite loss after epoch {epoch}: {comps}")
        l_val = float(np.mean((predict_raw(model, x_val) - t_val) ** 2)) if has_val else comps["l_total"]
        hist.rows.append(dict(comps, epoch=epoch, l_val=l_val))
        if callback is not None:
            callback(epoch, hist.rows[-1])
        monitor = l_val
        if monitor < best - cfg.min_delta:
            best, wait, hist.best_epoch = monitor, 0, epoch
            best_params = [p.copy() for p in params]
        else:
            wait += 1
        if comps["l_total"] < cfg.loss_tolerance:
            hist.stop_reason = "loss_tolerance"
            break
        if wait > cfg.patience:
            hist.stop_reason = "patience"
            break
    else:
        hist.stop_reason = "max_epochs"
    for p, b in zip(params, best_params):
        p[...] = b
    return model, hist


def r2_score(preds, targets):
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if targets.size < 2:
        raise ZeroVariance("need at least two targets")
    ss_tot = float(np.sum((targets - targets.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVariance("targets have zero variance")
    return 1.0 - float(np.sum((targets - preds) ** 2)) / ss_tot


def _floats(values):
    return " ".join(repr(float(v)) for v in values)


def save(model, path):
    cfg = model.config
    lines = [
        f"magic {MAGIC}",
        f"version {FORMAT_VERSION}",
        "layers " + " ".join(str(n) for n in cfg.layer_sizes),
        f"activation {cfg.activation} {cfg.zeta!r}",
        f"scaler {_floats(model.scaler.lo)} {_floats(model.scaler.hi)}",
    ]
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"weight {l} {w.shape[0]} {w.shape[1]}")
        lines += [_floats(row) for row in w]
        lines.append(f"bias {l} {b.shape[0]}")
        lines.append(_floats(b))
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load(path):
    with open(path) as fh:
        lines = fh.read().split("\n")
    it = iter(lines)

    def field_line(name):
        try:
            line = next(it)
        except StopIteration:
            raise CorruptFile(f"{path}: truncated before {name!r}") from None
        parts = line.split()
        if not parts or parts[0] != name:
            raise CorruptFile(f"{path}: expected {name!r}, got {line[:40]!r}")
        return parts[1:]

    try:
        magic = field_line("magic")
        if magic != [MAGIC]:
            raise CorruptFile(f"{path}: not a surrogate model file")
        version = int(field_line("version")[0])
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"{path}: format version {version}, expected {FORMAT_VERSION}")
        sizes = tuple(int(v) for v in field_line("layers"))
        act = field_line("activation")
        cfg = NetworkConfig(layer_sizes=sizes, activation=act[0], zeta=float(act[1]))
        sc = [float(v) for v in field_line("scaler")]
        scaler = Scaler(tuple(sc[:3]), tuple(sc[3:6]))
        weights, biases = [], []
        for l, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            hdr = field_line("weight")
            if [int(v) for v in hdr] != [l, n_out, n_in]:
                raise CorruptFile(f"{path}: bad weight header {hdr}")
            rows = []
            for _ in range(n_out):
                row = [float(v) for v in next(it).split()]
                if len(row) != n_in:
                    raise CorruptFile(f"{path}: weight row of layer {l} has {len(row)} values")
                rows.append(row)
            weights.append(np.array(rows).reshape(n_out, n_in))
            hdr = field_line("bias")
            if [int(v) for v in hdr] != [l, n_out]:
                raise CorruptFile(f"{path}: bad bias header {hdr}")
            b = np.array([float(v) for v in next(it).split()])
            if b.shape != (n_out,):
                raise CorruptFile(f"{path}: bias of layer {l} has wrong length")
            biases.append(b)
        field_line("end")
    except (ValueError, IndexError, StopIteration) as exc:
        raise CorruptFile(f"{path}: {exc}") from None
    return SurrogateModel(weights, biases, scaler, cfg)
