"""Windowed neural classifier: embedding -> convolution -> max pooling ->
LSTM -> tanh dense -> softmax, trained from scratch with mini-batch SGD.

One model per task (gender, number).  Parameters are stored as float32
(the model file stores raw little-endian float32 tensors, so a save/load
round trip is bit-exact); all arithmetic runs in float64.

Shapes, for a batch of B windows of n tokens:

    embedding lookup   (B, n, d)
    convolution        (B, n, F)   same-length output, symmetric zero pad
    max pooling        (B, m, F)   pool 2 stride 2 along words, m = ceil(n/2)
    LSTM               (B, H)      final hidden state of the m-step sequence
    dense + tanh       (B, c)      logits compressed to [-1, 1]
    softmax            (B, c)      probabilities, c = 3 classes
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import tagset
from .corpus import LabeledExample, Vocabulary, dataset_arrays, extract_window
from .errors import ConfigError, DataError, NumericalError
from .tagset import CLASSES, GENDER, NUMBER, needs_classification

N_CLASSES = 3

# Serialization order of the parameter tensors in the model file.
PARAM_ORDER = (
    "embedding", "conv_w", "conv_b",
    "lstm_wx", "lstm_wh", "lstm_b",
    "dense_w", "dense_b",
)

MODEL_MAGIC = b"MGMODEL\x00"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Hyperparameters:
    window_length: int
    vocab_size: int
    embedding_dim: int = 128
    conv_filter_size: int = 7
    conv_filters: int = 0          # 0 means "same as embedding_dim"
    lstm_units: int = 70
    classes: int = N_CLASSES
    optimizer: str = "adam"        # "adam" or "sgd"
    learning_rate: float = 0.001   # 0.05 is a reasonable choice for sgd
    epochs: int = 20
    batch_size: int = 32
    rng_seed: int = 42

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"optimizer must be adam or sgd, got {self.optimizer!r}")
        if self.window_length < 1 or self.window_length % 2 == 0:
            raise ConfigError(f"window_length must be odd, got {self.window_length}")
        if self.conv_filter_size % 2 == 0 or self.conv_filter_size < 1:
            raise ConfigError(f"conv_filter_size must be odd, got {self.conv_filter_size}")
        if self.conv_filter_size > self.window_length:
            raise ConfigError(
                f"conv_filter_size {self.conv_filter_size} exceeds window {self.window_length}"
            )
        if self.classes != N_CLASSES:
            raise ConfigError(f"classes must be {N_CLASSES}, got {self.classes}")
        for name in ("vocab_size", "embedding_dim", "lstm_units", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")

    @property
    def filters(self) -> int:
        return self.conv_filters if self.conv_filters > 0 else self.embedding_dim

    @property
    def pooled_length(self) -> int:
        return (self.window_length + 1) // 2


@dataclass
class Model:
    task: str
    hyper: Hyperparameters
    vocab_hash: str
    params: Dict[str, np.ndarray] = field(default_factory=dict)

    def param_shapes(self) -> Dict[str, tuple]:
        h = self.hyper
        return {
            "embedding": (h.vocab_size, h.embedding_dim),
            "conv_w": (h.conv_filter_size, h.embedding_dim, h.filters),
            "conv_b": (h.filters,),
            "lstm_wx": (h.filters, 4 * h.lstm_units),
            "lstm_wh": (h.lstm_units, 4 * h.lstm_units),
            "lstm_b": (4 * h.lstm_units,),
            "dense_w": (h.lstm_units, h.classes),
            "dense_b": (h.classes,),
        }


def init_model(task: str, hyper: Hyperparameters, vocab_hash: str = "") -> Model:
    """Uniform(-0.08, 0.08) weights, zero biases, forget-gate bias +1."""
    if task not in tagset.TASKS:
        raise ConfigError(f"unknown task {task!r}")
    rng = np.random.default_rng(hyper.rng_seed)
    model = Model(task=task, hyper=hyper, vocab_hash=vocab_hash)
    h = hyper
    for name, shape in model.param_shapes().items():
        if name.endswith("_b"):
            tensor = np.zeros(shape, dtype=np.float64)
        else:
            tensor = rng.uniform(-0.08, 0.08, size=shape)
        model.params[name] = tensor.astype(np.float32)
    bias = model.params["lstm_b"].astype(np.float64)
    bias[h.lstm_units : 2 * h.lstm_units] = 1.0
    model.params["lstm_b"] = bias.astype(np.float32)
    return model


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _im2col(padded: np.ndarray, n: int, f: int) -> np.ndarray:
    """(B, n+f-1, d) -> (B, n, f*d) sliding windows along the word axis."""
    b, _, d = padded.shape
    cols = np.empty((b, n, f, d), dtype=padded.dtype)
    for j in range(f):
        cols[:, :, j, :] = padded[:, j : j + n, :]
    return cols.reshape(b, n, f * d)


def forward_batch(model: Model, windows: np.ndarray,
                  want_cache: bool = False) -> Tuple[np.ndarray, Optional[dict]]:
    """Probabilities (B, c) for a batch of index windows (B, n).

    With ``want_cache`` the intermediate activations needed by
    backward_batch are returned as well.
    """
    h = model.hyper
    n, f, F, H = h.window_length, h.conv_filter_size, h.filters, h.lstm_units
    if windows.ndim != 2 or windows.shape[1] != n:
        raise DataError(f"windows shape {windows.shape}, expected (B, {n})")
    p = (f - 1) // 2
    P = {k: v.astype(np.float64) for k, v in model.params.items()}

    emb = P["embedding"][windows]                        # (B, n, d)
    padded = np.zeros((windows.shape[0], n + 2 * p, h.embedding_dim))
    padded[:, p : p + n, :] = emb
    cols = _im2col(padded, n, f)                         # (B, n, f*d)
    conv = cols @ P["conv_w"].reshape(f * h.embedding_dim, F) + P["conv_b"]

    m = h.pooled_length
    pooled = np.empty((conv.shape[0], m, F))
    offsets = np.empty((conv.shape[0], m, F), dtype=np.int64)
    for t in range(m):
        lo, hi = 2 * t, min(2 * t + 2, n)
        seg = conv[:, lo:hi, :]
        idx = np.argmax(seg, axis=1)                     # (B, F), offset 0 or 1
        pooled[:, t, :] = np.take_along_axis(seg, idx[:, None, :], axis=1)[:, 0, :]
        offsets[:, t, :] = idx

    hs = np.zeros((conv.shape[0], H))
    cs = np.zeros((conv.shape[0], H))
    steps = []
    for t in range(m):
        x_t = pooled[:, t, :]
        z = x_t @ P["lstm_wx"] + hs @ P["lstm_wh"] + P["lstm_b"]
        i_g = _sigmoid(z[:, :H])
        f_g = _sigmoid(z[:, H : 2 * H])
        o_g = _sigmoid(z[:, 2 * H : 3 * H])
        g_g = np.tanh(z[:, 3 * H :])
        c_new = f_g * cs + i_g * g_g
        tanh_c = np.tanh(c_new)
        h_new = o_g * tanh_c
        if want_cache:
            steps.append((x_t, hs, cs, i_g, f_g, o_g, g_g, c_new, tanh_c))
        hs, cs = h_new, c_new

    u = hs @ P["dense_w"] + P["dense_b"]
    a = np.tanh(u)
    shifted = a - a.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    probs = np.exp(log_probs)

    cache = None
    if want_cache:
        cache = {
            "windows": windows, "emb": emb, "cols": cols, "conv": conv,
            "pooled": pooled, "offsets": offsets, "steps": steps,
            "h_last": hs, "a": a, "probs": probs, "log_probs": log_probs,
            "P": P,
        }
    return probs, cache


def forward(model: Model, window: Sequence[int]) -> np.ndarray:
    """Probability distribution for a single window, with finite checks."""
    windows = np.asarray(window, dtype=np.int64)[None, :]
    if np.any(windows < 0) or np.any(windows >= model.hyper.vocab_size):
        raise DataError("window index outside the embedding table")
    probs, cache = forward_batch(model, windows, want_cache=True)
    for layer, key in (("embedding", "emb"), ("convolution", "conv"),
                       ("max-pooling", "pooled"), ("lstm", "h_last"),
                       ("dense", "a"), ("softmax", "probs")):
        if not np.all(np.isfinite(cache[key])):
            raise NumericalError(f"non-finite activation in {layer} layer")
    return probs[0]


def backward_batch(model: Model, cache: dict, gold: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean cross-entropy loss and its gradients for a cached forward pass."""
    h = model.hyper
    n, f, F, H = h.window_length, h.conv_filter_size, h.filters, h.lstm_units
    d = h.embedding_dim
    p = (f - 1) // 2
    P = cache["P"]
    B = gold.shape[0]
    m = h.pooled_length

    log_probs = cache["log_probs"]
    loss = -float(log_probs[np.arange(B), gold].mean())

    da = cache["probs"].copy()
    da[np.arange(B), gold] -= 1.0
    da /= B
    du = da * (1.0 - cache["a"] ** 2)

    grads: Dict[str, np.ndarray] = {}
    grads["dense_w"] = cache["h_last"].T @ du
    grads["dense_b"] = du.sum(axis=0)
    dh = du @ P["dense_w"].T

    grads["lstm_wx"] = np.zeros_like(P["lstm_wx"])
    grads["lstm_wh"] = np.zeros_like(P["lstm_wh"])
    grads["lstm_b"] = np.zeros_like(P["lstm_b"])
    d_pooled = np.zeros_like(cache["pooled"])
    dc = np.zeros((B, H))
    for t in range(m - 1, -1, -1):
        x_t, h_prev, c_prev, i_g, f_g, o_g, g_g, c_new, tanh_c = cache["steps"][t]
        do = dh * tanh_c
        dc = dc + dh * o_g * (1.0 - tanh_c ** 2)
        di = dc * g_g
        dg = dc * i_g
        df = dc * c_prev
        dz = np.concatenate([
            di * i_g * (1.0 - i_g),
            df * f_g * (1.0 - f_g),
            do * o_g * (1.0 - o_g),
            dg * (1.0 - g_g ** 2),
        ], axis=1)
        grads["lstm_wx"] += x_t.T @ dz
        grads["lstm_wh"] += h_prev.T @ dz
        grads["lstm_b"] += dz.sum(axis=0)
        d_pooled[:, t, :] = dz @ P["lstm_wx"].T
        dh = dz @ P["lstm_wh"].T
        dc = dc * f_g

    d_conv = np.zeros_like(cache["conv"])
    offsets = cache["offsets"]
    rows = np.arange(B)[:, None]
    feats = np.arange(F)[None, :]
    for t in range(m):
        pos = 2 * t + offsets[:, t, :]                   # (B, F)
        np.add.at(d_conv, (rows, pos, feats), d_pooled[:, t, :])

    w2 = P["conv_w"].reshape(f * d, F)
    d_conv_flat = d_conv.reshape(-1, F)
    cols_flat = cache["cols"].reshape(-1, f * d)
    grads["conv_w"] = (cols_flat.T @ d_conv_flat).reshape(f, d, F)
    grads["conv_b"] = d_conv_flat.sum(axis=0)
    d_cols = (d_conv_flat @ w2.T).reshape(B, n, f, d)

    d_padded = np.zeros((B, n + 2 * p, d))
    for j in range(f):
        d_padded[:, j : j + n, :] += d_cols[:, :, j, :]
    d_emb = d_padded[:, p : p + n, :]

    grads["embedding"] = np.zeros((h.vocab_size, d))
    np.add.at(grads["embedding"], cache["windows"].reshape(-1), d_emb.reshape(-1, d))

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for {name}")
    return loss, grads


def backward(model: Model, window: Sequence[int], gold_class: str) -> Tuple[float, Dict[str, np.ndarray]]:
    """Single-example convenience wrapper around backward_batch."""
    windows = np.asarray(window, dtype=np.int64)[None, :]
    gold = np.array([CLASSES[model.task].index(gold_class)], dtype=np.int64)
    _, cache = forward_batch(model, windows, want_cache=True)
    return backward_batch(model, cache, gold)


@dataclass
class EpochStats:
    epoch: int
    loss: float
    train_accuracy: float
    heldout_accuracy: Optional[float]

    def log_line(self) -> str:
        held = "-" if self.heldout_accuracy is None else f"{self.heldout_accuracy:.6f}"
        return f"{self.epoch}\t{self.loss:.6f}\t{self.train_accuracy:.6f}\t{held}"


def evaluate_accuracy(model: Model, windows: np.ndarray, labels: np.ndarray,
                      chunk: int = 1024) -> float:
    correct = 0
    for lo in range(0, windows.shape[0], chunk):
        probs, _ = forward_batch(model, windows[lo : lo + chunk])
        correct += int((probs.argmax(axis=1) == labels[lo : lo + chunk]).sum())
    return correct / windows.shape[0]


class _Optimizer:
    """Plain SGD or Adam over the float32 parameter tensors (the update
    arithmetic itself runs in float64)."""

    def __init__(self, hyper: Hyperparameters, params: Dict[str, np.ndarray]):
        self.kind = hyper.optimizer
        self.lr = hyper.learning_rate
        self.step_count = 0
        if self.kind == "adam":
            self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8
            self.m1 = {k: np.zeros(v.shape) for k, v in params.items()}
            self.m2 = {k: np.zeros(v.shape) for k, v in params.items()}

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        self.step_count += 1
        for name, grad in grads.items():
            p64 = params[name].astype(np.float64)
            if self.kind == "sgd":
                p64 -= self.lr * grad
            else:
                self.m1[name] = self.beta1 * self.m1[name] + (1 - self.beta1) * grad
                self.m2[name] = self.beta2 * self.m2[name] + (1 - self.beta2) * grad * grad
                m_hat = self.m1[name] / (1 - self.beta1 ** self.step_count)
                v_hat = self.m2[name] / (1 - self.beta2 ** self.step_count)
                p64 -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            params[name] = p64.astype(np.float32)


def train(examples: List[LabeledExample], hyper: Hyperparameters, task: str,
          vocab_hash: str = "",
          heldout: Optional[List[LabeledExample]] = None,
          log_handle=None) -> Tuple[Model, List[EpochStats]]:
    """Mini-batch training over shuffled examples; deterministic per rng_seed.

    Aborts with NumericalError (epoch and batch named) if the loss stops
    being finite.  One log line per epoch:
    ``epoch TAB loss TAB train_acc TAB heldout_acc``.
    """
    if not examples:
        raise DataError("training dataset is empty")
    if hyper.epochs < 1:
        raise ConfigError("refusing to train for zero epochs")
    windows, labels = dataset_arrays(examples, task)
    held = dataset_arrays(heldout, task) if heldout else None

    model = init_model(task, hyper, vocab_hash)
    optimizer = _Optimizer(hyper, model.params)
    rng = np.random.default_rng(hyper.rng_seed + 1)
    history: List[EpochStats] = []

    n_examples = windows.shape[0]
    for epoch in range(1, hyper.epochs + 1):
        order = rng.permutation(n_examples)
        total_loss, correct = 0.0, 0
        for start in range(0, n_examples, hyper.batch_size):
            batch_idx = order[start : start + hyper.batch_size]
            bw = windows[batch_idx]
            bl = labels[batch_idx]
            probs, cache = forward_batch(model, bw, want_cache=True)
            try:
                loss, grads = backward_batch(model, cache, bl)
            except NumericalError as exc:
                raise NumericalError(
                    f"training diverged at epoch {epoch}, batch {start // hyper.batch_size}: {exc}"
                ) from None
            if not np.isfinite(loss):
                raise NumericalError(
                    f"training diverged at epoch {epoch}, batch {start // hyper.batch_size}"
                )
            correct += int((probs.argmax(axis=1) == bl).sum())
            total_loss += loss * len(batch_idx)
            optimizer.step(model.params, grads)
        held_acc = evaluate_accuracy(model, held[0], held[1]) if held else None
        stats = EpochStats(
            epoch=epoch,
            loss=total_loss / n_examples,
            train_accuracy=correct / n_examples,
            heldout_accuracy=held_acc,
        )
        history.append(stats)
        if log_handle is not None:
            log_handle.write(stats.log_line() + "\n")
            log_handle.flush()
    return model, history


@dataclass
class TokenPrediction:
    gender: Optional[np.ndarray] = None
    number: Optional[np.ndarray] = None

    def get(self, task: str) -> Optional[np.ndarray]:
        return self.gender if task == GENDER else self.number


def predict_sentence(model_gender: Optional[Model], model_number: Optional[Model],
                     sentence: list, vocab_gender: Optional[Vocabulary],
                     vocab_number: Optional[Vocabulary]) -> List[TokenPrediction]:
    """Per-token distributions for a simplified sentence.

    Tokens without the relevant slot get no distribution for that task.
    A model trained against a different vocabulary (content hash
    mismatch) is rejected.
    """
    preds = [TokenPrediction() for _ in sentence]
    for task, model, vocab in ((GENDER, model_gender, vocab_gender),
                               (NUMBER, model_number, vocab_number)):
        if model is None:
            continue
        if vocab is None:
            raise DataError(f"no vocabulary supplied for the {task} model")
        if model.vocab_hash and model.vocab_hash != vocab.content_hash():
            raise DataError(
                f"{task} model was trained with a different vocabulary "
                f"(hash {model.vocab_hash[:12]}... != {vocab.content_hash()[:12]}...)"
            )
        positions = [
            i for i, tok in enumerate(sentence)
            if needs_classification(tok.tag, task)
        ]
        if not positions:
            continue
        windows = np.stack([
            np.array(extract_window(sentence, i, model.hyper.window_length, vocab).indices,
                     dtype=np.int64)
            for i in positions
        ])
        probs, _ = forward_batch(model, windows)
        for row, i in enumerate(positions):
            if task == GENDER:
                preds[i].gender = probs[row]
            else:
                preds[i].number = probs[row]
    return preds


def save_model(path: str, model: Model) -> None:
    """Versioned binary container: magic, version, JSON header (task,
    hyperparameters, vocabulary hash), then the tensors of PARAM_ORDER as
    raw little-endian float32."""
    header = {
        "task": model.task,
        "hyper": asdict(model.hyper),
        "vocab_hash": model.vocab_hash,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MODEL_MAGIC)
        handle.write(struct.pack("<II", MODEL_VERSION, len(blob)))
        handle.write(blob)
        for name in PARAM_ORDER:
            tensor = np.ascontiguousarray(model.params[name], dtype="<f4")
            handle.write(tensor.tobytes())


def load_model(path: str) -> Model:
    with open(path, "rb") as handle:
        magic = handle.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise DataError(f"{path}: not a morphgen model file")
        version, header_len = struct.unpack("<II", handle.read(8))
        if version != MODEL_VERSION:
            raise DataError(f"{path}: unsupported model version {version}")
        header = json.loads(handle.read(header_len).decode("utf-8"))
        hyper = Hyperparameters(**header["hyper"])
        model = Model(task=header["task"], hyper=hyper, vocab_hash=header["vocab_hash"])
        for name in PARAM_ORDER:
            shape = model.param_shapes()[name]
            count = int(np.prod(shape))
            raw = handle.read(count * 4)
            if len(raw) != count * 4:
                raise DataError(f"{path}: truncated tensor {name}")
            model.params[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
        if handle.read(1):
            raise DataError(f"{path}: trailing bytes after parameters")
    return model
