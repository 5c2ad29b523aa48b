"""Classification metrics, memory-footprint accounting, and host timing.

Multi-class scores are macro-averaged (unweighted mean of per-class
precision/recall/F1); binary scores come from the positive class. Host
timing is informational only: it characterizes this machine, not any
target hardware.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvariantError
from .nn import FULL, QUANTIZED, clone_model, forward_full, forward_int8, predict_full, predict_int8
from .quant import QTensor, quantize
from .train import (
    DEFAULT_FINETUNE_LR,
    DEFAULT_FLOAT_LR,
    backward_hybrid,
    backward_lsgd,
    predict_labels,
)


@dataclass(frozen=True)
class Metrics:
    """Confusion matrix (rows = true, cols = predicted) and derived scores."""

    confusion: np.ndarray
    precision: float
    recall: float
    f1: float
    accuracy: float
    averaging: str


def confusion_matrix(y_true, y_pred, n_classes):
    """Count matrix [n_classes x n_classes], rows true, columns predicted."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def _safe_div(num, den):
    return num / den if den > 0 else 0.0


def metrics_from_confusion(cm):
    """Derive Metrics from a confusion matrix (binary for 2x2, else macro)."""
    cm = np.asarray(cm, dtype=np.int64)
    n = int(cm.sum())
    if n == 0:
        raise ConfigurationError("cannot compute metrics over zero samples")
    accuracy = float(np.trace(cm)) / n
    if cm.shape == (2, 2):
        tp, fp, fn = cm[1, 1], cm[0, 1], cm[1, 0]
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2.0 * precision * recall, precision + recall)
        return Metrics(cm, precision, recall, f1, accuracy, "binary")
    per_p, per_r, per_f = [], [], []
    for k in range(cm.shape[0]):
        p = _safe_div(cm[k, k], cm[:, k].sum())
        r = _safe_div(cm[k, k], cm[k, :].sum())
        per_p.append(p)
        per_r.append(r)
        per_f.append(_safe_div(2.0 * p * r, p + r))
    return Metrics(
        cm,
        float(np.mean(per_p)),
        float(np.mean(per_r)),
        float(np.mean(per_f)),
        accuracy,
        "macro",
    )


def evaluate(m, ds, math_mode="reference"):
    """Run the model over a dataset split and score the predictions."""
    if ds.n == 0:
        raise ConfigurationError("cannot evaluate an empty split")
    if ds.n_features != m.input_dim or ds.n_outputs != m.output_dim:
        raise ConfigurationError(
            f"model ({m.input_dim}->{m.output_dim}) does not match dataset "
            f"({ds.n_features}->{ds.n_outputs})"
        )
    if m.representation == FULL:
        outputs = predict_full(m, ds.features, math_mode)
    else:
        outputs = predict_int8(m, ds.features)
    return metrics_from_confusion(
        confusion_matrix(ds.labels(), predict_labels(outputs), ds.n_classes)
    )


@dataclass(frozen=True)
class MemoryReport:
    """Parameter-storage byte counts and reduction ratios.

    ``quantized_bytes`` counts 8-bit weight codes, 32-bit bias codes, and
    the 256-byte LUT per layer; the excluding-LUT figure is reported
    alongside since the headline reduction claim is about parameters.
    """

    full_bytes: int
    quantized_bytes: int
    quantized_bytes_excl_lut: int
    ratio: float
    ratio_excl_lut: float


def model_bytes(m, include_luts=True):
    """Parameter bytes for a model in its own representation."""
    total = 0
    for layer in m.layers:
        n_w = layer.in_dim * layer.out_dim
        if m.representation == FULL:
            total += 4 * (n_w + layer.out_dim)
        else:
            total += n_w + 4 * layer.out_dim
            if include_luts:
                total += 256
    return total


def memory_report(full_m, q_m):
    """Compare parameter storage between two same-architecture models."""
    shapes_a = [(l.in_dim, l.out_dim, l.activation) for l in full_m.layers]
    shapes_b = [(l.in_dim, l.out_dim, l.activation) for l in q_m.layers]
    if shapes_a != shapes_b:
        raise InvariantError("memory report requires models of the same architecture")
    full_bytes = model_bytes(full_m)
    q_bytes = model_bytes(q_m)
    q_excl = model_bytes(q_m, include_luts=False)
    return MemoryReport(
        full_bytes,
        q_bytes,
        q_excl,
        full_bytes / q_bytes,
        full_bytes / q_excl,
    )


@dataclass(frozen=True)
class BenchResult:
    """Host wall-time per training step (forward + backward), per sample."""

    mean_s: float
    std_s: float
    n_samples: int
    reps: int
    per_rep_s: tuple


def bench_per_sample(m, ds, reps=5, learning_rate=None):
    """Time per-sample training steps over the dataset, after one warmup pass.

    Each rep runs a fresh clone of the model through one full pass so every
    rep does identical work. Informational only; no pass/fail judgment.
    """
    if reps < 1:
        raise ConfigurationError("bench needs reps >= 1")
    if ds.n == 0:
        raise ConfigurationError("cannot bench an empty split")
    quantized = m.representation == QUANTIZED
    if learning_rate is None:
        learning_rate = DEFAULT_FINETUNE_LR if quantized else DEFAULT_FLOAT_LR

    def one_pass():
        clone = clone_model(m)
        if quantized:
            in_params = clone.layers[0].in_params
            codes = quantize(ds.features, in_params).codes
            start = time.perf_counter()
            for i in range(ds.n):
                qtrace = forward_int8(clone, QTensor(codes[i], in_params))
                backward_hybrid(qtrace, ds.targets[i], clone, learning_rate)
            return time.perf_counter() - start
        start = time.perf_counter()
        for i in range(ds.n):
            trace = forward_full(clone, ds.features[i])
            backward_lsgd(trace, ds.targets[i], clone, learning_rate)
        return time.perf_counter() - start

    one_pass()  # warmup
    per_sample = np.array([one_pass() / ds.n for _ in range(reps)])
    return BenchResult(
        float(per_sample.mean()),
        float(per_sample.std()),
        ds.n,
        reps,
        tuple(float(v) for v in per_sample),
    )
