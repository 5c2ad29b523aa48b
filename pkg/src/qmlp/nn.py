"""Model representation and forward passes, full-precision and quantized.

Weight matrices are [out_dim x in_dim], row-major, so each output neuron's
weights are contiguous and the int8 kernel's dot product is a single pass
over one row. Parameters are float32 in memory; the model file round-trips
them losslessly.

Models are immutable during inference: forward passes are reentrant and may
run concurrently on a shared model. Training and quantization mutate and
need exclusive access.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvariantError
from .fastmath import ACTIVATION_NAMES, activation_fn
from .quant import (
    DEFAULT_ACTIVATION_EXPONENT,
    DEFAULT_PREACT_EXPONENT,
    DEFAULT_ZERO_EXPONENT,
    ActivationLUT,
    QTensor,
    QuantParams,
    apply_lut,
    build_lut,
    choose_exponent,
    dequantize,
    quantize,
    requantize_shift,
)

FULL = "full"
QUANTIZED = "quantized"

# Reference architectures: input width, then (neurons, activation) per layer.
ARCHITECTURES = {
    "cogdist": (6, [(40, "tanh"), (32, "tanh"), (1, "sigmoid")]),
    "car_evaluation": (6, [(32, "tanh"), (16, "tanh"), (4, "sigmoid")]),
}

_INT32_MAX = np.int64(2**31 - 1)


@dataclass
class DenseLayer:
    """Fully-connected layer: weights [out x in], biases [out], activation id."""

    weights: np.ndarray
    biases: np.ndarray
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float32)
        self.biases = np.asarray(self.biases, dtype=np.float32)
        if self.weights.ndim != 2 or self.biases.ndim != 1:
            raise InvariantError("weights must be [out x in], biases [out]")
        if self.weights.shape[0] != self.biases.shape[0]:
            raise InvariantError("weight rows and bias length differ")
        if self.out_dim < 1 or self.in_dim < 1:
            raise InvariantError("layer dimensions must be >= 1")
        if self.activation not in ACTIVATION_NAMES:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise InvariantError("layer parameters must be finite")

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]


@dataclass
class QDenseLayer:
    """Quantized dense layer.

    Bias codes are 32-bit integers at exponent (in + weight), so they add
    directly into the int32 accumulator without any per-sample shift.
    """

    weights_q: QTensor
    biases_q: np.ndarray
    in_params: QuantParams
    preact_params: QuantParams
    act_params: QuantParams
    lut: ActivationLUT
    activation: str

    def __post_init__(self):
        self.biases_q = np.asarray(self.biases_q, dtype=np.int32)
        if self.weights_q.codes.ndim != 2 or self.biases_q.ndim != 1:
            raise InvariantError("weight codes must be [out x in], biases [out]")
        if self.weights_q.codes.shape[0] != self.biases_q.shape[0]:
            raise InvariantError("weight rows and bias length differ")
        if self.activation not in ACTIVATION_NAMES:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if self.lut.in_params != self.preact_params:
            raise InvariantError("LUT input params must match pre-activation params")
        if self.lut.out_params != self.act_params:
            raise InvariantError("LUT output params must match activation params")

    @property
    def in_dim(self):
        return self.weights_q.codes.shape[1]

    @property
    def out_dim(self):
        return self.weights_q.codes.shape[0]

    @property
    def bias_exponent(self):
        return self.in_params.exponent + self.weights_q.params.exponent

    @property
    def requantize_shift_amount(self):
        """Shift taking the accumulator scale down to the pre-activation scale."""
        return self.bias_exponent - self.preact_params.exponent


@dataclass
class Model:
    """Ordered dense layers in one representation ('full' or 'quantized').

    ``pretrained`` tracks whether the parameters come from a training run
    (set by the trainers and propagated by quantization); the quantized
    fine-tuner warns when it is False. The flag is in-memory provenance
    only — the model file format does not carry it.
    """

    layers: list
    input_dim: int
    representation: str
    pretrained: bool = False

    def __post_init__(self):
        if self.representation not in (FULL, QUANTIZED):
            raise ConfigurationError(f"unknown representation {self.representation!r}")
        want = DenseLayer if self.representation == FULL else QDenseLayer
        if not self.layers or not all(isinstance(l, want) for l in self.layers):
            raise InvariantError(
                f"{self.representation} model must hold {want.__name__} layers only"
            )
        if self.layers[0].in_dim != self.input_dim:
            raise InvariantError("first layer width does not match input_dim")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise InvariantError(
                    f"layer chain mismatch: {a.out_dim} -> {b.in_dim}"
                )

    @property
    def output_dim(self):
        return self.layers[-1].out_dim


def param_count(m):
    """Total number of weights and biases."""
    return sum(l.in_dim * l.out_dim + l.out_dim for l in m.layers)


def _resolve_arch(spec):
    if isinstance(spec, str):
        try:
            return ARCHITECTURES[spec]
        except KeyError:
            raise ConfigurationError(
                f"unknown architecture {spec!r}; expected one of "
                f"{sorted(ARCHITECTURES)} or an explicit (input_dim, layers) pair"
            ) from None
    input_dim, layer_specs = spec
    return int(input_dim), [(int(n), act) for n, act in layer_specs]


def build_model(spec, seed):
    """Build a full-precision model from an architecture id or explicit spec.

    ``spec`` is 'cogdist', 'car_evaluation', or (input_dim, [(out_dim,
    activation), ...]). Weights are Glorot-uniform in +-sqrt(6/(in+out)),
    biases zero; bit-identical for a given seed.
    """
    input_dim, layer_specs = _resolve_arch(spec)
    if input_dim <= 0 or any(n <= 0 for n, _ in layer_specs):
        raise ConfigurationError("layer dimensions must be positive")
    rng = np.random.default_rng(seed)
    layers = []
    fan_in = input_dim
    for out_dim, act in layer_specs:
        limit = np.sqrt(6.0 / (fan_in + out_dim))
        w = rng.uniform(-limit, limit, size=(out_dim, fan_in)).astype(np.float32)
        b = np.zeros(out_dim, dtype=np.float32)
        layers.append(DenseLayer(w, b, act))
        fan_in = out_dim
    return Model(layers, input_dim, FULL)


@dataclass
class FullTrace:
    """Forward-pass record for the full model: input, z and a per layer."""

    x: np.ndarray
    preacts: list
    acts: list
    math_mode: str

    @property
    def output(self):
        return self.acts[-1]


@dataclass
class QTrace:
    """Forward-pass record for the quantized model, all values as codes."""

    x_q: QTensor
    preacts: list
    acts: list

    @property
    def output(self):
        return self.acts[-1]


def forward_full(m, x, math_mode="reference"):
    """Dense forward pass: z = W a + b, a = act(z); returns the full trace."""
    if m.representation != FULL:
        raise InvariantError("forward_full requires a full-precision model")
    a = np.asarray(x, dtype=np.float32)
    if a.shape != (m.input_dim,):
        raise InvariantError(
            f"input shape {a.shape} does not match input_dim {m.input_dim}"
        )
    preacts, acts = [], []
    for layer in m.layers:
        z = layer.weights @ a + layer.biases
        a = activation_fn(layer.activation, math_mode)(z)
        preacts.append(z)
        acts.append(a)
    return FullTrace(np.asarray(x, dtype=np.float32), preacts, acts, math_mode)


def predict_full(m, X, math_mode="reference"):
    """Batched forward pass returning final outputs only, [n x output_dim]."""
    A = np.asarray(X, dtype=np.float32)
    if A.ndim != 2 or A.shape[1] != m.input_dim:
        raise InvariantError(f"batch shape {A.shape} does not match input_dim")
    for layer in m.layers:
        Z = A @ layer.weights.T + layer.biases
        A = activation_fn(layer.activation, math_mode)(Z)
    return A


def linear_int8(x_q, layer):
    """Int8 fully-connected kernel producing pre-activation codes.

    Per output neuron: start the int32 accumulator from the pre-shifted bias
    code, accumulate the int8 dot product, then requantize (rounding shift +
    clamp) down to the pre-activation scale. The out_dim == 1 case runs the
    same path as multi-output layers.
    """
    if x_q.params != layer.in_params:
        raise InvariantError(
            f"kernel input params mismatch: got e={x_q.params.exponent}, "
            f"layer expects e={layer.in_params.exponent}"
        )
    if x_q.codes.shape != (layer.in_dim,):
        raise InvariantError("kernel input length does not match layer in_dim")
    acc = (
        layer.weights_q.codes.astype(np.int64) @ x_q.codes.astype(np.int64)
        + layer.biases_q
    )
    # <= 2^7 * 2^7 * in_dim plus the bias code; never near int32 by construction
    assert np.all(np.abs(acc) <= _INT32_MAX), "int8 kernel accumulator overflow"
    codes = requantize_shift(acc, layer.requantize_shift_amount)
    return QTensor(codes, layer.preact_params)


def forward_int8(m, x_q):
    """Quantized forward pass: alternate the int8 kernel and LUT activations."""
    if m.representation != QUANTIZED:
        raise InvariantError("forward_int8 requires a quantized model")
    cur = x_q
    preacts, acts = [], []
    for layer in m.layers:
        z_q = linear_int8(cur, layer)
        a_q = apply_lut(z_q, layer.lut)
        preacts.append(z_q)
        acts.append(a_q)
        cur = a_q
    return QTrace(x_q, preacts, acts)


def predict_int8(m, X):
    """Batched quantized forward pass; returns dequantized outputs [n x c].

    Quantizes the float inputs at the model's input scale, then runs the
    same integer arithmetic as forward_int8 on whole batches.
    """
    if m.representation != QUANTIZED:
        raise InvariantError("predict_int8 requires a quantized model")
    X = np.asarray(X, dtype=np.float32)
    if X.ndim != 2 or X.shape[1] != m.input_dim:
        raise InvariantError(f"batch shape {X.shape} does not match input_dim")
    codes = quantize(X, m.layers[0].in_params).codes
    for layer in m.layers:
        acc = codes.astype(np.int64) @ layer.weights_q.codes.T.astype(np.int64)
        acc += layer.biases_q
        assert np.all(np.abs(acc) <= _INT32_MAX), "int8 kernel accumulator overflow"
        z_codes = requantize_shift(acc, layer.requantize_shift_amount)
        codes = layer.lut.table[z_codes.astype(np.int16) + 128]
    return codes.astype(np.float32) * np.float32(m.layers[-1].act_params.step)


def _exponent_for_max(max_abs):
    """Smallest exponent whose code range covers max_abs (see choose_exponent)."""
    if max_abs <= 0:
        return DEFAULT_ZERO_EXPONENT
    return choose_exponent(np.array([max_abs])).exponent


def quantize_model(m, calibration=None, math_mode="reference"):
    """Post-training quantization of a full-precision model.

    Weight exponents come from each layer's max|w|. Activation-side
    exponents default to -4 for pre-activation sums and -7 for activation
    outputs and model inputs; when a calibration input set [n x d] is given,
    input and pre-activation exponents are calibrated from a max-abs
    forward pass instead. LUTs are built per layer. ``math_mode`` selects
    the activation math used both for calibration and LUT construction.
    """
    if m.representation != FULL:
        raise InvariantError("quantize_model requires a full-precision model")

    input_exp = DEFAULT_ZERO_EXPONENT
    preact_exps = [DEFAULT_PREACT_EXPONENT] * len(m.layers)
    if calibration is not None:
        X = np.asarray(calibration, dtype=np.float32)
        if X.ndim != 2 or X.shape[1] != m.input_dim:
            raise InvariantError("calibration set shape does not match input_dim")
        input_exp = _exponent_for_max(float(np.max(np.abs(X))) if X.size else 0.0)
        A = X
        for i, layer in enumerate(m.layers):
            Z = A @ layer.weights.T + layer.biases
            preact_exps[i] = _exponent_for_max(float(np.max(np.abs(Z))))
            A = activation_fn(layer.activation, math_mode)(Z)

    qlayers = []
    in_params = QuantParams(input_exp)
    for layer, preact_exp in zip(m.layers, preact_exps):
        w_params = choose_exponent(layer.weights)
        w_q = quantize(layer.weights, w_params)
        bias_step = 2.0 ** (in_params.exponent + w_params.exponent)
        b_q = np.round(layer.biases.astype(np.float64) / bias_step)
        assert np.all(np.abs(b_q) <= _INT32_MAX), "bias codes exceed int32"
        preact_params = QuantParams(preact_exp)
        act_params = QuantParams(DEFAULT_ACTIVATION_EXPONENT)
        lut = build_lut(layer.activation, preact_params, act_params, math_mode)
        qlayers.append(
            QDenseLayer(
                weights_q=w_q,
                biases_q=b_q.astype(np.int32),
                in_params=in_params,
                preact_params=preact_params,
                act_params=act_params,
                lut=lut,
                activation=layer.activation,
            )
        )
        in_params = act_params
    return Model(qlayers, m.input_dim, QUANTIZED, pretrained=m.pretrained)


def clone_model(m):
    """Independent copy safe to train without touching the original."""
    if m.representation == FULL:
        layers = [
            DenseLayer(l.weights.copy(), l.biases.copy(), l.activation)
            for l in m.layers
        ]
    else:
        # QTensor/LUT components are immutable and training replaces rather
        # than mutates them, so sharing the initial buffers is safe.
        layers = [
            QDenseLayer(
                weights_q=l.weights_q,
                biases_q=l.biases_q.copy(),
                in_params=l.in_params,
                preact_params=l.preact_params,
                act_params=l.act_params,
                lut=l.lut,
                activation=l.activation,
            )
            for l in m.layers
        ]
    return Model(layers, m.input_dim, m.representation, pretrained=m.pretrained)


def dequantize_model(m):
    """Expand a quantized model to a full-precision one (debug/analysis aid)."""
    if m.representation != QUANTIZED:
        raise InvariantError("dequantize_model requires a quantized model")
    layers = []
    for ql in m.layers:
        w = dequantize(ql.weights_q)
        b = ql.biases_q.astype(np.float32) * np.float32(2.0 ** ql.bias_exponent)
        layers.append(DenseLayer(w, b, ql.activation))
    return Model(layers, m.input_dim, FULL, pretrained=m.pretrained)
