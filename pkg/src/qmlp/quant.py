"""Symmetric power-of-two fixed-point quantization.

Real values are stored as signed 8-bit codes q with a per-tensor exponent e,
value ~= q * 2**e. There is no zero-point: scales are pure powers of two so
all rescaling reduces to integer shifts. Codes use the full [-128, 127]
range with saturation at both ends.

QTensor and ActivationLUT are immutable after construction and safe to share
across concurrent readers.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataError, InvariantError
from .fastmath import _round_half_away, activation_fn

EXPONENT_MIN = -24
EXPONENT_MAX = 8

# Exponent conventions used throughout: a zero/empty tensor quantizes at -7
# (step 1/128, range [-1, 1]), which is also the default scale for activation
# outputs; pre-activation sums default to -4 (range [-8, 8]).
DEFAULT_ZERO_EXPONENT = -7
DEFAULT_ACTIVATION_EXPONENT = -7
DEFAULT_PREACT_EXPONENT = -4

CODE_MIN = -128
CODE_MAX = 127


@dataclass(frozen=True)
class QuantParams:
    """Per-tensor quantization descriptor: value = code * 2**exponent."""

    exponent: int

    def __post_init__(self):
        if not EXPONENT_MIN <= self.exponent <= EXPONENT_MAX:
            raise ConfigurationError(
                f"quantization exponent {self.exponent} outside "
                f"[{EXPONENT_MIN}, {EXPONENT_MAX}]"
            )

    @property
    def step(self):
        """Smallest representable value difference, 2**exponent."""
        return 2.0 ** self.exponent


@dataclass(frozen=True)
class QTensor:
    """Signed 8-bit code buffer plus its quantization parameters."""

    codes: np.ndarray
    params: QuantParams

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.dtype != np.int8:
            if codes.size and (codes.min() < CODE_MIN or codes.max() > CODE_MAX):
                raise InvariantError("codes outside signed 8-bit range")
            codes = codes.astype(np.int8)
        codes = codes.copy()
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @property
    def shape(self):
        return self.codes.shape


@dataclass(frozen=True)
class ActivationLUT:
    """256-entry int8 -> int8 activation table, indexed by input code + 128."""

    table: np.ndarray
    in_params: QuantParams
    out_params: QuantParams
    activation: str = field(default="", compare=False)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int8).copy()
        if table.shape != (256,):
            raise InvariantError(f"LUT table must have 256 entries, got {table.shape}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)


def choose_exponent(values):
    """Pick the finest power-of-two exponent whose range covers the data.

    Returns the smallest e with max|v| <= 128 * 2**e (so the extreme negative
    value lands exactly on code -128; the positive end may saturate one step
    at 127). All-zero input defaults to e = -7.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise DataError("choose_exponent requires a non-empty buffer")
    if not np.all(np.isfinite(arr)):
        raise DataError("choose_exponent requires finite values")
    m = float(np.max(np.abs(arr)))
    if m == 0.0:
        return QuantParams(DEFAULT_ZERO_EXPONENT)
    mant, ex = math.frexp(m)  # m = mant * 2**ex, mant in [0.5, 1)
    ceil_log2 = ex - 1 if mant == 0.5 else ex
    e = min(max(ceil_log2 - 7, EXPONENT_MIN), EXPONENT_MAX)
    return QuantParams(e)


def quantize(values, params):
    """Quantize a real buffer: q = clamp(round_half_away(v / 2**e), -128, 127)."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError("quantize requires finite values")
    r = _round_half_away(arr / params.step)
    codes = np.clip(r, CODE_MIN, CODE_MAX).astype(np.int8)
    return QTensor(codes, params)


def dequantize(t):
    """Recover real values from a QTensor: v = q * 2**e (exact in float32)."""
    return t.codes.astype(np.float32) * np.float32(t.params.step)


def requantize_shift(acc, shift):
    """Rescale a 32-bit accumulator to an 8-bit code by a power-of-two shift.

    Equivalent to clamp(round_half_away(acc * 2**shift), -128, 127) in exact
    arithmetic. Negative shift is a rounding arithmetic right shift (add
    2**(-shift-1) to the magnitude before shifting); positive shift is a
    saturating left shift.
    """
    shift = int(shift)
    if not -31 <= shift <= 31:
        raise InvariantError(f"requantize shift {shift} outside [-31, 31]")
    arr = np.asarray(acc, dtype=np.int64)
    if shift >= 0:
        val = arr << shift
    else:
        s = -shift
        half = np.int64(1) << (s - 1)
        mag = (np.abs(arr) + half) >> s
        val = np.where(arr >= 0, mag, -mag)
    out = np.clip(val, CODE_MIN, CODE_MAX).astype(np.int8)
    if np.ndim(acc) == 0:
        return int(out)
    return out


def build_lut(activation, in_params, out_params, math_mode="reference"):
    """Precompute the quantized activation table for one layer.

    Each entry is quantize(act(dequantize(code)), out_params) over all 256
    input codes. The table is built from the reference activation by default;
    math_mode='fast' builds it from the fast_exp-based twin instead (for
    studying the approximation interaction — the table build is one-off, so
    the reference costs nothing at inference time).
    """
    if activation not in ("tanh", "sigmoid"):
        raise ConfigurationError(f"no LUT builder for activation {activation!r}")
    act = activation_fn(activation, math_mode)
    codes = np.arange(CODE_MIN, CODE_MAX + 1, dtype=np.float64)
    x = codes * in_params.step
    y = np.asarray(act(x), dtype=np.float64)
    table = np.clip(_round_half_away(y / out_params.step), CODE_MIN, CODE_MAX)
    return ActivationLUT(table.astype(np.int8), in_params, out_params, activation)


def apply_lut(t, lut):
    """Map a QTensor through an activation LUT entry by entry."""
    if t.params != lut.in_params:
        raise InvariantError(
            f"LUT input params mismatch: tensor e={t.params.exponent}, "
            f"LUT e={lut.in_params.exponent}"
        )
    idx = t.codes.astype(np.int16) + 128
    return QTensor(lut.table[idx], lut.out_params)
