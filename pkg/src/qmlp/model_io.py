"""Binary model file format, lossless for both representations.

Layout (little-endian):

    magic "DCV1" | version u16 | representation u8 (0=full, 1=quantized)
    | layer count u16 | per layer: in_dim u16, out_dim u16, activation u8
    | then per-layer parameter blocks:
        full:      weights f32[out*in] (row-major), biases f32[out]
        quantized: weight exponent i8, in/preact/act exponents i8 each,
                   weight codes i8[out*in], bias codes i32[out], LUT i8[256]

Any structural problem (bad magic, unknown version, truncation, trailing
bytes, inconsistent exponents) raises FormatError with the byte offset; no
partial model is ever returned.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .nn import FULL, QUANTIZED, DenseLayer, Model, QDenseLayer
from .quant import EXPONENT_MAX, EXPONENT_MIN, ActivationLUT, QTensor, QuantParams

MAGIC = b"DCV1"
FORMAT_VERSION = 1

_REPR_TO_BYTE = {FULL: 0, QUANTIZED: 1}
_BYTE_TO_REPR = {0: FULL, 1: QUANTIZED}
_ACT_TO_BYTE = {"tanh": 0, "sigmoid": 1}
_BYTE_TO_ACT = {0: "tanh", 1: "sigmoid"}


def save_model(m, path):
    """Serialize a Model to ``path``; see module docstring for the layout."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HBH", FORMAT_VERSION, _REPR_TO_BYTE[m.representation], len(m.layers))
    for layer in m.layers:
        out += struct.pack("<HHB", layer.in_dim, layer.out_dim, _ACT_TO_BYTE[layer.activation])
    for layer in m.layers:
        if m.representation == FULL:
            out += layer.weights.astype("<f4").tobytes()
            out += layer.biases.astype("<f4").tobytes()
        else:
            out += struct.pack(
                "<bbbb",
                layer.weights_q.params.exponent,
                layer.in_params.exponent,
                layer.preact_params.exponent,
                layer.act_params.exponent,
            )
            out += layer.weights_q.codes.tobytes()
            out += layer.biases_q.astype("<i4").tobytes()
            out += layer.lut.table.tobytes()
    Path(path).write_bytes(bytes(out))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, n, what):
        if self.offset + n > len(self.data):
            raise FormatError(f"truncated model file while reading {what}", offset=self.offset)
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def array(self, dtype, count, what):
        itemsize = np.dtype(dtype).itemsize
        raw = self.take(itemsize * count, what)
        return np.frombuffer(raw, dtype=dtype, count=count).copy()


def _check_exponent(e, what, offset):
    if not EXPONENT_MIN <= e <= EXPONENT_MAX:
        raise FormatError(f"{what} exponent {e} out of range", offset=offset)


def load_model(path):
    """Parse a model file back into a Model.

    Loaded models are treated as pretrained: the on-disk format carries no
    provenance, and saved models normally come from a training pipeline.
    """
    data = Path(path).read_bytes()
    r = _Reader(data)

    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    (version,) = r.unpack("<H", "format version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}", offset=4)
    (repr_byte,) = r.unpack("<B", "representation")
    if repr_byte not in _BYTE_TO_REPR:
        raise FormatError(f"unknown representation byte {repr_byte}", offset=6)
    representation = _BYTE_TO_REPR[repr_byte]
    (layer_count,) = r.unpack("<H", "layer count")
    if layer_count == 0:
        raise FormatError("model file declares zero layers", offset=7)

    headers = []
    for i in range(layer_count):
        at = r.offset
        in_dim, out_dim, act_byte = r.unpack("<HHB", f"layer {i} header")
        if in_dim == 0 or out_dim == 0:
            raise FormatError(f"layer {i} has zero dimension", offset=at)
        if act_byte not in _BYTE_TO_ACT:
            raise FormatError(f"layer {i} unknown activation byte {act_byte}", offset=at + 4)
        headers.append((in_dim, out_dim, _BYTE_TO_ACT[act_byte]))
    for i, (prev, nxt) in enumerate(zip(headers, headers[1:])):
        if prev[1] != nxt[0]:
            raise FormatError(f"layer chain mismatch between layers {i} and {i + 1}", offset=9)

    layers = []
    prev_act_exp = None
    for i, (in_dim, out_dim, act) in enumerate(headers):
        if representation == FULL:
            w = r.array("<f4", out_dim * in_dim, f"layer {i} weights").reshape(out_dim, in_dim)
            b = r.array("<f4", out_dim, f"layer {i} biases")
            layers.append(DenseLayer(w, b, act))
        else:
            at = r.offset
            w_exp, in_exp, preact_exp, act_exp = r.unpack("<bbbb", f"layer {i} exponents")
            for name, e in (("weight", w_exp), ("input", in_exp),
                            ("pre-activation", preact_exp), ("activation", act_exp)):
                _check_exponent(e, f"layer {i} {name}", at)
            if prev_act_exp is not None and in_exp != prev_act_exp:
                raise FormatError(
                    f"layer {i} input exponent {in_exp} does not chain from "
                    f"previous activation exponent {prev_act_exp}",
                    offset=at,
                )
            prev_act_exp = act_exp
            codes = r.array(np.int8, out_dim * in_dim, f"layer {i} weight codes")
            biases = r.array("<i4", out_dim, f"layer {i} bias codes")
            table = r.array(np.int8, 256, f"layer {i} LUT")
            preact_params = QuantParams(preact_exp)
            act_params = QuantParams(act_exp)
            layers.append(
                QDenseLayer(
                    weights_q=QTensor(codes.reshape(out_dim, in_dim), QuantParams(w_exp)),
                    biases_q=biases,
                    in_params=QuantParams(in_exp),
                    preact_params=preact_params,
                    act_params=act_params,
                    lut=ActivationLUT(table, preact_params, act_params, act),
                    activation=act,
                )
            )

    if r.offset != len(data):
        raise FormatError("trailing bytes after model payload", offset=r.offset)
    return Model(layers, headers[0][0], representation, pretrained=True)
