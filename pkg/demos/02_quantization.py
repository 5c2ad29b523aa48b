"""Power-of-two quantization: codes, exponents, shifts, and activation LUTs.

Everything is a signed 8-bit code q with a per-tensor exponent e, real
value q * 2^e. Rescaling is integer shifting; activations become 256-entry
tables.
"""

import numpy as np

from qmlp import (
    QuantParams,
    apply_lut,
    build_lut,
    choose_exponent,
    dequantize,
    quantize,
    requantize_shift,
)

values = np.array([-1.0, 0.37, 0.99])
params = choose_exponent(values)
print(f"values {values} -> exponent {params.exponent} (step {params.step})")
t = quantize(values, params)
print(f"codes {t.codes}  dequantized {dequantize(t)}")
print(f"round-trip error {np.abs(dequantize(t) - values).max():.6f} "
      f"(at most half a step = {params.step / 2})")

print("\nsaturation: the code range clips at [-128, 127]")
big = quantize([5.0, -5.0], QuantParams(-7))
print(f"  5.0 and -5.0 at e=-7 -> codes {big.codes} -> {dequantize(big)}")

print("\nrequantize_shift: int32 accumulator -> int8 code by rounding shift")
for acc, shift in ((128, -7), (129, -7), (-192, -7), (100000, -7), (3, 2)):
    print(f"  acc {acc:>7} shift {shift:>3} -> {requantize_shift(acc, shift):>4}")

print("\nactivation LUT: one table per layer, input code -> output code")
lut = build_lut("tanh", QuantParams(-4), QuantParams(-7))
print(f"  tanh, input e=-4 (range +-8), output e=-7 (range +-1)")
for code in (-64, -16, 0, 16, 64, 127):
    x = code * 2.0**-4
    print(f"  code {code:>4} (x={x:+6.2f}) -> {lut.table[code + 128]:>4} "
          f"(tanh(x)={np.tanh(x):+.4f}, *128={np.tanh(x) * 128:+.1f})")

t_in = quantize(np.array([-2.0, -0.5, 0.0, 0.5, 2.0]), QuantParams(-4))
t_out = apply_lut(t_in, lut)
print(f"\n  apply_lut({dequantize(t_in)}) -> codes {t_out.codes} "
      f"-> {dequantize(t_out)}")
