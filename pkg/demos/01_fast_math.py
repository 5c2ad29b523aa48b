"""Fast math building blocks: round, power-of-two, and the bit-trick exp.

Walks through the three FPU-free primitives and shows how far the
approximate exponential strays from the real one, and what that costs the
tanh/sigmoid twins built on top of it.
"""

import numpy as np

from qmlp import fast_exp, fast_power_of_two, fast_round, sigmoid_f, sigmoid_ref, tanh_f, tanh_ref

print("fast_round: nearest integer, ties away from zero")
for x in (2.5, -1.5, 0.49, -0.5, 1e6 - 0.5):
    print(f"  fast_round({x:>10}) = {fast_round(x)}")

print("\nfast_power_of_two: left shifts only")
for k in (0, 5, 30, 62):
    print(f"  2^{k:<2} = {fast_power_of_two(k)}")

print("\nfast_exp: round(slope*x) + offset reinterpreted as float32 bits")
print(f"  fast_exp(0)  = {fast_exp(0.0)!r}  (bit-exact 1.0 by construction)")
for x in (1.0, -2.0, 5.0):
    approx, exact = float(fast_exp(x)), float(np.exp(x))
    print(f"  fast_exp({x:+.0f}) = {approx:12.5f}  exp = {exact:12.5f}  "
          f"rel err {abs(approx - exact) / exact * 100:5.2f}%")

xs = np.arange(-10.0, 10.0, 1e-3)
rel = np.abs(fast_exp(xs).astype(np.float64) - np.exp(xs)) / np.exp(xs)
print(f"  worst relative error on [-10, 10]: {rel.max() * 100:.2f}% "
      f"(budget: 7%), at x = {xs[rel.argmax()]:+.3f}")

print("\nactivations: fast twins vs reference")
for x in (0.0, 1.0, -2.5):
    print(f"  tanh  x={x:+.1f}: fast {float(tanh_f(x)):+.5f}  ref {float(tanh_ref(x)):+.5f}")
    print(f"  sigm  x={x:+.1f}: fast {float(sigmoid_f(x)):+.5f}  ref {float(sigmoid_ref(x)):+.5f}")

grid = np.linspace(-8, 8, 10_000)
print(f"  max |tanh_f - tanh_ref| on [-8, 8]: {np.abs(tanh_f(grid) - tanh_ref(grid)).max():.4f}")
print(f"  oddness |tanh_f(x) + tanh_f(-x)| worst: "
      f"{np.abs(tanh_f(grid) + tanh_f(-grid)).max():.2e} (symmetric by construction)")
