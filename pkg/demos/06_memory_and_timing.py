"""Memory accounting for both architectures, plus host timing.

The headline quantity is parameter storage: float32 parameters against
int8 weight codes + int32 bias codes, with the per-layer 256-byte
activation LUTs reported both ways. Host timing is informational only; it
says nothing about latency on FPU-less hardware.
"""

import tempfile
from pathlib import Path

from qmlp import (
    bench_per_sample,
    build_model,
    generate_car_surrogate,
    load_car_evaluation,
    memory_report,
    quantize_model,
    split,
)

for arch in ("cogdist", "car_evaluation"):
    m = build_model(arch, 0)
    rep = memory_report(m, quantize_model(m))
    print(f"{arch}:")
    print(f"  float32 parameters:        {rep.full_bytes:>6} B")
    print(f"  int8 params + LUTs:        {rep.quantized_bytes:>6} B  ({rep.ratio:.2f}x smaller)")
    print(f"  int8 params only:          {rep.quantized_bytes_excl_lut:>6} B  "
          f"({rep.ratio_excl_lut:.2f}x smaller)")

canonical = Path("data/car.csv")
csv_path = canonical if canonical.exists() else generate_car_surrogate(
    Path(tempfile.mkdtemp()) / "car_surrogate.csv"
)
train_ds, _ = split(load_car_evaluation(csv_path), 0.8, seed=0)

print("\nhost timing, per-sample training step (forward + backward):")
m = build_model("car_evaluation", 0)
q = quantize_model(m)
res_f = bench_per_sample(m, train_ds, reps=3)
res_q = bench_per_sample(q, train_ds, reps=3)
print(f"  float32: {res_f.mean_s * 1e6:8.1f} us/sample (+- {res_f.std_s * 1e6:.1f})")
print(f"  int8:    {res_q.mean_s * 1e6:8.1f} us/sample (+- {res_q.std_s * 1e6:.1f})")
print(f"  ratio float/int8: {res_f.mean_s / res_q.mean_s:.2f} -- informational only; "
      "this interpreter-level timing does not transfer to FPU-less targets")
