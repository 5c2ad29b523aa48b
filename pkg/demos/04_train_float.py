"""Full-precision training on the car-acceptability task.

Uses the canonical UCI file at data/car.csv when you have downloaded it;
otherwise a deterministic surrogate with the same schema. Per-sample SGD
with node-delta backpropagation, shuffling disabled, everything seeded.
"""

import tempfile
from pathlib import Path

from qmlp import (
    TrainConfig,
    build_model,
    evaluate,
    generate_car_surrogate,
    load_car_evaluation,
    save_model,
    split,
    train_full,
    write_curves_csv,
)

canonical = Path("data/car.csv")
if canonical.exists():
    print(f"using canonical file {canonical}")
    csv_path = canonical
else:
    csv_path = generate_car_surrogate(Path(tempfile.mkdtemp()) / "car_surrogate.csv")
    print(f"canonical file not found; using surrogate {csv_path}")

ds = load_car_evaluation(csv_path)
train_ds, val_ds = split(ds, 0.8, seed=7)
print(f"{ds.n} rows -> {train_ds.n} train / {val_ds.n} validation, "
      f"classes {ds.class_names}")

model = build_model("car_evaluation", seed=7)
records = train_full(model, (train_ds, val_ds), TrainConfig(epochs=40, seed=7))

print("\nepoch  train_acc  val_acc  train_loss")
for r in records[::5] + [records[-1]]:
    print(f"{r.epoch:>5}  {r.train_acc:9.4f}  {r.val_acc:7.4f}  {r.train_loss:10.6f}")

met = evaluate(model, val_ds)
print(f"\nvalidation metrics ({met.averaging}): precision {met.precision:.4f}  "
      f"recall {met.recall:.4f}  f1 {met.f1:.4f}  accuracy {met.accuracy:.4f}")

out_dir = Path(tempfile.mkdtemp())
save_model(model, out_dir / "car_float.bin")
write_curves_csv(records, out_dir / "car_float_curves.csv")
print(f"model and curves written under {out_dir}")
