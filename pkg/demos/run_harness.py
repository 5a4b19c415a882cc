"""End-to-end experiment pipeline through the command-line interface.

Writes a small experiment spec, runs the sweep (both SE paths per cell),
then derives the SE CDF and one UE's term-power trace from the report.
All outputs land in demos/out/.
"""

import json
from pathlib import Path

from cfaging.harness import main

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

spec = {
    "scenario": {"M": 16, "N": 2, "K": 8, "tau_p": 4, "tau_c": 50,
                 "sample_period_s": 1e-5,
                 "ue_velocities_kmh": [54.0, 212.0] * 4, "seed": 1},
    "trials": 2000,
    "mc_batch": 1000,
    "tolerance": 0.1,  # loosened to match the reduced trial count
    "outputs": str(out),
    "sweep": {"adc_bits": [2, "inf"], "kappa": [0.1]},
}
spec_path = out / "experiment.json"
spec_path.write_text(json.dumps(spec, indent=2))

assert main(["run", str(spec_path)]) == 0
assert main(["cdf", str(out / "report.json"), "--out", str(out / "cdf.csv")]) == 0
assert main(["trace", str(out / "report.json"), "--ue", "1",
             "--out", str(out / "trace_ue1.csv")]) == 0

report = json.loads((out / "report.json").read_text())
meta = report["metadata"]
print(f"status {meta['status']}, max path deviation "
      f"{meta['max_rel_deviation']:.2%}, {meta['wall_time_s']:.1f} s")
for name in ("summary.csv", "cdf.csv", "trace_ue1.csv"):
    lines = (out / name).read_text().splitlines()
    print(f"\n{name} ({len(lines) - 1} rows):")
    print("\n".join(lines[:4]))
