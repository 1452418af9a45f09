"""A small tanh network carried through heat flow by Euler and by Heun.

The network is first fitted to Z_01, then each scheme advances it with the
same step size. Both runs write the usual outputs (errors.csv, grids,
snapshot) under demo_out/; the pretrained weights are shared through a
snapshot so the two runs start from the same state.
"""
import csv
from pathlib import Path

from tengpp import parse_config, run_experiment

out = Path("demo_out")
common = {
    "initial_condition": "z01", "hidden_widths": "16,16", "n_samples": "1024",
    "n_boundary": "128", "dt": "0.01", "n_steps": "20", "grid_resolution": "32",
    "pretrain_tol": "2e-3", "snapshot_path": str(out / "pretrained.snapshot"),
}

final = {}
for scheme in ("heun", "euler"):
    cfg = parse_config(overrides=dict(common, scheme=scheme, output_dir=str(out / scheme)))
    m = run_experiment(cfg)
    if m.pretrain and "rounds" in m.pretrain:
        print(f"pretraining: rel L2 {m.pretrain['rel_l2']:.2e} after {m.pretrain['rounds']} rounds")
    with open(m.error_csv) as fh:
        rows = list(csv.DictReader(fh))
    print(scheme)
    for row in rows[::5]:
        print(f"  t = {float(row['time']):.2f}  rel L2 {float(row['rel_l2_error']):.2e}")
    final[scheme] = m.final_rel_l2

print(f"final error ratio euler / heun: {final['euler'] / final['heun']:.1f}")
