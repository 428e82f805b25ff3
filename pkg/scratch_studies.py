"""Scratch: full-scale criterion 4/5/9 empirics (not part of the package)."""
import json
import time

import prognosis as pg

t0 = time.time()
out = {}

for n in (50, 200):
    cfg = pg.StudyConfig(
        benchmark="coupled5d", n_support=n, n_test=500, runs=50, q=5, seed=20250801,
        model=pg.ModelSpec("kriging"), bootstrap_reps=10_000, level=0.99,
    )
    res = pg.run_study(cfg)
    out[f"coupled5d_n{n}"] = {
        "coverage": res.coverage,
        "kfold_pos": res.positive_fraction("kfold"),
        "loo_pos": res.positive_fraction("loo"),
        "med_abs_kfold": res.median_abs_dss("kfold"),
        "med_abs_loo": res.median_abs_dss("loo"),
        "failures": len(res.failures),
        "elapsed": time.time() - t0,
    }
    print(n, out[f"coupled5d_n{n}"], flush=True)

cfg = pg.StudyConfig(
    benchmark="noisy20d", n_support=100, n_test=500, runs=50, q=5, seed=20250802,
    model=pg.ModelSpec("kriging"), bootstrap_reps=10_000, level=0.99,
)
res = pg.run_study(cfg)
cops = [r.cop for r in res.runs]
out["noisy20d_n100"] = {
    "coverage": res.coverage,
    "kfold_pos": res.positive_fraction("kfold"),
    "loo_pos": res.positive_fraction("loo"),
    "max_cop": max(cops),
    "failures": len(res.failures),
    "elapsed": time.time() - t0,
}
print(out["noisy20d_n100"], flush=True)

with open("scratch_studies.json", "w") as fh:
    json.dump(out, fh, indent=2)
print("total %.1f min" % ((time.time() - t0) / 60), flush=True)
