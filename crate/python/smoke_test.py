"""Smoke test for the Python bindings.

Build and run from the repository root:

    cargo build --release -p analytic-approx-py --features extension-module
    cp target/release/libanalytic_approx_py.so python/analytic_approx_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import analytic_approx_py as aa


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    g = aa.Gauge()
    lam = g.evaluate([1.0, 1.0])
    results.append(check("gauge golden value", abs(lam - 1.2720196) < 1e-6, f"{lam:.9f}"))
    results.append(check("gauge residual at lambda", abs(g.residual([1.0, 1.0], lam) - 1.0) < 1e-9))
    try:
        g.evaluate([0.0, 0.0])
        results.append(check("gauge rejects zero vector", False))
    except ValueError:
        results.append(check("gauge rejects zero vector", True))

    q = aa.SepPoly("quartic_sum", dim=3, radius=1.5)
    val, lower, upper = q.check_bounds([0.3, -0.2, 0.1])
    results.append(check("polynomial bounds", lower and upper, f"q = {val:.3e}, K1 = {q.k1:.3g}"))

    c = aa.Approximant("constant", value=5.0)
    k = c.eval([0.1, 0.2])
    results.append(check("constant exactness", abs(k - 5.0) <= 1e-8, f"K = {k!r}"))

    a = aa.Approximant("coordinate", epsilon=0.9, dim=1, radius=2.0, shape="box")
    pts = [[-0.9 + 0.1 * i] for i in range(19)]
    ks = a.eval_batch(pts)
    worst = max(abs(kv - p[0]) for kv, p in zip(ks, pts))
    results.append(check("coordinate target", worst < 0.9, f"sup error {worst:.3e}, net size {a.net_size}"))
    rep = json.loads(a.error_report(pts))
    results.append(check("error report", rep["sup_error"] < 0.9 and rep["min_denominator"] >= 0.8 - 1e-6))
    cst = json.loads(a.constants())
    results.append(check("constants", math.isclose(cst["chain_bound"], a.chain_bound)))

    cfg = "epsilon = 0.9\n[domain]\ndim = 1\nradius = 2.0\nshape = \"box\"\n[target]\nkind = \"coordinate\"\n[eval]\npoints = 50\nlipschitz_pairs = 10\n"
    with tempfile.TemporaryDirectory() as d:
        report = json.loads(aa.run_experiment(cfg, d))
        results.append(check("run_experiment", report["passed"] and os.path.exists(os.path.join(d, "points.csv"))))
    ledger = json.loads(aa.verify(cfg + "[verify]\ngauge_vectors = 200\noracle_vectors = 5\n", "gauge"))
    results.append(check("verify gauge", all(p["violations"] == 0 for p in ledger["properties"])))

    try:
        aa.run_experiment("epsilon = 0.002\n[net]\ncap = 1000\n")
        results.append(check("capacity error", False))
    except ValueError as e:
        results.append(check("capacity error", "cap is 1000" in str(e)))

    print(f"{sum(results)} of {len(results)} checks passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
