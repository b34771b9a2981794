"""Smoke test for the lz_bloch extension.

Build first:  pip install --no-build-isolation -e crates/python
Run:          python3 python/smoke_test.py
"""

import math
import os
import sys
import tempfile

import lz_bloch as lzb


def close(a, b, tol):
    return abs(a - b) <= tol


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    # Single crossing: final Z against the transfer ratio.
    delta, slope = 1.0, 1.0
    p = lzb.SystemParams(delta, 0.0)
    nu = lzb.lz_nu(delta, slope)
    tr = lzb.integrate(p, (0.0, 0.0, -1.0), (-60.0, 60.0), sweep_slope=slope, sample_dt=0.05)
    z_end = tr.final_state[2]
    expected = -lzb.transfer_ratio(nu)
    results.append(check("single crossing", close(z_end, expected, 0.05), f"z={z_end:.4f} expect {expected:.4f}"))

    s = lzb.s_matrix(0.3)
    (a, b), (c, d) = s["s"]
    unit = abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) + abs((a.conjugate() * b + c.conjugate() * d))
    results.append(check("s-matrix unitary", unit < 1e-12, f"{unit:.1e}"))
    results.append(check("s-matrix T", close(s["T"], math.cos(2 * s["theta"]), 1e-12)))

    # Conservative cosine drive keeps |v| = 1.
    fig2 = lzb.run_preset("fig2")
    norms = [math.sqrt(x * x + y * y + z * z) for x, y, z in zip(fig2.x, fig2.y, fig2.z)]
    drift = max(abs(n - 1.0) for n in norms)
    results.append(check("norm conserved", drift < 1e-6, f"{drift:.1e}"))
    results.append(check("drive zeros", len(fig2.events) == 20, str(len(fig2.events))))
    summ = fig2.summary()
    results.append(check("summary keys", {"z_final", "n_kinks", "mean_area"} <= set(summ)))

    # Sign-following relaxation gives loops with one entry per period.
    fig8 = lzb.run_preset("fig8")
    loops = fig8.hysteresis()
    results.append(check("loops per period", len(loops) == 10, str(len(loops))))
    results.append(check("cycle stats", len(fig8.cycle_stats()) == 10))

    # CP audit: a physical bath passes, a lone longitudinal rate does not.
    bath = lzb.thermal_bath(1.0, 0.5)
    results.append(check("thermal bath CP", bath.cp_audit()[0]))
    bad = lzb.SystemParams(0.1, 0.0, gamma1=1.0)
    results.append(check("CP violation flagged", not bad.cp_audit()[0]))

    gc_d, gc = lzb.gamma_c(lzb.SystemParams.preset("fig8"))
    results.append(check("gamma_c finite", math.isfinite(gc) and math.isfinite(gc_d)))

    om, vals = fig2.spectrum("z")
    results.append(check("spectrum", len(om) == len(vals) > 0))

    try:
        lzb.SystemParams(0.1, 0.0, b0=-1.0)
        results.append(check("invalid params rejected", False))
    except ValueError:
        results.append(check("invalid params rejected", True))

    try:
        lzb.integrate(p, (0.0, 0.0, -1.0), (-60.0, 60.0), sweep_slope=slope, max_steps=3)
        results.append(check("step limit raises", False))
    except ArithmeticError:
        results.append(check("step limit raises", True))

    with tempfile.TemporaryDirectory() as d:
        code = lzb.run_cli(["figure", "fig9", "--out", d])
        results.append(check("cli figure", code == 0 and os.path.exists(os.path.join(d, "fig9.svg"))))
        path = os.path.join(d, "traj.csv")
        fig8.write_csv(path)
        with open(path) as f:
            header = f.readline().strip()
        results.append(check("trajectory csv", header == "t,x,y,z,omega0", header))

    failed = results.count(False)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
