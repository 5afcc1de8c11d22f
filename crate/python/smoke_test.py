"""Smoke test for the cold_plasma extension module.

Build first:  maturin develop --release -m crates/py/Cargo.toml
"""

import math

import cold_plasma as cp


def main():
    th = cp.thresholds()
    print(th)
    assert abs(th.lambda1 - 0.3058) < 1e-3 and abs(th.lambda2 - 0.5754) < 1e-3
    assert math.isclose(th.k_smooth, th.lambda1 / 2)

    assert cp.classify_pulse(0.10) == "smooth"
    assert cp.classify_pulse(0.20) == "indeterminate"
    assert cp.classify_pulse(0.40) == "blow-up"

    assert cp.criterion_1d(0.5, 0.1)[1]
    assert not cp.criterion_1d(-1.2, 0.0)[1]
    value, ok = cp.criterion_first_period(-0.1, 0.1)
    assert ok and value < 0

    assert abs(cp.period(0.0, 0.1, 2) - 6.27615632) < 1e-6

    outer = cp.Spiral("outer", 0.1)
    inner = cp.Spiral("inner", 0.1)
    print(outer, inner)
    assert outer.revolutions >= 1
    pts = outer.polyline(20)
    assert math.isclose(pts[0][1], 0.1) and all(a[0] <= b[0] for a, b in zip(pts, pts[1:]))

    t_lo, t_hi, n = cp.lifetime(0.1, 0.0)
    print(f"K = 0.1 at the axis: n = {n}, T in [{t_lo:.4f}, {t_hi:.4f}]")
    assert n >= 1 and t_lo <= t_hi

    run = cp.OracleRun(0.1, 0.0, t_max=25.0)
    print(run, "revolutions:", run.revolutions)
    assert run.t_star is None and run.revolutions >= n
    assert t_lo <= run.revolution_time(n) <= t_hi * 1.01
    assert run.min_density > 0

    hot = cp.OracleRun(0.45, 0.27, t_max=40.0)
    assert hot.t_star is not None and hot.t_star > 0

    try:
        cp.Spiral("sideways", 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("bad kind accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
