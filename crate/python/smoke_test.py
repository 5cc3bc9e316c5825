#!/usr/bin/env python3
"""Smoke test for the landmarks_py extension module.

Builds nothing itself: run `cargo build --release -p landmarks-py` first.
The compiled cdylib is loaded straight from the cargo target directory.
"""

import math
import os
import shutil
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)


def load_module():
    candidates = [
        os.path.join(ROOT, "target", "release", "liblandmarks_py.so"),
        os.path.join(ROOT, "target", "debug", "liblandmarks_py.so"),
        os.path.join(ROOT, "target", "release", "landmarks_py.dll"),
        os.path.join(ROOT, "target", "release", "liblandmarks_py.dylib"),
    ]
    built = next((p for p in candidates if os.path.exists(p)), None)
    if built is None:
        sys.exit("build the extension first: cargo build --release -p landmarks-py")
    stage = tempfile.mkdtemp(prefix="landmarks-py-")
    suffix = ".so" if not built.endswith(".dll") else ".pyd"
    shutil.copy(built, os.path.join(stage, "landmarks_py" + suffix))
    sys.path.insert(0, stage)
    import landmarks_py

    return landmarks_py


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    lm = load_module()

    # kernel values of the unit gaussian
    k = lm.Kernel("gaussian", 1.0)
    g, dg, ddg = k.gamma_derivs(1.0)
    e_half = math.exp(-0.5)
    approx(g, e_half, 1e-15)
    approx(dg, -e_half, 1e-15)
    approx(ddg, 0.0, 1e-15)
    assert lm.Kernel.from_json('{"family":"matern","scale":1.0,"order":"3/2"}').dgamma(0.0) == 0.0

    # curvature of two landmarks on the line matches the closed form
    q = [[0.0], [1.0]]
    alpha = [[1.0], [0.0]]
    beta = [[0.0], [1.0]]
    report = lm.curvature_report(k, q, alpha, beta)
    approx(report["sectional"], lm.curvature_l2r1(k, 1.0), 1e-12)
    approx(report["sectional"], -0.1986, 1e-4)

    # degenerate section: null sectional
    assert lm.curvature_report(k, q, alpha, alpha)["sectional"] is None

    # the two curvature routes agree on a random-ish 3-landmark section
    q3 = [[0.0, 0.0], [1.3, 0.1], [-0.4, 0.8]]
    a3 = [[1.0, 0.2], [0.0, -0.6], [0.2, 0.4]]
    b3 = [[0.0, 1.0], [0.5, 0.0], [-0.3, 0.2]]
    assert lm.oracle_residual(k, q3, a3, b3) < 1e-10

    # one momentum: never positive
    om = lm.one_momentum_curvature(k, q3, [0.7, -0.3], [0.4, 0.9])
    assert om["r1"] == om["r2"] == om["r3"] == 0.0
    assert om["numerator"] <= 0.0

    # geodesic shooting conserves the Hamiltonian
    run = lm.integrate(k, [[1.0, 0.0], [-1.0, 0.0]], [[-10.0, 8.6], [10.0, -8.6]], 1.0, 1000)
    assert run["hamiltonian_drift"] < 1e-7
    approx(run["hamiltonian"][0], lm.hamiltonian(k, [[1.0, 0.0], [-1.0, 0.0]],
                                                 [[-10.0, 8.6], [10.0, -8.6]]), 1e-12)

    # published momenta: converging vs diverging pairs
    assert lm.classify(k, [[1.0, 0.0], [-1.0, 0.0]], [[-10.0, 8.6], [10.0, -8.6]]) == "capture_forward"
    assert lm.classify(k, [[1.0, 0.0], [-1.0, 0.0]], [[-10.0, 9.0], [10.0, -9.0]]) == "scattering"

    # reduced radial solution agrees with the recorded geodesic separation
    sol = lm.solve_two_point(k, [[1.0, 0.0], [-1.0, 0.0]], [[-10.0, 8.6], [10.0, -8.6]], 0.5)
    qs = lm.integrate(k, [[1.0, 0.0], [-1.0, 0.0]], [[-10.0, 8.6], [10.0, -8.6]], 0.5, 2000)["q"]
    rho_end = math.dist(qs[-1][0], qs[-1][1])
    approx(sol["rho"][-1], rho_end, 1e-5)

    # coefficient anchors at rho = 2
    k1, k2, k3, k4 = lm.k_coefficients(k, 2.0)
    approx(k1, 0.3035, 1e-4)
    approx(k2, -0.1012, 1e-4)
    approx(k3, 0.06335, 1e-4)
    approx(k4, 0.04824, 1e-4)

    # no circular orbit for the gaussian kernel
    assert lm.circular_orbit_radius(k, 1e-3, 10.0) is None

    # two-point decomposition: perpendicular difference covectors leave
    # only T4 in dimension three
    rho = 1.2
    q2 = [[rho, 0.0, 0.0], [0.0, 0.0, 0.0]]
    pa = [0.0, 0.8, 0.1]
    pb = [0.0, -0.2, 0.9]
    tp = lm.two_point_curvature(k, q2, [pa, [-v for v in pa]], [pb, [-v for v in pb]])
    t1, t2, t3, t4, t5 = tp["t"]
    assert max(abs(t1), abs(t2), abs(t3), abs(t5)) < 1e-14 and t4 > 0.0
    assert not tp["r4_is_upper_bound"]

    # a passive cloud drifts with the carrier
    cloud = lm.advect(k, [[0.0, 0.0]], [[1.0, 0.0]], [[0.0, 0.5]], 1.0, 100)
    assert cloud[-1][0][0] > 0.5

    print("landmarks_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
