"""Smoke test for the ncstoch Python module.

Build and install first:

    pip install --no-build-isolation ./crates/py
    python python/smoke_test.py
"""

import os
import tempfile

import numpy as np

import ncstoch


def close(a, b, tol=1e-10):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


def main():
    p = ncstoch.TracePoly("x1 x2 x2' x3 + 3i tr(x1 x2') x2 + x1' x3^2 + 5")
    expected = ncstoch.TracePoly("x1 y1 x2' x3 + x1 x2 y1' x3 + 3i tr(x1 y1') x2 + 3i tr(x1 x2') y1")
    assert p.derive(2) == expected, str(p.derive(2))
    print("derivative:", p.derive(2))

    q = ncstoch.TracePoly("tr(x1^2) x1")
    corr = q.derive_k(2).gamma("matrix", n=4)
    print("gamma contraction of d^2 tr(x^2)x at n=4:", corr)

    rng = np.random.default_rng(0)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a = (g + g.conj().T) / 4
    b = rng.normal(size=(4, 4))
    d = ncstoch.TracePoly("x1^3").derive(1).eval([a], [b])
    assert close(d, a @ a @ b + a @ b @ a + b @ a @ a)

    m = ncstoch.magic_sum(a)
    assert close(m, np.trace(a) / 4 * np.eye(4), 1e-12)

    fd = (np.asarray(ncstoch.op_function(a + 1e-5 * (b + b.T), exp_terms=[(1, 1.0)]))
          - np.asarray(ncstoch.op_function(a - 1e-5 * (b + b.T), exp_terms=[(1, 1.0)]))) / 2e-5
    d1 = ncstoch.operator_derivative(a, [b + b.T], exp_terms=[(1, 1.0)])
    assert close(d1, fd, 1e-6)

    dd = ncstoch.divided_difference([0.5, 0.5, 2.0], poly=[0, 0, 0, 1])
    assert abs(dd - 3.0) < 1e-12

    x = ncstoch.simulate_hbm(8, 1.0, 0.01, seed=7)
    assert len(x) == 101 and x.role == "martingale"
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "x.ncp1")
        x.write_ncp1(path)
        y = ncstoch.read_ncp1(path)
        assert y.times == x.times and y.values() == x.values()

    big = ncstoch.simulate_hbm(256, 1.0, 1.0, seed=1)
    print("KS distance to semicircle at n=256:", ncstoch.esd_distance(big.at(1.0), 1.0))

    study = ncstoch.ito_study("x1^2", [0.04, 0.02, 0.01], n=8, paths=8, seed=3)
    print("Ito residuals:", study["residuals"], "slope:", study["slope"])
    assert study["residuals"][0] > study["residuals"][-1]

    rep = ncstoch.isometry("y1", n=4, mesh=0.05, paths=200, seed=5)
    assert rep["gap"] <= 3 * rep["se"] + 1e-12, rep

    outcomes = ncstoch.run_selftest(only=[1, 2, 4, 13])
    assert all(o["pass"] for o in outcomes), outcomes
    print("selftest:", ", ".join(f"{o['id']} {'PASS' if o['pass'] else 'FAIL'}" for o in outcomes))
    print("smoke test passed")


if __name__ == "__main__":
    main()
