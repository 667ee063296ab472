"""Smoke test for the pikan Python module.

Build and copy the extension next to this script first:

    cargo build --release -p pikan-py --features extension-module
    cp target/release/libpikan_py.so python/pikan_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pikan_py  # noqa: E402


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def check_registry():
    ids = pikan_py.problems()
    assert len(ids) == 15, ids
    assert "burgers" in ids and "lorenz" in ids


def check_bspline():
    knots = pikan_py.uniform_knots(5, 3, -1.0, 1.0)
    assert len(knots) == 5 + 2 * 3 + 1
    for i in range(101):
        x = -1.0 + 2.0 * i / 100
        basis = pikan_py.bspline_basis(x, knots, 3)
        assert close(sum(basis), 1.0, 1e-12), (x, sum(basis))
        assert all(b >= 0.0 for b in basis)


def check_jets():
    net = pikan_py.Network([2, 4, 3, 1], kind="wav_kan", seed=3, domain=[(0.0, 1.0), (0.0, 1.0)])
    x = [0.3, 0.7]
    (value, grad, hess), = net.jets(x)
    assert close(value, net.predict(x)[0], 1e-15)
    h = 1e-5
    for a in range(2):
        up = list(x)
        dn = list(x)
        up[a] += h
        dn[a] -= h
        fd = (net.predict(up)[0] - net.predict(dn)[0]) / (2 * h)
        assert close(grad[a], fd, 1e-6), (a, grad[a], fd)
        fd2 = (net.predict(up)[0] - 2 * value + net.predict(dn)[0]) / (h * h)
        assert close(hess[a][a], fd2, 1e-3), (a, hess[a][a], fd2)
    assert hess[0][1] == hess[1][0]


def check_checkpoint():
    net = pikan_py.Network.for_problem("linear_ode", seed=1)
    back = pikan_py.Network.from_json(net.to_json())
    assert back.params == net.params
    assert back.predict([0.25]) == net.predict([0.25])


def check_reference():
    ref = pikan_py.reference("linear_ode")
    assert ref["method"] == "closed_form"
    for (x,), y in zip(ref["points"], ref["values"][0]):
        assert close(y, x ** 3 + 1.0, 1e-14)


def check_training():
    net, run = pikan_py.train_problem("linear_ode", seed=0, epochs=400)
    history = run["history"]
    assert history[0][0] == 0 and history[-1][0] == 400
    assert run["completed"]
    assert history[-1][5] < history[0][5]
    loss = net.loss("linear_ode", seed=0)
    assert math.isfinite(loss["total"]) and loss["l_bc"] == 0.0
    assert net.relative_l2("linear_ode") == run["relative_l2"]


def check_errors():
    for bad in (lambda: pikan_py.reference("no_such_problem"),
                lambda: pikan_py.Network([3, 1])):
        try:
            bad()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")


def main():
    checks = [check_registry, check_bspline, check_jets, check_checkpoint,
              check_reference, check_training, check_errors]
    for check in checks:
        check()
        print(f"ok  {check.__name__}")
    print(f"{len(checks)} checks passed")


if __name__ == "__main__":
    main()
