"""Smoke test for the coverage_poa extension module.

Build and install first:  pip install ./crates/python   (or maturin develop)
"""

import csv
import io
import math
import os
import tempfile

import coverage_poa as cp


def main():
    g = cp.Game.worst_case(3, 1.0)
    print(g)
    a = g.analyze()
    assert math.isclose(a.poa, 1 / 3, abs_tol=1e-9), a
    assert math.isclose(cp.theorem_bound(3, 1.0), 1 / 3, abs_tol=1e-9)
    d = g.distance()
    assert math.isclose(d.distance, 1.0, abs_tol=1e-9), d
    assert g.is_nash(a.nash_profiles[0])

    h = cp.Game([1.0, 0.5, 0.45], [[0, 1], [0, 2]], [True, False])
    assert math.isclose(h.distance().distance, 0.05, abs_tol=1e-9)
    assert h.welfare([0, 2]) == 1.45

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "game.json")
        g.save(path)
        assert cp.Game.load(path).to_json() == g.to_json()

    try:
        cp.Game.worst_case(0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("k = 0 accepted")

    try:
        cp.Game.worst_case(10, 1.0, dummies=3).analyze(budget=1000)
    except cp.TooLargeError:
        pass
    else:
        raise AssertionError("budget ignored")

    low = cp.Game.worst_case(10, 1.0, dummies=3).simulate(10 ** -2.3, steps=50_000)
    assert 0.07 <= low <= 0.13, low

    text = cp.temperature_sweep(k=4, temp_points=5, steps=5_000, seed=1)
    assert text == cp.temperature_sweep(k=4, temp_points=5, steps=5_000, seed=1)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert text.splitlines()[0] == cp.CSV_HEADER
    assert len(rows) == 5
    fixed = list(csv.DictReader(io.StringIO(
        cp.fixed_temperature_sweep(k=4, steps=5_000, distances=(0.0, 3.0, 1.0)))))
    assert [float(r["distance"]) for r in fixed] == [0.0, 1.0, 2.0, 3.0]
    print("smoke test passed")


if __name__ == "__main__":
    main()
