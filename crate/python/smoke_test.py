"""Smoke test for the heapsync Python module.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import math

import heapsync

Q1 = 1 - math.sqrt(2) / 2


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def check_monoid():
    ring = heapsync.Monoid.ring(4)
    assert ring.letters == ["a0", "a1", "a2", "a3"]
    assert ring.moebius_polynomial() == [1.0, -4.0, 2.0]
    assert close(ring.smallest_root(), Q1)
    assert ring.growth(4) == [1, 4, 14, 48, 164]
    assert ring.is_irreducible()

    # a0 and a2 commute, so both words give one clique
    assert ring.normalize(["a2", "a0"]) == [["a0", "a2"]]
    x = ring.normalize(["a0", "a1"])
    y = ring.normalize(["a3"])
    xy = ring.concat(x, y)
    assert ring.left_divide(x, xy) == y
    assert ring.left_divide(y, x) is None
    assert sum(1 for t in ring.traces(3) if sum(map(len, t)) == 3) == 48

    assert ring.classify({a: Q1 for a in ring.letters}) == "Moebius"
    assert ring.classify({a: 0.2 for a in ring.letters}) == "SubMoebius"

    free = heapsync.Monoid(["x", "y"], [])
    assert free.commuting_pairs() == []
    assert close(free.smallest_root(), 0.5)


def check_network():
    net = heapsync.Network.ring(4)
    assert net.alphabets == [["a0", "a3"], ["a0", "a1"], ["a1", "a2"], ["a2", "a3"]]

    words = [["a0", "a3"], ["a0", "a1"], ["a1", "a2"], ["a2", "a3"]]
    trace, tag = net.synchronize(words)
    assert tag == "EOF", tag
    assert sum(map(len, trace)) == 4

    halves = [{a: 0.5 for a in alph} for alph in net.alphabets]
    assert net.classify() == "finite"
    assert net.classify(halves) == "finite"
    f = net.valuation(halves)
    assert all(close(w, 0.25) for w in f.values()), f

    trace, status = net.sample(halves, seed=1)
    assert status.startswith("terminated"), status
    assert net.sample(halves, seed=1) == (trace, status)

    mean, se = net.mean_length(halves, samples=20000, seed=2)
    assert abs(mean - 6.0) < 5 * se, (mean, se)

    path = heapsync.Network.path(5)
    assert path.classify() == "infinite"
    trace, status = path.sample([{a: 0.5 for a in alph} for alph in path.alphabets], budget=200)
    assert status == "budget-exhausted", status
    assert sum(map(len, trace)) >= 200


def check_solvers():
    p0 = heapsync.Monoid.path(5).smallest_root()
    net, dists = heapsync.solve_path([p0] * 5)
    assert len(dists) == 4
    assert close(dists[0]["a0"], p0)
    f = net.valuation(dists)
    assert all(close(w, p0, 1e-9) for w in f.values()), f

    ring = heapsync.Network.ring(4)
    reduced, dists = heapsync.solve_ring([Q1] * 4)
    assert reduced.alphabets == [["a1", "a2"], ["a2", "a3"]]
    walk = ring.walk("a0", reduced, dists, length=20000, seed=3)
    pieces = [a for clique in walk for a in clique]
    assert len(pieces) >= 20000
    for a in ring.monoid().letters:
        share = pieces.count(a) / len(pieces)
        assert abs(share - 0.25) < 0.02, (a, share)


def check_errors():
    try:
        heapsync.Monoid.ring(4).normalize(["zz"])
    except ValueError as e:
        assert "zz" in str(e)
    else:
        raise AssertionError("unknown letter accepted")
    try:
        heapsync.Network.ring(4).valuation([{"a0": 0.7, "a3": 0.7}] * 4)
    except ValueError:
        pass
    else:
        raise AssertionError("weights above one accepted")


def main():
    for check in (check_monoid, check_network, check_solvers, check_errors):
        check()
        print(f"ok {check.__name__}")
    print("smoke test passed")


if __name__ == "__main__":
    main()
