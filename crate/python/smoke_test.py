"""Smoke test for the entropyflow Python module.

Build first: pip install -e crates/py --no-build-isolation
"""

import math

import entropyflow as ef


def main():
    r = ef.derive("renyi", 2)
    assert r.order == 2 and r.normalizer_power == 0
    assert "E[p̄1^4]" in r.expr.render()
    assert ef.MomentExpr.from_json(r.expr.to_json()) == r.expr
    assert ef.derive("tsallis", 3).normalizer_power == 1

    red = ef.reduce(-3, {1: 2, 2: 1})
    assert len(red) == 1, red

    outcomes = ef.verify_identities()
    assert all(o["holds"] for o in outcomes), [o["name"] for o in outcomes if not o["holds"]]

    g = ef.MixtureDensity.gaussian(0.0, 0.0)
    h = ef.entropy_eval(g, "renyi", 2.0, 1.0)
    assert abs(h - (0.5 * math.log(2 * math.pi) + 0.5 * math.log(2.0))) < 1e-12, h
    d1, err = ef.derivative_eval(g, "renyi", 1, 2.0, 1.0)
    assert abs(d1 - 0.5) < 1e-10 and err < 1e-8, (d1, err)

    two = ef.MixtureDensity.two_point()
    report = ef.scan(two, [5], [3.0], t_min=1.0, t_max=4.0, t_points=12)
    assert report["series"][0]["violations"], report

    lo, hi = ef.bounds(2.0, 1.0, 1.0)
    assert lo <= hi
    lhs, rhs = ef.tsallis2_check(two, 3)
    assert abs(lhs - rhs) <= 1e-6 * abs(rhs)

    cert = ef.certify("renyi", 3, printed="renyi3-hat")
    assert cert["certificate"]["verdict"] == "positive-definite", cert["certificate"]["verdict"]

    try:
        ef.reduce(-2, {1: 2, 2: 1})
    except ValueError:
        pass
    else:
        raise AssertionError("unbalanced offset accepted")
    print("python smoke test ok")


if __name__ == "__main__":
    main()
