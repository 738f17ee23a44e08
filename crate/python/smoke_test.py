"""Smoke test for the hydrolfc Python extension.

Run after `maturin develop` (from crates/py), or point PYTHONPATH at a
directory holding the built library renamed to hydrolfc.so.
"""

import math

import hydrolfc


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    p = hydrolfc.turbine_power(5.0, 10.0, 0.91)
    assert close(p, 446.355), p

    assert hydrolfc.slc_quantize(100.0) == (57, 99.75)
    assert hydrolfc.slc_quantize(1000.0) == (255, 446.25)

    assert hydrolfc.decode_quad([0.5] * 4, 100.0) == (-100.0, -50.0, 50.0, 100.0)

    fs = hydrolfc.FuzzySystem([0.5] * 12)
    assert fs.infer(0.0, 0.0) == 0.0
    assert close(fs.infer(0.01, 20.0), -fs.infer(-0.01, -20.0))
    w = fs.rule_weights(0.01, 20.0)
    assert close(sum(map(sum, w)), 1.0, 1e-12)

    dt = 1e-3
    t = [k * dt for k in range(20001)]
    r = hydrolfc.compute_report(t, [math.exp(-x) for x in t])
    assert abs(r["iae"] - 1.0) < 1e-3 and abs(r["ise"] - 0.5) < 1e-3, r

    try:
        hydrolfc.decode_quad([0.0, 0.5, 0.5, 0.5], 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range gene accepted")

    toml = hydrolfc.default_scenario(50.0)
    pd = hydrolfc.run_scenario(toml, "pd")
    fuzzy = hydrolfc.run_scenario(toml, "fuzzy-pd")
    assert len(pd["trace"]["t"]) == 10001
    assert not pd["diverged"]
    assert fuzzy["report"]["iae"] < pd["report"]["iae"]

    j = hydrolfc.fitness(toml, [0.5] * 12)
    assert close(j, fuzzy["report"]["ise"], 1e-12), (j, fuzzy["report"]["ise"])

    table = hydrolfc.compare(toml, ["pd", "fuzzy-pd"])
    assert table.splitlines()[0] == "metric,pd,pd_rank,fuzzy-pd,fuzzy-pd_rank"

    print("hydrolfc", hydrolfc.__version__, "smoke test passed")
    print("  PD IAE %.3f, fuzzy PD IAE %.3f" % (pd["report"]["iae"], fuzzy["report"]["iae"]))


if __name__ == "__main__":
    main()
