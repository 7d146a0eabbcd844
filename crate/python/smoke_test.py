"""Smoke test for the Python bindings.

Build and install the extension first:

    pip install --no-build-isolation ./crates/py
    python python/smoke_test.py
"""

import cmath
import json
import math
from pathlib import Path

import adelic_market as am

FIXTURES = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def check_padic():
    assert am.padic_norm("10/12", 2) == "2"
    assert am.padic_norm("-10/12") == "5/6"
    assert am.valuation("7/9", 3) == -2
    x = am.expand("7/9", 3, 3)
    assert (x.valuation, x.digits) == (-2, [1, 2, 0])
    third = am.PAdicNumber("1/3", 2, 8)
    # 3 * 171 = 1 mod 2^8
    assert third.digits == [1, 1, 0, 1, 0, 1, 0, 1]
    s = third + am.PAdicNumber("2/3", 2, 8)
    assert s.to_rational() == "1", s
    assert am.product_formula("5/6")[-1] == ("product", "1")
    try:
        am.padic_norm("0.5", 2)
    except ValueError:
        pass
    else:
        raise AssertionError("decimal accepted")


def check_waves():
    spec = am.WaveSpec(3, 1.0, 2)
    ts, ys = spec.generate()
    assert len(ts) == 9 and ts[0] == 0.0 and ts[-1] == 1.0
    assert math.isclose(ys[1], 1 / 3)
    assert am.WaveSpec(3, 1.6, 2).breakpoint_count() == 8
    j, a, d = 17, 2, 1.3
    lhs = am.real_map(str(a + 3 * j), 3, d)
    rhs = (a**d + am.real_map(str(j), 3, d)) / 3
    assert abs(lhs - rhs) < 1e-12


def check_fit():
    truth = am.WaveSpec(3, 1.6, 3, t0=0.0, t1=26.0, y0=100.0, y_scale=10.0)
    ts, ys = truth.generate()
    result = am.fit(ts, ys)
    spec = result.spec
    assert (spec.p, spec.level, spec.dim) == (3, 3, 1.6), result
    assert result.rmse < 1e-10
    deeper = am.WaveSpec(3, 1.6, 4, t0=0.0, t1=80.0, y0=100.0, y_scale=10.0)
    _, continued = deeper.generate()
    fts, fys = result.forecast(5)
    assert fts == [27.0, 28.0, 29.0, 30.0, 31.0]
    assert all(abs(a - b) < 1e-12 for a, b in zip(fys, continued[27:32]))
    assert json.loads(result.to_json())["schema_version"] == 1

    times, closes = am.load_csv(str(FIXTURES / "gazprom_synthetic.csv"))
    assert len(times) == 256 and all(c > 0 for c in closes)


def check_adeles():
    assert abs(am.adele_char("5/12", [2, 3, 5]) - 1) < 1e-12
    assert am.frac_part("7/4", 2) == "3/4"
    assert abs(am.chi_p("1/2", 2) + 1) < 1e-12
    psi = [complex(i, -i) for i in range(16)]
    image = am.weyl_apply(2, 2, "1/4", "3/4", psi)
    norm = lambda v: math.sqrt(sum(abs(z) ** 2 for z in v))
    assert abs(norm(image) - norm(psi)) < 1e-12
    c = am.composition_phase(2, ("1/4", "1/2"), ("1/2", "3/4"))
    assert abs(abs(c) - 1) < 1e-12
    assert abs(c - cmath.exp(2j * math.pi * (3 / 16 - 1 / 4))) < 1e-12


def check_minority_game():
    game = am.MinorityGame(11, 3, seed=7)
    a = game.run(500)
    assert len(a) == 500 and len(game.attendance) == 500
    again = am.MinorityGame(11, 3, seed=7)
    assert again.run(500) == a
    assert game.volatility(100) > 0
    lhs, rhs = game.spin_identity(game.spins())
    assert abs(lhs - rhs) < 1e-12
    prices = game.prices(100.0)
    assert len(prices) == 500 and all(p > 0 for p in prices)


def main():
    for check in (check_padic, check_waves, check_fit, check_adeles, check_minority_game):
        check()
        print(f"ok {check.__name__}")
    print(f"adelic_market {am.__version__}: all smoke checks passed")


if __name__ == "__main__":
    main()
