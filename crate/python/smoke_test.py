"""Quick end-to-end check of the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import math

import cantor_cusp_py as cc


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    assert cc.removed_intervals(2) == [(1, 1, 2), (2, 7, 8)]
    assert cc.locate(0.5)["tag"] == "InRemovedInterval"
    lo, hi = cc.dist_to_cantor(0.5)
    assert close(lo, 1 / 6) and close(hi, 1 / 6)

    q, admissible = cc.q_upper(0.7, 2.0)
    assert admissible and close(q, 1.281036851164445)
    assert close(cc.alpha_p(0.7, 2.0) * q, 1.0)
    assert close(cc.series_ratio(0.7, 2.0, 1.2), 0.830487293077012, 1e-10)
    derived = cc.derive(0.7, 2.0, 1.2)
    assert derived["admissible"] is True

    profile = cc.CuspProfile(0.7)
    lo, hi = profile.psi(0.4)
    assert close(lo, (0.4 - 1 / 3) ** 0.7, 1e-10)
    x = (0.4, 0.5 * lo)
    image = profile.reflect(*x)
    back = profile.reflect(*image)
    assert math.dist(back, x) < 1e-12
    assert profile.reflect_jet(*x)["jacobian_abs"] > 0

    report = cc.jacobian_integral("plus", 0.7, 2.0, 1.2, generations=50)
    assert report["verdict"]["kind"] == "finite"

    w = cc.Witness(0.7, 2.0, side="upper", generations=8)
    assert w.sobolev_norm()["value"]["verdict"]["verdict"] == "convergent"
    div = w.divergence(q)
    assert div["verdict"]["verdict"] == "divergent"

    grid = w.sample((0.0, 1.0, -0.3, 0.3), 1 / 128)
    extended = grid.extend()
    source = grid.sobolev_norm(2.0)
    target = extended.sobolev_norm(1.2)
    assert source["sobolev_norm"] > 0 and target["sobolev_norm"] > 0
    again = cc.GridFunction.from_json(grid.to_json())
    assert again.values() == grid.values()

    try:
        cc.CuspProfile(1.5)
    except cc.CantorCuspError as e:
        assert e.args[1] == "domain"
    else:
        raise AssertionError("alpha = 1.5 was accepted")

    verify = cc.verify_all(checks=[1, 6])
    assert verify["passed"], verify

    print("smoke test passed")


if __name__ == "__main__":
    main()
