"""Smoke test for the pyisospec extension module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import json
import math
import os
import tempfile

import pyisospec


def close(a, b, tol):
    return abs(a - b) <= tol * abs(b)


def main():
    mu, ups, ups2 = pyisospec.ball(2, 1.0, 2)
    assert close(mu, 3.3899577166718887, 1e-14), mu
    assert close(ups, 11.491813320823285, 1e-14), ups
    assert close(ups2, ups * ups, 1e-15), ups2

    levels = pyisospec.ball_spectrum(2, 1.0, 3)
    assert [(j, l, mult) for _, j, l, mult in levels] == [(1, 1, 2), (2, 1, 2), (0, 1, 1)], levels

    assert close(pyisospec.bessel_j_value(1.0, 1.8411837813406593), 0.5818652242815963, 1e-14)
    assert close(pyisospec.bessel_i_value(0.5, 1.0), math.sqrt(2 / math.pi) * math.sinh(1.0), 1e-14)

    vals = pyisospec.fem_eigenvalues("polygon:0,0 1,0 1,1 0,1", 0.05, 2)
    assert close(vals[0], math.pi ** 2, 1e-4) and close(vals[1], math.pi ** 2, 1e-4), vals
    sq = pyisospec.fem_eigenvalues("polygon:0,0 1,0 1,1 0,1", 0.05, 1, "poly", 1)
    assert close(sq[0], vals[0] ** 2, 1e-9), sq

    x, y, res = pyisospec.center("polygon:0,0 2,0 0.4,1.1")
    assert res < 1e-10 and 0 < y < 1.1, (x, y, res)

    cert = json.loads(pyisospec.certify("ellipse:1.5,0.6667", 1))
    assert cert["valid"] and cert["bound"] > 11.49, cert

    report = json.loads(pyisospec.verify("ellipse:1.2247448713915890,0.8164965809277260", 1, mps_terms=20))
    assert report["inequality_holds"] and report["passed"], report["checks"]
    assert report["upsilon_mps"] is not None

    (omega, ev, sig), *_ = pyisospec.mps_eigenvalues("disk:0,0,1", 1.5, 2.5, 20)
    assert close(ev, mu, 1e-10) and sig < 1e-8, (omega, ev, sig)
    assert pyisospec.sigma("disk:0,0,1", 1.5, 20) > 1e-2

    try:
        pyisospec.ball(2, -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative radius accepted")

    with tempfile.TemporaryDirectory() as d:
        code = pyisospec.run_cli(["--out", d, "ball", "--count", "4"])
        assert code == 0
        table = json.load(open(os.path.join(d, "ball.json")))
        assert len(table["spectrum"]["entries"]) == 4
        assert pyisospec.run_cli(["ball", "--no-such-flag"]) == 2

    print("pyisospec smoke test: OK")


if __name__ == "__main__":
    main()
