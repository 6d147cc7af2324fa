"""Smoke test for the mra extension module.

Build and install first:
    pip install --no-build-isolation -e crates/py
then run:
    python python/smoke_test.py
"""

from fractions import Fraction
from pathlib import Path

import mra

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    square = mra.Cone(2, [[1, 0], [0, 1], [1, 1]])
    assert square.is_pointed()
    assert square.extreme_rays() == [[0, 1], [1, 0]]
    assert square.contains([Fraction(1, 2), 3])
    kind, normal = square.membership([1, -1])
    assert kind == "outside" and normal[1] > 0
    assert mra.canonicalize([Fraction(1, 2), "3/4"]) == [2, 3]

    b5 = mra.Record.load(str(DATA / "records" / "b5_n1.json"))
    assert b5.derive_anti_k() == [-2, -2, -2, -1, 3]
    assert b5.check_exhaustion()["verdict"] == "pass"
    dropped = b5.check_exhaustion(drop=["l8"])
    assert sorted({m["i"] for m in dropped["misses"]}) == [4, 5, 6, 7]
    assert b5.facet_patch(drop=["l8"])
    ext = b5.check_exhaustion(drop=["l8"], propose=[[1, 1, 1, -1, 2]])
    assert ext["added"] == ["l8"]

    n13 = mra.Record.load(str(DATA / "records" / "b4_n13.json"))
    assert len(n13.nef_cone().facets()) == 5

    bad = mra.Record.load(str(DATA / "mistakes" / "b5_n1.json"), strict=False)
    report = bad.audit()
    assert report["status"] == "fail"
    try:
        mra.Record.load(str(DATA / "mistakes" / "b5_n1.json"))
    except ValueError as e:
        assert "l25" in str(e)
    else:
        raise AssertionError("strict load accepted the mistake fixture")

    cfg = mra.FlopConfig.load(str(DATA / "flops" / "b2_n28_e5.flop.json"))
    coeffs = dict(cfg.coefficients())
    assert coeffs == {"a": Fraction(3, 2), "b": 3, "c": Fraction(1, 2), "d": 1}
    rows = cfg.rows()
    assert rows[0] == ("l12", [Fraction(1, 2), Fraction(1, 2)], Fraction(3, 2))

    n31 = mra.Record.load(str(DATA / "records" / "b3_n31.json"))
    dot = n31.chamber_dot()
    assert dot.count(" -- ") == 3 and dot == n31.chamber_dot()

    print("smoke test passed")


if __name__ == "__main__":
    main()
