"""Smoke test for the shiftclass extension module."""

import math

import shiftclass

GOLDEN = "graph; edge a a; edge a b; edge b a"
FULL2 = "graph; edge a a; edge a b; edge b a; edge b b"
TWO_TO_ONE = """graph
vertex x0; vertex x1; vertex y0; vertex y1; vertex z1; vertex z2
edge x0 x0; edge x0 x1; edge x1 x0; edge x1 x1
edge y0 y0; edge y0 y1; edge y1 y0; edge y1 y1
edge x0 z1; edge z1 y0; edge y0 z2; edge z2 x0
label x0 0; label x1 1; label y0 0; label y1 1; label z1 2; label z2 3
"""


def main():
    phi = math.log((1 + math.sqrt(5)) / 2)
    (source, p, h, mme, rec), = shiftclass.Presentation(GOLDEN).components()
    assert p == 1 and mme and rec == "positive-recurrent", (source, p, mme, rec)
    assert abs(h - phi) < 1e-9, h
    assert abs(shiftclass.entropies(FULL2)[0] - math.log(2)) < 1e-12

    assert not shiftclass.isomorphic(GOLDEN, FULL2)
    assert shiftclass.isomorphic(GOLDEN, GOLDEN)
    a = shiftclass.Presentation(GOLDEN).invariants()
    b = shiftclass.Presentation(FULL2).invariants()
    assert a.witness(b) == 1

    inv = shiftclass.Invariants.parse("gen 1 log 2 1\ngen 2 log 3 2\n")
    back = inv.realize().invariants()
    assert back == inv, (back, inv)
    assert inv.eta_bar(2) == 2 and inv.eta_bar(3) == 0
    assert abs(inv.u_bar(4) - math.log(3)) < 1e-9

    code = shiftclass.Code(TWO_TO_ONE)
    assert sorted(code.minimal_relation()) == [("x0", "y0"), ("x1", "y1")]
    ok, reason = code.bowen()
    assert ok and reason is None
    ok, reason = code.bowen([("x0", "y0")])
    assert not ok and reason.startswith("unrelated pair")
    assert not code.is_injective()

    three = shiftclass.Code(
        "graph; edge a a; edge a b; edge a c; edge b a; edge b b; edge b c; edge c a; edge c b; edge c c;"
        "label a 0; label b 0; label c 1"
    )
    report, graph = three.embed("1/2 log 2")
    assert "injective=true" in report, report
    assert shiftclass.Presentation(graph).components()[0][2] > 0.5 * math.log(2)

    passed, text = shiftclass.pathology_report(["0", "1"], 0.5, 3)
    assert passed, text

    try:
        shiftclass.Presentation("graph; edge a")
    except ValueError as e:
        assert "line 1" in str(e), e
    else:
        raise AssertionError("bad document accepted")

    print("shiftclass smoke test: ok")


if __name__ == "__main__":
    main()
