#!/usr/bin/env python3
"""Writes the bundle, morphism, path and tower fixtures under fixtures/.

Each passing fixture has a mutated twin that must fail. The sphere fixtures
come from christoffel_oracle.py instead.
"""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

J = "[[0, -1], [1, 0]]"
SO2 = {"name": "SO2", "n": 2, "generators": [[[0, -1], [1, 0]]]}
PLAN = {"grid": 20, "random": 50, "seed": 42}


def write(name, obj):
    (OUT / name).write_text(json.dumps(obj, indent=2) + "\n")


def flat():
    single = {
        "group": SO2,
        "charts": [{"id": "U", "box": [[-1, 1], [-1, 1]]}],
        "overlaps": [],
        "transitions": {},
        "forms": {"U": ["[[0, 0], [0, 0]]", "[[0, 0], [0, 0]]"]},
        "sample_plan": PLAN,
    }
    zero = "[[0, 0], [0, 0]]"
    two = {
        "group": SO2,
        "charts": [{"id": "U1", "box": [[0, 2], [0, 2]]}, {"id": "U2", "box": [[1, 3], [0, 2]]}],
        "overlaps": [
            {"from": "U1", "to": "U2", "domain": [[1, 2], [0, 2]], "map": ["x1", "x2"]},
            {"from": "U2", "to": "U1", "domain": [[1, 2], [0, 2]], "map": ["x1", "x2"]},
        ],
        "transitions": {"U1,U2": "eye(2)", "U2,U1": "eye(2)"},
        "forms": {"U1": [zero, zero], "U2": [zero, zero]},
        "sample_plan": PLAN,
    }
    mutated = json.loads(json.dumps(two))
    mutated["forms"]["U2"] = ["0.01 * " + J, zero]
    write("flat_single.json", single)
    write("flat.json", two)
    write("flat_mutated.json", mutated)
    write("flat_path.json", {"segments": [
        {"chart": "U1", "curve": ["0.5 + t", "1 + 0.5 * sin(t)"], "t_range": [0, 1]},
        {"chart": "U2", "curve": ["1.5 + t", "1 + 0.5 * sin(1 + t)"], "t_range": [0, 1]},
    ]})
    write("identity_morphism.json", {"phi": "g"})


def abelian():
    # one-dimensional base, two overlapping intervals, g12 = exp(x1 J)
    w1 = "(c + s * sin(x1)) * " + J
    bundle = {
        "group": SO2,
        "params": {"c": 0.5, "s": 0.3},
        "charts": [{"id": "U1", "box": [[0, 2]]}, {"id": "U2", "box": [[1, 3]]}],
        "overlaps": [
            {"from": "U1", "to": "U2", "domain": [[1, 2]], "map": ["x1"]},
            {"from": "U2", "to": "U1", "domain": [[1, 2]], "map": ["x1"]},
        ],
        "transitions": {"U1,U2": "mexp(x1 * %s)" % J, "U2,U1": "mexp(-x1 * %s)" % J},
        "forms": {"U1": [w1], "U2": ["(c + s * sin(x1) + 1) * " + J]},
        "sample_plan": PLAN,
    }
    mutated = json.loads(json.dumps(bundle))
    mutated["forms"]["U2"] = ["(c + s * sin(x1) + 1.01) * " + J]
    write("abelian.json", bundle)
    write("abelian_mutated.json", mutated)
    write("abelian_path.json", {"segments": [{"chart": "U1", "curve": ["t"], "t_range": [0.1, 1.9]}]})


def monopole():
    # charge-k monopole on the sphere, stereographic charts; same local
    # expression in both charts, transitions exp(-k theta J)
    form = ["k / (1 + x1^2 + x2^2) * (-x2) * " + J, "k / (1 + x1^2 + x2^2) * x1 * " + J]
    psi = ["x1 / (x1^2 + x2^2)", "-x2 / (x1^2 + x2^2)"]
    mask = "x1^2 + x2^2 - 0.25"

    def bundle(charge="k"):
        return {
            "group": SO2,
            "params": {"k": 1},
            "charts": [{"id": "U_N", "box": [[-2, 2], [-2, 2]]}, {"id": "U_S", "box": [[-2, 2], [-2, 2]]}],
            "overlaps": [
                {"from": "U_N", "to": "U_S", "map": psi, "mask": mask},
                {"from": "U_S", "to": "U_N", "map": psi, "mask": mask},
            ],
            "transitions": {
                "U_N,U_S": "mexp(-(%s) * atan2(x2, x1) * %s)" % (charge, J),
                "U_S,U_N": "mexp(-k * atan2(x2, x1) * %s)" % J,
            },
            "forms": {"U_N": form, "U_S": form},
            "sample_plan": PLAN,
        }

    write("monopole.json", bundle())
    write("monopole_mutated.json", bundle("k + 0.1"))
    doubled = bundle()
    doubled["transitions"] = {key: "mexp(-2 * k * atan2(x2, x1) * %s)" % J for key in doubled["transitions"]}
    doubled["forms"] = {c: ["2 * (%s)" % f for f in form] for c in ("U_N", "U_S")}
    write("monopole_doubled.json", doubled)
    write("square_morphism.json", {
        "phi": "g * g",
        "target_transitions": {key: "mexp(-2 * k * atan2(x2, x1) * %s)" % J for key in ("U_N,U_S", "U_S,U_N")},
    })
    write("square_morphism_bad.json", {
        "phi": "g * g",
        "target_transitions": {key: "mexp(-k * atan2(x2, x1) * %s)" % J for key in ("U_N,U_S", "U_S,U_N")},
    })
    write("inclusion_gl2.json", {"phi": "g"})
    # the equator r = 1, a third of it in the south chart
    write("monopole_equator.json", {"segments": [
        {"chart": "U_N", "curve": ["cos(t)", "sin(t)"], "t_range": [0, 2.0943951023931957]},
        {"chart": "U_S", "curve": ["cos(t)", "-sin(t)"], "t_range": [2.0943951023931957, 4.1887902047863914]},
        {"chart": "U_N", "curve": ["cos(t)", "sin(t)"], "t_range": [4.1887902047863914, 6.283185307179586]},
    ]})
    write("monopole_broken_path.json", {"segments": [
        {"chart": "U_N", "curve": ["cos(t)", "sin(t)"], "t_range": [0, 1]},
        {"chart": "U_N", "curve": ["cos(t)", "sin(t)"], "t_range": [1.5, 2]},
    ]})


def matrix_text(m):
    return "[" + ", ".join("[" + ", ".join(row) + "]" for row in m) + "]"


def tower():
    # level i: (i+1) x (i+1) upper unitriangular matrices, connectors are
    # leading-block truncations. Every level is the truncation of the top one.
    top = 5

    def nil(size):
        return [[("1" if c == r + 1 else "0") for c in range(size)] for r in range(size)]

    def w(size, which):
        m = [["0"] * size for _ in range(size)]
        for r in range(size):
            for c in range(r + 1, size):
                if which == 0:
                    m[r][c] = "%g * sin(%d * x1 + x2)" % (0.5 / (c - r), r + c)
                else:
                    m[r][c] = "%g * cos(x1 - %d * x2)" % (0.3 * (r + 1), c)
        return m

    def level(size):
        n, w1, w2 = (matrix_text(m) for m in (nil(size), w(size, 0), w(size, 1)))
        gens = []
        for r in range(size):
            for c in range(r + 1, size):
                gens.append([[1 if (i, j) == (r, c) else 0 for j in range(size)] for i in range(size)])
        return {
            "group": {"name": "UT%d" % size, "n": size, "generators": gens},
            "charts": [{"id": "U1", "box": [[0, 2], [0, 1]]}, {"id": "U2", "box": [[1, 3], [0, 1]]}],
            "overlaps": [
                {"from": "U1", "to": "U2", "domain": [[1, 2], [0, 1]], "map": ["x1", "x2"]},
                {"from": "U2", "to": "U1", "domain": [[1, 2], [0, 1]], "map": ["x1", "x2"]},
            ],
            "transitions": {"U1,U2": "mexp(x1 * %s)" % n, "U2,U1": "mexp(-x1 * %s)" % n},
            "forms": {
                "U1": [w1, w2],
                "U2": ["mexp(-x1 * {n}) * {w} * mexp(x1 * {n}) + {n}".format(n=n, w=w1),
                       "mexp(-x1 * {n}) * {w} * mexp(x1 * {n})".format(n=n, w=w2)],
            },
            "sample_plan": {"grid": 8, "random": 20, "seed": 7},
        }

    levels = [level(i + 1) for i in range(1, top)]
    connectors = {"%d,%d" % (j + 1, j): "block(g, 0, 0, %d, %d)" % (j + 1, j + 1) for j in range(1, len(levels))}
    write("tower.json", {"levels": levels, "connectors": connectors})
    perturbed = json.loads(json.dumps(levels))
    perturbed[0]["forms"]["U1"][0] = "(%s) + 0.01 * [[0, 1], [0, 0]]" % perturbed[0]["forms"]["U1"][0]
    write("tower_perturbed.json", {"levels": perturbed, "connectors": connectors})


def main():
    OUT.mkdir(exist_ok=True)
    flat()
    abelian()
    monopole()
    tower()


if __name__ == "__main__":
    main()
