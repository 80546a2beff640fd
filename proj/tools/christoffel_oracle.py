#!/usr/bin/env python3
"""Levi-Civita Christoffel symbols of the round unit 2-sphere in its two
stereographic charts, by differentiating the metric with sympy.

Writes
  fixtures/sphere_christoffel.json            Christoffel description
  fixtures/sphere_christoffel_perturbed.json  one coefficient shifted by 0.1
  fixtures/sphere_frame.json                  the frame-bundle forms as a bundle
  fixtures/sphere_frame_mutated.json          same, one form entry shifted by 0.1
  fixtures/sphere_christoffel_samples.json    numeric values at sample points

Index convention: gamma[i][j][k] is the j-component of nabla_{d_i} d_k, so
coefficient i of the frame-bundle form has entry (j, k) = gamma[i][j][k].
"""

import json
import pathlib

import sympy as sp

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

x1, x2 = sp.symbols("x1 x2", real=True)
X = [x1, x2]


def fmt(e):
    """Prints a sympy expression in the lcf expression grammar."""
    e = sp.sympify(e)
    if e.is_Symbol:
        return e.name
    if e.is_Integer:
        return str(int(e)) if e >= 0 else "(%d)" % int(e)
    if e.is_Rational:
        return "(%d/%d)" % (e.p, e.q)
    if e.is_Float:
        return repr(float(e))
    if e.is_Add:
        return "(" + " + ".join(fmt(a) for a in e.args) + ")"
    if e.is_Mul:
        num, den = sp.fraction(e)
        if den != 1:
            return "(%s)/(%s)" % (fmt(num), fmt(den))
        return "*".join(fmt(a) for a in e.args)
    if e.is_Pow:
        b, p = e.args
        if p.is_Integer and p > 0:
            return "(%s)^%d" % (fmt(b), int(p))
        if p.is_Integer and p < 0:
            return "1/((%s)^%d)" % (fmt(b), int(-p))
        if p == sp.Rational(1, 2):
            return "sqrt(%s)" % fmt(b)
    raise ValueError("cannot print %r" % e)


def christoffel(metric):
    ginv = metric.inv()
    n = metric.shape[0]
    gam = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = 0
                for l in range(n):
                    s += ginv[j, l] * (sp.diff(metric[l, k], X[i]) + sp.diff(metric[l, i], X[k])
                                       - sp.diff(metric[i, k], X[l]))
                gam[i][j][k] = sp.simplify(s / 2)
    return gam


def main():
    r2 = x1**2 + x2**2
    metric = 4 / (1 + r2) ** 2 * sp.eye(2)
    gam = christoffel(metric)  # same expression in both charts

    # chart change N -> S (and S -> N, the same formula) and the frame transition
    psi = sp.Matrix([x1 / r2, -x2 / r2])
    jac = psi.jacobian(X)
    g = sp.simplify(jac.inv())  # d(x)/d(y): frame of S expressed in the frame of N

    # the charts are isometric images of each other under psi
    y = psi
    pulled = sp.simplify(jac.T * metric.subs({x1: y[0], x2: y[1]}, simultaneous=True) * jac - metric)
    assert pulled == sp.zeros(2, 2), pulled

    charts = [{"id": "U_N", "box": [[-2, 2], [-2, 2]]}, {"id": "U_S", "box": [[-2, 2], [-2, 2]]}]
    mask = "x1^2 + x2^2 - 0.25"
    overlaps = [
        {"from": "U_N", "to": "U_S", "map": [fmt(psi[0]), fmt(psi[1])], "mask": mask},
        {"from": "U_S", "to": "U_N", "map": [fmt(psi[0]), fmt(psi[1])], "mask": mask},
    ]
    g_text = "[[%s, %s], [%s, %s]]" % tuple(fmt(g[r, c]) for r in range(2) for c in range(2))
    transitions = {"U_N,U_S": g_text, "U_S,U_N": g_text}
    gam_text = [[[fmt(gam[i][j][k]) for k in range(2)] for j in range(2)] for i in range(2)]
    plan = {"grid": 20, "random": 50, "seed": 42}

    chris = {
        "fiber_dim": 2,
        "charts": charts,
        "overlaps": overlaps,
        "christoffel": {"U_N": gam_text, "U_S": gam_text},
        "transitions": transitions,
        "sample_plan": plan,
    }
    perturbed = json.loads(json.dumps(chris))
    perturbed["christoffel"]["U_N"][0][0][0] = "(%s) + 0.1" % gam_text[0][0][0]

    def form_text(i, shift=None):
        rows = []
        for j in range(2):
            entries = []
            for k in range(2):
                t = gam_text[i][j][k]
                if shift == (j, k):
                    t = "(%s) + 0.1" % t
                entries.append(t)
            rows.append("[" + ", ".join(entries) + "]")
        return "[" + ", ".join(rows) + "]"

    forms = [form_text(i) for i in range(2)]
    frame = {
        "group": {"name": "GL", "n": 2},
        "charts": charts,
        "overlaps": overlaps,
        "transitions": transitions,
        "forms": {"U_N": forms, "U_S": forms},
        "sample_plan": plan,
    }
    frame_mut = json.loads(json.dumps(frame))
    frame_mut["forms"]["U_N"] = [form_text(0, shift=(0, 0)), forms[1]]

    points = [(0.3, -0.4), (1.1, 0.7), (-1.5, 0.2), (0.0, 1.9), (-0.8, -1.2)]
    samples = []
    for p in points:
        subs = {x1: p[0], x2: p[1]}
        samples.append({
            "x": list(p),
            "gamma": [[[float(gam[i][j][k].evalf(30, subs=subs)) for k in range(2)] for j in range(2)]
                      for i in range(2)],
            "transition": [[float(g[r, c].evalf(30, subs=subs)) for c in range(2)] for r in range(2)],
        })

    OUT.mkdir(exist_ok=True)
    for name, obj in [("sphere_christoffel.json", chris), ("sphere_christoffel_perturbed.json", perturbed),
                      ("sphere_frame.json", frame), ("sphere_frame_mutated.json", frame_mut),
                      ("sphere_christoffel_samples.json", {"points": samples})]:
        (OUT / name).write_text(json.dumps(obj, indent=2) + "\n")


if __name__ == "__main__":
    main()
