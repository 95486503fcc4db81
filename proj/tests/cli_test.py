#!/usr/bin/env python3
# End-to-end checks of the advreg command line: exit codes, determinism, schemas.
import filecmp
import json
import os
import subprocess
import sys
import tempfile

import jsonschema
import numpy as np

BIN = os.path.abspath(sys.argv[1])
SCHEMAS = os.path.abspath(sys.argv[2])
failures = []

TINY = {
    "model": {"n_list": [20, 40], "p": 8, "sigma": 0.1, "group_size": 2,
              "beta_star": [1, -1, 0, 0, 0.5, 0, 0, 0]},
    "replications": 2,
    "delta_rule": {"kind": "scaled-corollary", "scale": 0.1},
    "seed": 7,
}


def run(*args):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)


def check(name, ok, extra=""):
    print(("ok   " if ok else "FAIL ") + name + (" " + extra if extra and not ok else ""))
    if not ok:
        failures.append(name)


def expect(name, proc, code):
    check(name, proc.returncode == code, f"exit {proc.returncode}, wanted {code}: {proc.stderr.strip()}")


def valid(path, schema):
    with open(os.path.join(SCHEMAS, schema + ".schema.json")) as f:
        s = json.load(f)
    with open(path) as f:
        doc = json.load(f)
    try:
        jsonschema.validate(doc, s)
        return True
    except jsonschema.ValidationError as e:
        print("    " + e.message)
        return False


def write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(repr(float(v)) for v in r) + "\n")


def same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.diff_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    if mismatch or errors:
        return False
    return all(same_tree(os.path.join(a, d), os.path.join(b, d)) for d in cmp.common_dirs)


with tempfile.TemporaryDirectory() as tmp:
    os.chdir(tmp)
    with open("tiny.json", "w") as f:
        json.dump(TINY, f)

    # generate twice, byte-identical
    expect("generate", run("generate", "--config", "tiny.json", "--out", "g1"), 0)
    expect("generate again", run("generate", "--config", "tiny.json", "--out", "g2"), 0)
    check("generate deterministic", same_tree("g1/data", "g2/data"))
    check("config schema", valid("g1/config.json", "config"))
    d = "g1/data/n20_r0/"
    check("truth schema", valid(d + "truth.json", "truth"))
    check("partition schema", valid(d + "partition.json", "partition"))
    other = run("generate", "--config", "tiny.json", "--seed", "8", "--out", "g3")
    check("seed changes data", not filecmp.cmp("g1/data/n20_r0/Y.csv", "g3/data/n20_r0/Y.csv", shallow=False))

    # fit
    p = run("fit", "--x", d + "X.csv", "--y", d + "Y.csv", "--variant", "group",
            "--partition", d + "partition.json", "--out", "fit.json")
    expect("fit", p, 0)
    check("fit schema", valid("fit.json", "fit"))
    p = run("fit", "--x", d + "X.csv", "--y", d + "Y.csv", "--variant", "classic",
            "--delta", "0.05", "--out", "fit_classic.json")
    expect("fit classic", p, 0)
    with open("fit_classic.json") as f:
        fc = json.load(f)
    check("fit converged", fc["converged"] and fc["certificate"] <= 1e-6)

    # non-convergence still writes the fit
    with open("starve.json", "w") as f:
        json.dump({"solver": {"max_iters": 1, "polish": False}}, f)
    if os.path.exists("starved.json"):
        os.remove("starved.json")
    p = run("fit", "--x", d + "X.csv", "--y", d + "Y.csv", "--variant", "classic",
            "--delta", "0.05", "--config", "starve.json", "--out", "starved.json")
    expect("non-convergence exit", p, 2)
    check("non-converged fit written", os.path.exists("starved.json") and valid("starved.json", "fit"))

    # error exits
    with open("bad.csv", "w") as f:
        f.write("x1,x2\n1.0,oops\n")
    expect("malformed csv", run("fit", "--x", "bad.csv", "--y", d + "Y.csv", "--out", "x.json"), 4)
    expect("missing file", run("fit", "--x", "nope.csv", "--y", d + "Y.csv", "--out", "x.json"), 4)
    expect("missing truth", run("check-bounds", "--x", d + "X.csv", "--y", d + "Y.csv", "--variant", "group",
                                "--partition", d + "partition.json", "--truth", "nope.json",
                                "--fit", "fit.json", "--out", "r.json"), 4)
    with open("badcfg.json", "w") as f:
        json.dump({"model": {"sigma": -1}}, f)
    expect("bad config", run("experiment", "--config", "badcfg.json", "--out", "e0"), 5)
    with open("badsolver.json", "w") as f:
        json.dump({"solver": {"tolerance": 1}}, f)
    expect("unknown solver key", run("fit", "--x", d + "X.csv", "--y", d + "Y.csv",
                                     "--config", "badsolver.json", "--out", "x.json"), 5)
    expect("bad variant", run("fit", "--x", d + "X.csv", "--y", d + "Y.csv", "--variant", "ridge"), 5)
    expect("negative delta", run("fit", "--x", d + "X.csv", "--y", d + "Y.csv", "--delta", "-1"), 5)

    # check-bounds on an orthonormal design, then on a tampered estimate
    rng = np.random.default_rng(11)
    n, pp = 40, 6
    q, _ = np.linalg.qr(rng.standard_normal((n, pp)))
    X = np.sqrt(n) * q
    beta = np.array([1.0, -2.0, 0, 0, 0, 0])
    eps = 0.1 * rng.standard_normal(n)
    Y = X @ beta + eps
    write_csv("oX.csv", [f"x{j + 1}" for j in range(pp)], X)
    write_csv("oY.csv", ["y"], Y[:, None])
    truth = {"schema_version": "1.0", "beta_star": beta.tolist(), "epsilon": eps.tolist(),
             "sigma": 0.1, "s": 2, "support": [1, 2]}
    with open("otruth.json", "w") as f:
        json.dump(truth, f)
    expect("orthonormal fit", run("fit", "--x", "oX.csv", "--y", "oY.csv", "--out", "ofit.json"), 0)
    p = run("check-bounds", "--x", "oX.csv", "--y", "oY.csv", "--truth", "otruth.json",
            "--fit", "ofit.json", "--out", "obr.json")
    expect("check-bounds clean", p, 0)
    check("bound report schema", valid("obr.json", "bound_report"))
    with open("obr.json") as f:
        rep = json.load(f)
    check("exact constant used", rep["constant"]["mode"] == "exact-orthonormal"
          and abs(rep["constant"]["value"] - 1) < 1e-9)
    with open("ofit.json") as f:
        fit = json.load(f)
    fit["beta_hat"] = (100 * beta).tolist()
    with open("tampered.json", "w") as f:
        json.dump(fit, f)
    p = run("check-bounds", "--x", "oX.csv", "--y", "oY.csv", "--truth", "otruth.json",
            "--fit", "tampered.json", "--out", "tbr.json")
    expect("check-bounds violation", p, 3)
    with open("tbr.json") as f:
        check("violation reported", json.load(f)["violated"] is True)

    # path
    p = run("path", "--x", d + "X.csv", "--y", d + "Y.csv", "--variant", "classic",
            "--lo", "0.1", "--hi", "2", "--count", "3", "--out", "path")
    expect("path", p, 0)
    check("path schema", valid("path/path.json", "path"))
    with open("path/path.csv") as f:
        lines = f.read().splitlines()
    check("path csv rows", lines[0] == "delta,coordinate,beta_hat" and len(lines) == 1 + 3 * 8)
    p = run("path", "--x", d + "X.csv", "--y", d + "Y.csv", "--deltas", "0.5,0.1", "--out", "path2")
    expect("path rejects descending grid", p, 5)

    # experiment
    expect("experiment", run("experiment", "--config", "tiny.json", "--out", "e1"), 0)
    expect("experiment again", run("experiment", "--config", "tiny.json", "--out", "e2"), 0)
    check("experiment deterministic", all(
        filecmp.cmp(f"e1/{f}", f"e2/{f}", shallow=False) for f in ("error_curves.csv", "runs.csv", "slopes.json")))
    check("slopes schema", valid("e1/slopes.json", "slopes"))
    with open("e1/error_curves.csv", newline="") as f:
        rows = f.read().split("\r\n")
    rows = [r for r in rows if r]
    check("error curve rows", len(rows) == 1 + 2 * 2)
    single = dict(TINY, model=dict(TINY["model"], n_list=[20]))
    with open("single.json", "w") as f:
        json.dump(single, f)
    expect("experiment single n", run("experiment", "--config", "single.json", "--out", "e3"), 0)
    with open("e3/slopes.json") as f:
        sl = json.load(f)
    check("single n slope is null", sl["classic"]["slope"] is None and sl["group"]["slope"] is None)
    check("single n slopes schema", valid("e3/slopes.json", "slopes"))

    # re-estimate
    p = run("re-estimate", "--x", "oX.csv", "--size", "2", "--out", "re.json")
    expect("re-estimate", p, 0)
    check("re schema", valid("re.json", "re_estimate"))
    with open("re.json") as f:
        check("orthonormal RE is 1", abs(json.load(f)["value"] - 1) < 1e-9)
    p = run("re-estimate", "--x", d + "X.csv", "--variant", "group", "--group-size", "2",
            "--size", "1", "--seed", "3", "--out", "gre.json")
    expect("gre-estimate", p, 0)
    check("gre schema", valid("gre.json", "re_estimate"))

print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
