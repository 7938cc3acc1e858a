"""Exercises the Python bindings against the shipped fixtures."""

import os
import sys

import numpy as np

import modtrace

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    return cond


def main():
    good = True
    ws = modtrace.Workspace.load(os.path.join(FIXTURES, "small.json"))
    good &= check(ws.summary()["valid"], "small.json validates")
    good &= check(ws.frame_check("can")[0], "stored canonical frame is a frame")

    verdict = ws.trace("pos", "can")
    good &= check(verdict["defined"], "trace of a positive operator is defined")

    report = ws.factorize("pos")
    good &= check(report["reconstruction_error"] < 1e-10, "factorization rebuilds the operator")
    good &= check(abs(report["representation_upper"] - report["trace_norm"]) < 1e-7, "factorization attains the trace norm")

    h = ws.haagerup("u")
    good &= check(h["norm"] <= h["representation_upper"] + 1e-10, "haagerup norm below its representation bound")

    iso = ws.verify_isometry(2, seed=7, restarts=4)
    good &= check(iso["verdict"] == "PASS", "level-2 sandwich closes")

    stair = modtrace.Workspace.load(os.path.join(FIXTURES, "staircase.json"))
    v = stair.trace("t", "standard")
    good &= check(not v["defined"] and abs(v["failure"]["gap"] - 0.5) < 1e-12, "staircase gap is one half")

    try:
        modtrace.Workspace.load(os.path.join(FIXTURES, "bad_projection.json"))
        good &= check(False, "bad projection rejected")
    except modtrace.ModtraceError:
        good &= check(True, "bad projection rejected")

    rng = np.random.default_rng(0)
    m = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
    good &= check(abs(modtrace.trace_norm(m.tolist()) - np.linalg.norm(m, "nuc")) < 1e-10, "trace norm matches numpy")
    u, s, vh = modtrace.svd(m.tolist())
    rebuilt = np.array(u) @ np.diag(s) @ np.array(vh).conj().T
    good &= check(np.abs(rebuilt - m).max() < 1e-10, "svd reconstructs")
    w, q = modtrace.eigh((m.conj().T @ m).tolist())
    good &= check(np.allclose(w, np.linalg.eigvalsh(m.conj().T @ m)), "eigenvalues match numpy")

    good &= check(all(p for _, p, _ in modtrace.paper_examples()), "built-in reproductions pass")
    return 0 if good else 1


if __name__ == "__main__":
    sys.exit(main())
