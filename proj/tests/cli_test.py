"""Exit codes, determinism and report schema of the mpst command line."""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema

MPST, PROTOCOLS, SCHEMA = (os.path.abspath(a) for a in sys.argv[1:4])

failures = []


def run(*args, env=None):
    return subprocess.run([MPST, *args], capture_output=True, cwd=PROTOCOLS, env=env)


def expect(name, cond, detail=""):
    if not cond:
        failures.append(f"{name}: {detail}")
    print(("ok   " if cond else "FAIL ") + name)


def expect_exit(args, code, stderr_has=None):
    r = run(*args)
    name = "mpst " + " ".join(args)
    detail = f"exit {r.returncode}, stderr {r.stderr.decode()[:200]!r}"
    expect(name + f" exits {code}", r.returncode == code, detail)
    if stderr_has is not None:
        expect(name + f" reports {stderr_has!r}", stderr_has in r.stderr.decode(), detail)
    return r


with open(SCHEMA) as f:
    schema = json.load(f)

# Verdicts and exit codes.
r = expect_exit(["compat", "commit.cfsm", "--json"], 0)
expect("compat commit is compatible", json.loads(r.stdout)["compatible"] is True)
expect_exit(["compat", "remark_abc.cfsm"], 1)
expect_exit(["synth", "remark_abc.cfsm"], 1, "not multiparty compatible")
expect_exit(["synth", "commit.cfsm", "--verify", "10,3"], 0)
expect_exit(["wf", "commit.gt"], 0)
expect_exit(["wf", "remark_nonproj.gt"], 1)
expect_exit(["check", "commit.cfsm", "--bound", "2", "--liveness"], 0)
expect_exit(["check", "remark_abc.cfsm", "--bound", "1"], 1)
expect_exit(["session", "data_transfer.cfsm"], 0)
expect_exit(["session", "racing.cfsm"], 1)
expect_exit(["gsynth", "racing.cfsm"], 1, "not session compatible")
expect_exit(["gsynth", "data_transfer.cfsm", "--verify", "10"], 0)
expect_exit(["project", "-p", "C", "remark_nonproj.gt"], 1, "cannot merge")

with tempfile.TemporaryDirectory() as tmp:
    garbage = os.path.join(tmp, "garbage.gt")
    with open(garbage, "w") as f:
        f.write("A -> : {")
    expect_exit(["parse", garbage], 2)
    expect_exit(["parse", os.path.join(tmp, "missing.gt")], 2)
    bad = os.path.join(tmp, "bad.ggt")
    with open(bad, "w") as f:
        f.write("x0 = A -> B : a; x1;\ninit x0;\n")
    expect_exit(["parse", bad], 2, "never defined")
    out = os.path.join(tmp, "out.gt")
    expect_exit(["synth", "commit.cfsm", "-o", out], 0)
    with open(out) as f:
        back = f.read()
    expect("synth -o writes a parseable type", run("parse", out).returncode == 0, back)
expect_exit(["bogus"], 2)
expect_exit(["check", "commit.cfsm"], 2)
expect_exit(["translate", "commit_c.lt"], 2, "--owner")

env = dict(os.environ, MPST_NODE_CAP="5")
r = run("check", "commit.cfsm", "--bound", "3", env=env)
expect("node cap gives exit 3", r.returncode == 3, r.stderr.decode())

# Every --json report validates.
json_cmds = [
    ["compat", "commit.cfsm", "--json"],
    ["compat", "remark_abc.cfsm", "--json"],
    ["compat", "buyer_seller.cfsm", "--json"],
    ["check", "commit.cfsm", "--bound", "2", "--liveness", "--json"],
    ["check", "remark_abc.cfsm", "--bound", "1", "--liveness", "--json"],
    ["wf", "commit.gt", "--json"],
    ["wf", "remark_nonproj.gt", "--json"],
    ["session", "commit.cfsm", "--json"],
    ["session", "remark_abc.cfsm", "--json"],
    ["synth", "commit.cfsm", "--verify", "8,2", "--json"],
]
for args in json_cmds:
    r = run(*args)
    try:
        jsonschema.validate(json.loads(r.stdout), schema)
        ok = True
        detail = ""
    except (jsonschema.ValidationError, json.JSONDecodeError) as e:
        ok = False
        detail = str(e)[:300]
    expect("schema: mpst " + " ".join(args), ok, detail)

# Determinism: the same command twice gives the same bytes.
corpus_cmds = [
    ["parse", "commit.gt"], ["parse", "commit.cfsm"], ["parse", "commit_c.lt"], ["parse", "data_transfer.ggt"],
    ["project", "commit.gt"], ["project", "-p", "C", "commit.gt"], ["wf", "g2.gt"], ["wf", "remark_a2bc.gt"],
    ["translate", "commit.cfsm"], ["translate", "commit_c.lt", "--owner", "C"],
    ["compat", "commit.cfsm", "--json"], ["compat", "remark_abc.cfsm", "--json"], ["compat", "remark_a2bc.cfsm"],
    ["synth", "commit.cfsm"], ["synth", "remark_a2bc.cfsm"], ["synth", "buyer_seller.cfsm"],
    ["synth", "commit.cfsm", "--verify", "8,2", "--json"],
    ["check", "commit.cfsm", "--bound", "3", "--liveness", "--json"], ["check", "remark_abc.cfsm", "--bound", "2"],
    ["--threads", "4", "check", "commit.cfsm", "--bound", "3", "--json"],
    ["simulate", "commit.gt", "--steps", "12", "--bound", "2"], ["simulate", "commit.cfsm", "--steps", "12"],
    ["simulate", "data_transfer.ggt", "--steps", "8"],
    ["session", "data_transfer.cfsm", "--json"], ["session", "uninformed.cfsm"],
    ["gproject", "data_transfer.ggt"], ["gproject", "data_transfer.ggt", "--machines"],
    ["gsynth", "commit.cfsm"], ["gsynth", "data_transfer.cfsm"],
    ["petri", "data_transfer.ggt", "-p", "A"], ["petri", "data_transfer.ggt", "-p", "B", "--dot"],
    ["dot", "commit.cfsm"], ["dot", "commit.cfsm", "--reach", "1"], ["dot", "commit.gt"],
    ["dot", "commit_c.lt", "--owner", "C"], ["dot", "data_transfer.ggt"], ["dot", "data_transfer.ggt", "-p", "A"],
    ["dot", "data_transfer.ggt", "-p", "A", "--petri"],
]
for args in corpus_cmds:
    a, b = run(*args), run(*args)
    same = a.stdout == b.stdout and a.stderr == b.stderr and a.returncode == b.returncode
    expect("deterministic: mpst " + " ".join(args), same and a.returncode in (0, 1),
           f"exit {a.returncode}/{b.returncode} {a.stderr.decode()[:200]}")

# The thread count does not change results.
one = run("check", "commit.cfsm", "--bound", "3", "--json")
four = run("--threads", "4", "check", "commit.cfsm", "--bound", "3", "--json")
expect("threads do not change the report", one.stdout == four.stdout)

r = run("--version")
expect("--version", r.returncode == 0 and r.stdout.startswith(b"mpst "))

if failures:
    print(f"\n{len(failures)} failure(s)")
    for f in failures:
        print("  " + f)
    sys.exit(1)
