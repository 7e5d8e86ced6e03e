"""End-to-end checks of the steinrl command-line tool."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

FIXTURE = """SECTION Graph
Nodes 3
Edges 2
E 1 2 1
E 2 3 1
END
SECTION Terminals
Terminals 2
T 1
T 3
END
EOF
"""


def run(exe, *args):
    out = subprocess.run([exe, *map(str, args)], capture_output=True, text=True)
    if out.returncode != 0:
        raise AssertionError(f"{args} failed: {out.stderr}")
    return out.stdout


def main(exe):
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        stp = tmp / "fixture.stp"
        stp.write_text(FIXTURE)

        report = json.loads(run(exe, "solve", stp, "--method", "exact", "--edges", tmp / "tree.txt"))
        assert report["cost"] == 2.0 and report["verified"]
        assert (tmp / "tree.txt").read_text() == "1 2 1\n2 3 1\n"

        failed = subprocess.run([exe, "solve", stp, "--method", "agent"], capture_output=True, text=True)
        assert failed.returncode != 0 and "checkpoint" in failed.stderr

        cnf = tmp / "f.cnf"
        cnf.write_text("p cnf 2 2\n1 -2 0\n2 0\n")
        run(exe, "reduce", "sat", cnf, "--out", tmp / "red" / "f", "--seed", 5)
        meta = json.loads((tmp / "red" / "f.meta.json").read_text())
        assert meta["source_kind"] == "sat" and meta["seed"] == 5
        solved = json.loads(run(exe, "solve", tmp / "red" / "f.stp", "--method", "exact"))
        assert solved["b"] <= 1.0

        run(exe, "train", "--generator", "rr:n=12", "--rounds", 30, "--p-dim", 4, "--batch", 4,
            "--validation", 3, "--validate-every", 10, "--out", tmp / "train", "--seed", 3)
        curve = (tmp / "train" / "curve.csv").read_text().splitlines()
        assert curve[0] == "round,episode_cost,mean_loss,epsilon,gain_on_validation"
        assert len(curve) == 31
        ckpt = json.loads((tmp / "train" / "checkpoint.json").read_text())
        assert ckpt["format"] == "steinrl-qnet" and ckpt["p"] == 4

        bench_args = ["bench", "rr:n=12", "--count", 4, "--method", "classic,exact,agent",
                      "--checkpoint", tmp / "train" / "checkpoint.json", "--seed", 9]
        first = run(exe, *bench_args)
        second = run(exe, *bench_args)
        assert first == second
        rows = first.strip().splitlines()
        assert rows[0] == "instance,method,trial,cost,reference_kind,reference,ratio"
        assert len(rows) == 1 + 4 * 3
        as_json = json.loads(run(exe, *bench_args, "--format", "json"))
        assert {a["method"] for a in as_json["aggregates"]} == {"classic", "exact", "agent"}
    print("cli smoke tests passed")


if __name__ == "__main__":
    main(sys.argv[1])
