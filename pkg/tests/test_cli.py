import json
import subprocess
import sys

import pytest

from chainsaw import quiver as Q
from chainsaw.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _gen(tmp_path, capsys, name, *args):
    path = tmp_path / name
    code, _, _ = _run(capsys, "gen", *args, "--out", str(path))
    assert code == 0
    return path


def test_gen_and_check(tmp_path, capsys):
    f = _gen(tmp_path, capsys, "m.json", "--shape", "chainsaw", "--N", "2", "--dims", "1,2",
             "--seed", "3", "--stable")
    assert (tmp_path / "m.json.manifest.json").exists()
    manifest = json.loads((tmp_path / "m.json.manifest.json").read_text())
    assert manifest["operation"] == "quiver.random_module"
    assert manifest["seed"] == 3
    code, out, _ = _run(capsys, "check", str(f))
    assert code == 0
    assert "residuals: all zero" in out
    assert "gen-stable: true" in out


def test_gen_is_deterministic(tmp_path, capsys):
    a = _gen(tmp_path, capsys, "a.json", "--shape", "rift", "--N", "2", "--k", "2",
             "--dims", "1,1,1,1,1,1", "--seed", "9")
    b = _gen(tmp_path, capsys, "b.json", "--shape", "rift", "--N", "2", "--k", "2",
             "--dims", "1,1,1,1,1,1", "--seed", "9")
    assert a.read_bytes() == b.read_bytes()


def test_rotate_cycle_is_byte_identical(tmp_path, capsys):
    f = _gen(tmp_path, capsys, "m.json", "--shape", "chainsaw", "--N", "3", "--dims", "1,2,1")
    out = tmp_path / "r.json"
    code, _, _ = _run(capsys, "map", "rotate", str(f), "--times", "3", "--out", str(out))
    assert code == 0
    assert out.read_bytes() == f.read_bytes()


def test_map_output_is_valid(tmp_path, capsys):
    f = _gen(tmp_path, capsys, "d.json", "--shape", "dented", "--N", "2", "--dims", "1,1,1")
    code, out, _ = _run(capsys, "map", "blowdown_pi", str(f))
    assert code == 0
    m = Q.deserialize(out.encode())
    assert m.shape.kind == Q.CHAINSAW
    assert Q.satisfies_relations(m)


def test_fixed_pipeline(tmp_path, capsys):
    f = _gen(tmp_path, capsys, "f.json", "--shape", "fixed", "--N", "2", "--k", "2",
             "--dims", "1,1,1,1", "--seed", "2")
    a = tmp_path / "a.json"
    assert _run(capsys, "map", "assemble", str(f), "--out", str(a))[0] == 0
    g = tmp_path / "g.json"
    code, out, _ = _run(capsys, "fixed", str(a), "--k", "2", "--graded-out", str(g))
    assert code == 0
    assert "fixed: true" in out
    assert Q.deserialize(g.read_bytes()).shape.kind == Q.FIXED


def test_stability_json(tmp_path, capsys):
    f = _gen(tmp_path, capsys, "d.json", "--shape", "dented", "--N", "2", "--dims", "1,1,1")
    code, out, _ = _run(capsys, "stability", str(f), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"][0]["verdict"] in ("Stable", "Unstable", "Unknown")


@pytest.mark.parametrize("builder,shape,dims,flag,zero", [
    ("stack", "chainsaw", "1,1", None, True),
    ("weighted", "chainsaw", "1,1", None, True),
    ("blowup", "dented", "1,1,1", None, True),
    ("blowup", "dented", "1,1,1", "--literal-signs", False),
])
def test_monad_commands(tmp_path, capsys, builder, shape, dims, flag, zero):
    f = _gen(tmp_path, capsys, "m.json", "--shape", shape, "--N", "2", "--dims", dims)
    args = ["monad", builder, str(f), "--json"] + ([flag] if flag else [])
    code, out, _ = _run(capsys, *args)
    assert code == 0
    doc = json.loads(out)
    assert doc.get("complex", doc.get("all_hold")) is zero


def test_weight_commands(capsys):
    code, out, _ = _run(capsys, "nakajima", "--v", "2,1,1", "--N", "2", "--k", "3")
    assert code == 0
    assert "dominant: true" in out
    code, out, _ = _run(capsys, "mult", "--lambda", "1:0:0", "--nu", "1:0:-3")
    assert code == 0
    assert "multiplicity: 3" in out
    code, out, _ = _run(capsys, "predict", "--v", "1,1", "--N", "2", "--k", "2", "--json")
    assert code == 0
    doc = json.loads(out)
    assert {tuple(e["beta"]): e["m"] for e in doc["table"]["entries"]} == {
        (0, 0): 1, (0, 1): 0, (1, 0): 1, (1, 1): 1}


def test_exit_codes(tmp_path, capsys):
    assert _run(capsys, "check", str(tmp_path / "missing.json"))[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = _run(capsys, "check", str(bad))
    assert code == 3
    assert json.loads(err.strip().splitlines()[-1])["error"] == "QuiverDataError"
    assert _run(capsys, "gen", "--shape", "chainsaw", "--N", "2", "--dims", "1")[0] == 2
    assert _run(capsys, "predict", "--v", "0,2", "--N", "1", "--k", "2")[0] == 3
    f = _gen(tmp_path, capsys, "d.json", "--shape", "dented", "--N", "2", "--dims", "1,1,1")
    assert _run(capsys, "map", "rotate", str(f))[0] == 3
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chainsaw.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("chainsaw ")
