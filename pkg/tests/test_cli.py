import io
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from ovlstat import schemas
from ovlstat.cli import main

DATA = Path(__file__).parent / "data"


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def write_values(path, values):
    path.write_text("\n".join(repr(float(v)) for v in values) + "\n")
    return str(path)


@pytest.fixture
def normal_files(tmp_path):
    r = np.random.default_rng(41)
    return (
        write_values(tmp_path / "pos.txt", r.normal(2, 1, 10**5)),
        write_values(tmp_path / "neg.txt", r.normal(0, 1, 10**5)),
    )


class TestCompute:
    def test_identical(self, tmp_path):
        f = write_values(tmp_path / "a.txt", np.random.default_rng(1).normal(size=500))
        code, out = run(["compute", "--pos", f, "--neg", f])
        assert code == 0
        env = json.loads(out)
        jsonschema.validate(env, schemas.envelope(schemas.EFFECT_SIZE_REPORT))
        assert env["payload"]["ovl"] == pytest.approx(1)
        assert env["payload"]["gssmd"] == pytest.approx(0, abs=0.05)

    def test_disjoint(self, tmp_path):
        a = write_values(tmp_path / "a.txt", [1, 2, 3])
        b = write_values(tmp_path / "b.txt", [10, 11, 12])
        env = json.loads(run(["compute", "--pos", a, "--neg", b])[1])
        assert abs(env["payload"]["gssmd"]) == 1

    def test_parametric(self, normal_files):
        code, out = run(["compute", "--pos", normal_files[0], "--neg", normal_files[1], "--method", "parametric"])
        payload = json.loads(out)["payload"]
        assert payload["method"] == "parametric_normal"
        assert payload["ovl"] == pytest.approx(0.3173, abs=0.01)

    def test_csv(self, tmp_path):
        a = write_values(tmp_path / "a.txt", [1, 2, 3])
        b = write_values(tmp_path / "b.txt", [0, 1, 2])
        code, out = run(["compute", "--pos", a, "--neg", b, "--format", "csv", "--bins", "3"])
        header, row = out.splitlines()
        assert header == "n_pos,n_neg,z_factor,ssmd,robust_z_factor,robust_ssmd,gssmd,ovl,method"
        assert row.split(",")[0:2] == ["3", "3"]

    def test_degenerate_is_null_not_error(self, tmp_path):
        a = write_values(tmp_path / "a.txt", [1, 1, 1])
        b = write_values(tmp_path / "b.txt", [2, 2, 2])
        code, out = run(["compute", "--pos", a, "--neg", b])
        assert code == 0
        payload = json.loads(out)["payload"]
        assert payload["ssmd"] is None and "ssmd" in payload["errors"]
        assert payload["z_factor"] == 1

    def test_missing_file(self, tmp_path):
        code, _ = run(["compute", "--pos", str(tmp_path / "nope"), "--neg", str(tmp_path / "nope")])
        assert code == 2

    def test_bad_number(self, tmp_path):
        a = tmp_path / "a.txt"
        a.write_text("1\nabc\n")
        assert run(["compute", "--pos", str(a), "--neg", str(a)])[0] == 2

    def test_bad_flags(self):
        assert run(["compute", "--pos", "x"])[0] == 2
        assert run(["compute", "--pos", "x", "--neg", "y", "--bins", "0"])[0] == 2

    def test_deterministic(self, tmp_path):
        a = write_values(tmp_path / "a.txt", [1, 2, 3, 5])
        b = write_values(tmp_path / "b.txt", [0, 1, 2])
        assert run(["compute", "--pos", a, "--neg", b, "--method", "kde"]) == run(
            ["compute", "--pos", a, "--neg", b, "--method", "kde"]
        )


class TestSimulate:
    def test_byte_identical(self, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            argv = ["simulate", "shift", "--seed", "3", "--trials", "20", "--sigma", "1", "--shift", "10", "--out", str(out), "--workers", "1"]
            assert run(argv)[0] == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_shift_saturates(self):
        code, out = run(["simulate", "shift", "--seed", "3", "--trials", "100", "--sigma", "1", "--shift", "10", "--workers", "1"])
        env = json.loads(out)
        jsonschema.validate(env, schemas.envelope(schemas.MEASURE_TABLE))
        row = next(r for r in env["payload"]["rows"] if r["measure"] == "gssmd")
        assert row["mean"] == pytest.approx(1, abs=0.02)
        assert env["seed"] == 3

    def test_null_bound_column(self, tmp_path):
        out = tmp_path / "nb.csv"
        code, _ = run(["simulate", "null-bound", "--seed", "4", "--trials", "200", "--n", "1000", "--out", str(out), "--workers", "1"])
        assert code == 0
        header, row = out.read_text().splitlines()
        cols = dict(zip(header.split(","), row.split(",")))
        assert cols["sample_size"] == "1000"
        assert float(cols["abs_q95"]) < 0.1

    def test_outlier_json_file(self, tmp_path):
        out = tmp_path / "o.json"
        argv = ["simulate", "outlier", "--seed", "5", "--trials", "10", "--fraction", "0.1", "--outlier-mean", "10", "--out", str(out), "--workers", "1"]
        assert run(argv)[0] == 0
        jsonschema.validate(json.loads(out.read_text()), schemas.MEASURE_TABLE)

    def test_seed_required(self):
        assert run(["simulate", "shift"])[0] == 2

    def test_invalid_config(self):
        assert run(["simulate", "shift", "--seed", "1", "--trials", "0"])[0] == 2
        assert run(["simulate", "outlier", "--seed", "1", "--fraction", "2"])[0] == 2


class TestScreen:
    def test_fixture(self, tmp_path):
        out = tmp_path / "r.json"
        calls = tmp_path / "calls.csv"
        argv = ["screen", "--input", str(DATA / "two_plates.csv"), "--train-plate", "P1", "--test-plate", "P2", "--out", str(out), "--calls-csv", str(calls)]
        assert run(argv)[0] == 0
        env = json.loads(out.read_text())
        jsonschema.validate(env, schemas.envelope(schemas.SCREEN_PAYLOAD))
        for plate in env["payload"]["plates"]:
            t = plate["thresholds"]
            assert None not in (t["gssmd_eps0"], t["ssmd_strong"], t["ssmd_weak"], t["np_eps"])
        ref = env["payload"]["reference"]
        assert ref["train_plate"] == "P1" and ref["accuracy"] > 0.9
        assert len(calls.read_text().splitlines()) == 1 + 2 * 320

    def test_planted_hits(self):
        code, out = run(["screen", "--input", str(DATA / "two_plates.csv")])
        truth = json.loads((DATA / "two_plates_truth.json").read_text())
        for plate in json.loads(out)["payload"]["plates"]:
            t = truth[plate["plate_id"]]
            hits = {c["well_id"] for c in plate["calls"] if c["is_hit_gssmd"]}
            planted = {w for w, h in t.items() if h}
            assert planted <= hits
            null = len(t) - len(planted)
            assert len(hits - planted) <= 0.05 * null

    def test_identical_controls(self, caplog):
        code, out = run(["screen", "--input", str(DATA / "identical_controls.csv")])
        assert code == 0
        plates = json.loads(out)["payload"]["plates"]
        same = plates[0]
        assert same["thresholds"]["gssmd_eps0"] is None
        assert same["thresholds"]["np_eps"] is not None
        assert any("DirectionUndefined" in w for w in same["warnings"])

    def test_all_plates_skipped(self):
        assert run(["screen", "--input", str(DATA / "insufficient_controls.csv")])[0] == 3

    def test_bad_input(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert run(["screen", "--input", str(bad)])[0] == 2
        bad.write_text("plate_id,well_id,row,col,value,well_type\nA,A01,1,1,xx,sample\n")
        assert run(["screen", "--input", str(bad)])[0] == 2
        assert run(["screen", "--input", str(tmp_path / "missing.csv")])[0] == 2

    def test_unknown_plate(self):
        argv = ["screen", "--input", str(DATA / "two_plates.csv"), "--train-plate", "P1", "--test-plate", "P9"]
        assert run(argv)[0] == 2

    def test_deterministic(self):
        argv = ["screen", "--input", str(DATA / "two_plates.csv")]
        assert run(argv) == run(argv)
