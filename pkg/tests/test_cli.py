import csv
import io
import json
from fractions import Fraction as F

import pytest

from hlpadic.cli import main
from hlpadic.signatures import from_json_obj


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_exit(capsys, *argv):
    with pytest.raises(SystemExit) as info:
        main(list(argv))
    out = capsys.readouterr()
    return info.value.code, out.out, out.err


class TestEval:
    def test_hall_littlewood_value(self, capsys):
        code, out, err = run(capsys, "eval", "hl-p", "--sig", "1,0", "--vars", "1,1/2", "--t", "1/2")
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == "3/2" and payload["float"] == 1.5
        assert err.startswith("# hlpadic ")

    def test_product_law_csv(self, capsys):
        code, out, _ = run(capsys, "eval", "product-law", "--n", "1", "--k", "1", "--t", "1/2", "--cap", "4",
                           "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["signature(s)", "prob_num", "prob_den", "prob_float"]
        body = {r[0]: F(int(r[1]), int(r[2])) for r in rows[1:-1]}
        assert body == {f"({j})": F(1, 2) ** (j + 1) for j in range(5)}
        assert rows[-1][0] == "deficit" and F(int(rows[-1][1]), int(rows[-1][2])) == F(1, 32)

    def test_boundary_measure(self, capsys):
        code, out, _ = run(capsys, "eval", "boundary", "--mu", "1,0", "--tail", "0", "--n", "1", "--t", "1/3")
        payload = json.loads(out)
        weights = {from_json_obj(r["signature"]): F(r["weight"]) for r in payload["rows"]}
        assert payload["complete"] and weights == {(1,): F(2, 3), (0,): F(1, 3)}

    def test_json_round_trip_is_byte_identical(self, capsys):
        _, out, _ = run(capsys, "eval", "boundary", "--mu", "2,1", "--tail", "-1", "--n", "2", "--t", "1/3")
        payload = json.loads(out)
        assert json.dumps(payload) + "\n" == out

    def test_gamma(self, capsys):
        _, out, _ = run(capsys, "eval", "gamma", "--lam", "0", "--nu", "0", "--alpha", "1/4", "--t", "1/3")
        assert F(json.loads(out)["value"]) == F(3, 4) / (1 - F(1, 12))

    def test_bad_signature_exits_2(self, capsys):
        code, _, err = run_exit(capsys, "eval", "hl-p", "--sig", "0,1", "--vars", "1,2")
        assert code == 2 and "--sig" in err

    def test_bad_parameter_exits_2(self, capsys):
        code, _, err = run_exit(capsys, "eval", "link", "--mu", "1,0", "--lam", "0", "--t", "3/2")
        assert code == 2 and "--t" in err

    def test_missing_flag_exits_2(self, capsys):
        code, _, err = run_exit(capsys, "eval", "gamma", "--lam", "0", "--nu", "0")
        assert code == 2 and "--alpha" in err


class TestSimulate:
    def test_haar_reports_tv(self, capsys, tmp_path):
        log = tmp_path / "trials.csv"
        code, out, err = run(capsys, "simulate", "haar-snf", "--n", "2", "--p", "2", "--precision", "24",
                             "--samples", "20000", "--seed", "7", "--log", str(log))
        assert code == 0
        assert "seed=7" in err and "TV=" in err
        lines = log.read_text().splitlines()
        assert lines[0] == "trial,signature,flags" and len(lines) == 20001
        assert lines[1].startswith("0,")

    def test_low_precision_exits_3(self, capsys):
        code, _, err = run(capsys, "simulate", "haar-snf", "--n", "2", "--p", "2", "--precision", "3",
                           "--guard", "2", "--samples", "2000", "--seed", "1")
        assert code == 3 and "raise --precision" in err

    def test_e_mu_json(self, capsys):
        code, out, _ = run(capsys, "simulate", "e-mu", "--mu", "0,-1", "--tail", "neg_inf", "--rows", "2",
                           "--cols", "2", "--p", "3", "--samples", "5000", "--seed", "3", "--format", "json")
        payload = json.loads(out)
        assert code == 0 and payload["summary"]["samples"] == 5000
        assert payload["summary"]["tv"] < 0.05

    def test_corner_needs_mu(self, capsys):
        code, _, err = run_exit(capsys, "simulate", "corner", "--samples", "10")
        assert code == 2 and "--mu" in err


class TestVerify:
    def test_dual_formula_suite(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "dual-formula")
        assert code == 0 and out.startswith("PASS dual-formula")

    def test_coherency_suite(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "coherency", "--n", "3", "--max-parts", "3")
        assert code == 0

    def test_unknown_suite_exits_2(self, capsys):
        code, _, _ = run_exit(capsys, "verify", "--suite", "nonsense")
        assert code == 2
