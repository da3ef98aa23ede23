"""CSV ingestion, model files, command dispatch, and exit codes."""

import numpy as np
import pytest

from crowdwise.cli import (
    AnalysisRequest,
    ingest_csv,
    load_model,
    main,
    read_candidates,
    run,
    save_model,
)
from crowdwise.errors import (
    DuplicateJudgeLabel,
    MissingCriterionColumn,
    NonNumericCell,
    ParseError,
    SampleTooSmall,
    ValidationFailed,
)
from crowdwise.model import estimate_model, fixed_criterion_model
from crowdwise.schemes import uniform_selection, uniform_weights
from crowdwise.wisdom import evaluate

BASIC_CSV = "a,b,criterion\n1,2,2\n3,4,3\n"


@pytest.fixture
def data_csv(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text(BASIC_CSV, encoding="utf-8")
    return str(path)


def machine_fields(captured: str) -> dict[str, str]:
    fields = {}
    for line in captured.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    return fields


def floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",")]


class TestIngestCsv:
    def test_two_judge_fixture(self, data_csv):
        sample = ingest_csv(data_csv)
        assert sample.judge_labels == ("a", "b")
        np.testing.assert_array_equal(sample.judgments, [[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(sample.criterion, [2.0, 3.0])

    def test_crlf_and_trailing_newline(self, tmp_path):
        path = tmp_path / "crlf.csv"
        path.write_bytes(b"a,criterion\r\n1,2\r\n3,4\r\n\r\n")
        sample = ingest_csv(str(path))
        assert sample.n_trials == 2

    def test_missing_criterion_column(self, tmp_path):
        path = tmp_path / "nocrit.csv"
        path.write_text("a,b\n1,2\n3,4\n")
        with pytest.raises(MissingCriterionColumn):
            ingest_csv(str(path))

    def test_criterion_is_case_sensitive(self, tmp_path):
        path = tmp_path / "case.csv"
        path.write_text("a,Criterion\n1,2\n3,4\n")
        with pytest.raises(MissingCriterionColumn):
            ingest_csv(str(path))

    def test_non_numeric_cell_located(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,criterion\n1,2\nN/A,4\n")
        with pytest.raises(NonNumericCell) as exc:
            ingest_csv(str(path))
        assert exc.value.row == 3
        assert exc.value.column == "a"
        assert exc.value.value == "N/A"

    def test_nan_cell_rejected(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("a,criterion\nnan,2\n3,4\n")
        with pytest.raises(NonNumericCell):
            ingest_csv(str(path))

    def test_duplicate_judge_label(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("a,a,criterion\n1,2,3\n4,5,6\n")
        with pytest.raises(DuplicateJudgeLabel):
            ingest_csv(str(path))

    def test_one_row_too_small(self, tmp_path):
        path = tmp_path / "tiny.csv"
        path.write_text("a,criterion\n1,2\n")
        with pytest.raises(SampleTooSmall):
            ingest_csv(str(path))

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("a,b,criterion\n1,2,3\n4,5\n")
        with pytest.raises(ParseError):
            ingest_csv(str(path))


class TestModelFiles:
    def test_round_trip_is_exact(self, data_csv, tmp_path):
        model = estimate_model(ingest_csv(data_csv))
        path = tmp_path / "model.txt"
        save_model(model, str(path))
        loaded = load_model(str(path))
        np.testing.assert_array_equal(loaded.judge_means, model.judge_means)
        np.testing.assert_array_equal(loaded.judge_cov, model.judge_cov)
        np.testing.assert_array_equal(loaded.cross_cov, model.cross_cov)
        assert loaded.criterion_mean == model.criterion_mean
        assert loaded.criterion_var == model.criterion_var
        assert loaded.judge_labels == model.judge_labels

    def test_single_judge_file(self, tmp_path):
        model = fixed_criterion_model([0.5], [[2.0]], 1.0, judge_labels=("solo",))
        path = tmp_path / "one.txt"
        save_model(model, str(path))
        loaded = load_model(str(path))
        assert loaded.n_judges == 1
        assert loaded.judge_labels == ("solo",)

    def test_non_psd_model_file_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text(
            "judge_labels = a, b\n"
            "judge_means = 0.0, 0.0\n"
            "judge_cov = 1.0, 2.0, 2.0, 1.0\n"
            "criterion_mean = 0.0\n"
            "criterion_var = 0.0\n"
            "cross_cov = 0.0, 0.0\n"
        )
        with pytest.raises(ValidationFailed):
            load_model(str(path))

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "missing.txt"
        path.write_text("judge_labels = a\njudge_means = 0.0\n")
        with pytest.raises(ParseError):
            load_model(str(path))

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "noeq.txt"
        path.write_text("judge_labels a\n")
        with pytest.raises(ParseError):
            load_model(str(path))

    def test_wrong_cov_size_rejected(self, tmp_path):
        path = tmp_path / "shape.txt"
        path.write_text(
            "judge_labels = a, b\n"
            "judge_means = 0.0, 0.0\n"
            "judge_cov = 1.0, 0.0, 1.0\n"
            "criterion_mean = 0.0\n"
            "criterion_var = 0.0\n"
            "cross_cov = 0.0, 0.0\n"
        )
        with pytest.raises(ParseError):
            load_model(str(path))


class TestAnalyzeCommand:
    def test_hand_computed_report(self, data_csv, capsys):
        code = main(["analyze", "--data", data_csv, "--format", "machine"])
        assert code == 0
        fields = machine_fields(capsys.readouterr().out)
        assert fields["schema_version"] == "1"
        assert float(fields["crowd_mse"]) == pytest.approx(0.5, abs=1e-9)
        assert float(fields["individual_mse"]) == pytest.approx(0.75, abs=1e-9)
        assert float(fields["wisdom_gap"]) == pytest.approx(0.25, abs=1e-9)
        assert fields["is_wise"] == "true"
        assert float(fields["crowd_bias_sq"]) == pytest.approx(0.0, abs=1e-12)
        assert float(fields["crowd_variance"]) == pytest.approx(2.0, abs=1e-9)
        assert float(fields["crowd_cross_term"]) == pytest.approx(-2.0, abs=1e-9)
        assert float(fields["criterion_var"]) == pytest.approx(0.5, abs=1e-9)
        assert floats(fields["per_judge_mse"]) == pytest.approx([0.75, 0.75], abs=1e-9)
        assert floats(fields["skill"]) == pytest.approx([1.0, 1.0], abs=1e-9)

    def test_every_human_number_is_in_machine_report(self, data_csv, capsys):
        assert main(["analyze", "--data", data_csv, "--format", "machine"]) == 0
        machine = machine_fields(capsys.readouterr().out)
        assert main(["analyze", "--data", data_csv]) == 0
        human = capsys.readouterr().out
        machine_numbers = set()
        for value in machine.values():
            for part in value.split(","):
                try:
                    machine_numbers.add(float(part))
                except ValueError:
                    pass
        for token in human.replace(",", " ").split():
            try:
                number = float(token)
            except ValueError:
                continue
            assert any(
                number == pytest.approx(m, rel=1e-9, abs=1e-9)
                for m in machine_numbers
            ), f"human value {number} missing from machine report"

    def test_file_path_equals_in_memory_path(self, data_csv, tmp_path, capsys):
        # ingest -> estimate -> save -> load -> analyze vs direct evaluation
        sample = ingest_csv(data_csv)
        model = estimate_model(sample)
        model_path = tmp_path / "round.txt"
        save_model(model, str(model_path))
        assert main(["analyze", "--model", str(model_path), "--format", "machine"]) == 0
        fields = machine_fields(capsys.readouterr().out)
        direct = evaluate(model, uniform_weights(2), uniform_selection(2))
        assert float(fields["crowd_mse"]) == pytest.approx(direct.crowd_mse, abs=1e-12)
        assert float(fields["individual_mse"]) == pytest.approx(
            direct.individual_mse, abs=1e-12
        )
        assert float(fields["wisdom_gap"]) == pytest.approx(direct.wisdom_gap, abs=1e-12)

    def test_skill_note_for_fixed_criterion(self, tmp_path, capsys):
        model = fixed_criterion_model([0.0, 0.0], np.eye(2), 0.0)
        path = tmp_path / "fixed.txt"
        save_model(model, str(path))
        assert main(["analyze", "--model", str(path), "--format", "machine"]) == 0
        fields = machine_fields(capsys.readouterr().out)
        assert "skill" not in fields
        assert "undefined" in fields["skill_note"]

    def test_explicit_weights_file(self, data_csv, tmp_path, capsys):
        wpath = tmp_path / "w.txt"
        wpath.write_text("0.25, 0.75\n")
        code = main(
            ["analyze", "--data", data_csv, "--weights", str(wpath), "--format", "machine"]
        )
        assert code == 0
        fields = machine_fields(capsys.readouterr().out)
        assert floats(fields["weights"]) == pytest.approx([0.25, 0.75])


class TestOptimizeCommand:
    def test_reports_solution_and_verdict(self, tmp_path, capsys):
        model = fixed_criterion_model([0.0, 0.0], np.diag([1.0, 4.0]), 0.0)
        path = tmp_path / "model.txt"
        save_model(model, str(path))
        assert main(["optimize", "--model", str(path), "--format", "machine"]) == 0
        fields = machine_fields(capsys.readouterr().out)
        assert floats(fields["weights"]) == pytest.approx([0.8, 0.2], abs=1e-8)
        assert float(fields["objective"]) == pytest.approx(0.8, abs=1e-9)
        assert float(fields["kkt_residual"]) <= 1e-8
        assert fields["is_wise"] == "true"


class TestCandidateCommand:
    def test_ranked_output(self, tmp_path, capsys):
        model = fixed_criterion_model([0.0], [[1.0]], 0.0, judge_labels=("j1",))
        model_path = tmp_path / "crowd.txt"
        save_model(model, str(model_path))
        cand_path = tmp_path / "cands.csv"
        cand_path.write_text(
            "label,mean,variance,cov_with_criterion,j1\n"
            "steady,0,0.25,0,0\n"
            "hedge,0,1,0,-1\n"
        )
        code = main(
            [
                "candidate",
                "--model",
                str(model_path),
                "--candidates",
                str(cand_path),
                "--format",
                "machine",
            ]
        )
        assert code == 0
        fields = machine_fields(capsys.readouterr().out)
        assert fields["candidate_1_label"] == "hedge"
        assert float(fields["candidate_1_marginal_gain"]) == pytest.approx(1.0, abs=1e-9)
        assert fields["candidate_2_label"] == "steady"
        assert float(fields["candidate_2_marginal_gain"]) == pytest.approx(0.8, abs=1e-9)

    def test_header_must_match_model_labels(self, tmp_path):
        model = fixed_criterion_model([0.0], [[1.0]], 0.0, judge_labels=("j1",))
        model_path = tmp_path / "crowd.txt"
        save_model(model, str(model_path))
        cand_path = tmp_path / "cands.csv"
        cand_path.write_text("label,mean,variance,cov_with_criterion,wrong\nc,0,1,0,0\n")
        loaded = load_model(str(model_path))
        with pytest.raises(ParseError):
            read_candidates(str(cand_path), loaded)


class TestSimulateCommand:
    def test_fixed_seed_byte_identical(self, data_csv, capsys):
        argv = [
            "simulate",
            "--data",
            data_csv,
            "--trials",
            "5000",
            "--seed",
            "7",
            "--format",
            "machine",
        ]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        second = capsys.readouterr().out
        assert first == second

    def test_analytic_beside_empirical(self, data_csv, capsys):
        assert (
            main(
                [
                    "simulate",
                    "--data",
                    data_csv,
                    "--trials",
                    "20000",
                    "--seed",
                    "3",
                    "--format",
                    "machine",
                ]
            )
            == 0
        )
        fields = machine_fields(capsys.readouterr().out)
        assert float(fields["analytic_crowd_mse"]) == pytest.approx(0.5, abs=1e-9)
        emp = float(fields["empirical_crowd_mse"])
        se = float(fields["crowd_mse_se"])
        assert abs(emp - 0.5) <= 4.0 * se


class TestSweepCommand:
    def test_one_row_per_cell_with_infeasible_marked(self, tmp_path, capsys):
        grid = tmp_path / "grid.txt"
        grid.write_text(
            "bias_scale = 0, 1\ncorrelation = -0.6, 0.2\nn_judges = 2, 3\n"
        )
        assert main(["sweep", "--sweep-grid", str(grid)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        header, rows = lines[0], lines[1:]
        assert header.startswith("bias_scale,correlation,n_judges,status")
        assert len(rows) == 8
        # rho = -0.6 is infeasible for 3 judges (floor -0.5) but fine for 2.
        statuses = {}
        for row in rows:
            cells = row.split(",")
            statuses[(cells[0], cells[1], cells[2])] = cells[3]
        assert statuses[("0.0", "-0.6", "3")] == "infeasible_correlation"
        assert statuses[("0.0", "-0.6", "2")] == "ok"
        ok_row = next(r for r in rows if r.split(",")[3] == "ok")
        cells = ok_row.split(",")
        assert float(cells[8]) >= float(cells[7]) - 1e-12  # optimal gap >= uniform gap

    def test_default_grid_runs(self, capsys):
        assert main(["sweep"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 + 4 * 6 * 4


class TestExitCodes:
    def test_success_is_zero(self, data_csv, capsys):
        assert main(["analyze", "--data", data_csv]) == 0
        capsys.readouterr()

    def test_usage_errors_are_one(self, data_csv, capsys):
        assert main(["analyze"]) == 1  # no input source
        assert main(["analyze", "--data", data_csv, "--model", "x"]) == 1
        assert main(["nonsense"]) == 1
        assert main(["simulate", "--data", data_csv, "--trials", "0"]) == 1
        assert main(["sweep", "--data", data_csv]) == 1
        err = capsys.readouterr().err
        assert err  # detail lands on stderr

    def test_data_errors_are_two(self, tmp_path, capsys):
        missing = tmp_path / "absent.csv"
        assert main(["analyze", "--data", str(missing)]) == 2

        nocrit = tmp_path / "nocrit.csv"
        nocrit.write_text("a,b\n1,2\n3,4\n")
        assert main(["analyze", "--data", str(nocrit)]) == 2

        bad_cell = tmp_path / "cell.csv"
        bad_cell.write_text("a,criterion\nx,2\n3,4\n")
        assert main(["analyze", "--data", str(bad_cell)]) == 2

        non_psd = tmp_path / "npsd.txt"
        non_psd.write_text(
            "judge_labels = a, b\n"
            "judge_means = 0.0, 0.0\n"
            "judge_cov = 1.0, 2.0, 2.0, 1.0\n"
            "criterion_mean = 0.0\n"
            "criterion_var = 0.0\n"
            "cross_cov = 0.0, 0.0\n"
        )
        assert main(["optimize", "--model", str(non_psd)]) == 2

        out, err = capsys.readouterr()
        assert "error" in err
        assert out.strip() == ""  # reports never land on stdout for failures

    def test_skill_scheme_on_fixed_criterion_is_two(self, tmp_path, capsys):
        model = fixed_criterion_model([0.0, 0.0], np.eye(2), 0.0)
        path = tmp_path / "fixed.txt"
        save_model(model, str(path))
        assert main(["analyze", "--model", str(path), "--weights", "skill"]) == 2
        capsys.readouterr()

    def test_numerical_failure_is_three(self, tmp_path, capsys):
        model = fixed_criterion_model([0.0, 0.0], np.diag([1.0, 4.0]), 0.0)
        path = tmp_path / "model.txt"
        save_model(model, str(path))
        assert main(["optimize", "--model", str(path), "--max-iterations", "1"]) == 3
        capsys.readouterr()


class TestRunApi:
    def test_request_object_direct(self, data_csv, capsys):
        request = AnalysisRequest(command="analyze", data_path=data_csv)
        assert run(request) == 0
        assert "wisdom gap" in capsys.readouterr().out

    def test_unknown_command_rejected(self, capsys):
        request = AnalysisRequest(command="explode", data_path="x")
        assert run(request) == 1
        capsys.readouterr()
