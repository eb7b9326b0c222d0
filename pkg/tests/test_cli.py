import pytest
from click.testing import CliRunner

from tsirelson_lab import lab, oracle
from tsirelson_lab.cli import cli
from tsirelson_lab.exceptions import BudgetExceeded
from tsirelson_lab.vectors import read_vector_file


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def vector_file(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("# e_3 + e_4 + e_5\n3 1\n4 1\n5 1\n")
    return str(path)


# ---------- norm ----------

def test_norm_prints_exact_and_decimal(runner, vector_file):
    result = runner.invoke(cli, ["norm", "--def", "tsirelson", vector_file])
    assert result.exit_code == 0
    assert result.output.strip() == "3/2 (1.5)"


@pytest.mark.parametrize("args, expected", [
    (["--def", "norm_n", "--n", "2"], "1 (1)"),
    (["--def", "seminorm_jn", "--j", "1", "--n", "2"], "3/2 (1.5)"),
    (["--def", "schreier", "--m", "1"], "3 (3)"),
    (["--def", "mixed", "--c-rule", "one"], "3/2 (1.5)"),
])
def test_norm_definitions(runner, vector_file, args, expected):
    result = runner.invoke(cli, ["norm"] + args + [vector_file])
    assert result.exit_code == 0
    assert result.output.splitlines()[0] == expected


def test_norm_with_certificate(runner, vector_file):
    result = runner.invoke(cli, ["norm", "--cert", vector_file])
    assert result.exit_code == 0
    assert "{3,4,5}@0" in result.output


def test_malformed_vector_file_is_a_domain_error(runner, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("4 1\n3 1\n")
    result = runner.invoke(cli, ["norm", str(path)])
    assert result.exit_code == 2
    assert "line 2" in result.output


# ---------- schreier ----------

@pytest.mark.parametrize("args, expected", [
    (["member", "--n", "1", "{2,3,4}"], "false"),
    (["member", "--n", "2", "{2,3,4,5,6,7}"], "true"),
    (["maximal", "--n", "1", "{3,4,5}"], "true"),
    (["admissible", "--k", "1", "--scale", "3", "{2}", "{3}"], "true"),
    (["admissible", "--k", "1", "{1}", "{2}"], "false"),
])
def test_schreier_commands(runner, args, expected):
    result = runner.invoke(cli, ["schreier"] + args)
    assert result.exit_code == 0
    assert result.output.strip() == expected


def test_maximal_of_a_non_member_is_a_domain_error(runner):
    result = runner.invoke(cli, ["schreier", "maximal", "--n", "1", "{2,3,4}"])
    assert result.exit_code == 2


def test_unparseable_set_is_a_usage_error(runner):
    result = runner.invoke(cli, ["schreier", "member", "--n", "1", "{a,b}"])
    assert result.exit_code == 1


def test_unknown_option_is_a_usage_error(runner):
    result = runner.invoke(cli, ["norm", "--bogus"])
    assert result.exit_code == 1


# ---------- constructions ----------

def test_average_to_stdout(runner):
    result = runner.invoke(cli, ["average", "--n", "1", "--eps", "1/4"])
    assert result.exit_code == 0
    assert "17 2/9" in result.output
    assert "# lower bound: 1 (1)" in result.output


def test_average_to_file(runner, tmp_path):
    path = tmp_path / "z.txt"
    result = runner.invoke(cli, ["average", "--n", "1", "--eps", "1/4", "-o", str(path)])
    assert result.exit_code == 0
    assert read_vector_file(str(path)).support == tuple(range(9, 18))


def test_average_out_of_budget(runner):
    result = runner.invoke(cli, ["average", "--n", "2", "--eps", "1/2"])
    assert result.exit_code == 2
    assert "4599" in result.output


def test_bad_rational_is_a_usage_error(runner):
    result = runner.invoke(cli, ["average", "--n", "1", "--eps", "one"])
    assert result.exit_code == 1


def test_stabilize_writes_csv(runner, tmp_path):
    path = tmp_path / "out" / "stabilize.csv"
    result = runner.invoke(cli, ["stabilize", "--n", "1", "--csv", str(path)])
    assert result.exit_code == 0
    assert "||z|| = 1 (1)" in result.output
    assert path.read_text().splitlines()[0] == "experiment,n,j,value_exact,value_decimal,d,ratio"


def test_stabilize_from_config(runner, tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("experiment: average\nn: 1\nepsilon: 1/4\n")
    result = runner.invoke(cli, ["stabilize", "--config", str(path)])
    assert result.exit_code == 0
    assert "average" in result.output


def test_distort_commands_with_small_support(runner):
    env = {"TSIRELSON_SUPPORT_BOUND": "24"}
    result = runner.invoke(cli, ["distort", "mixed", "--c-rule", "one"], env=env)
    assert result.exit_code == 0
    assert "average(n=1, start=2)" in result.output
    result = runner.invoke(cli, ["distort", "theta", "--theta", "1/2", "--n", "1"], env=env)
    assert result.exit_code == 0
    assert "distort_theta_low" in result.output


# ---------- oracle-check ----------

def test_oracle_check(runner):
    result = runner.invoke(cli, ["oracle-check", "--support", "4", "--trials", "3", "--seed", "1"])
    assert result.exit_code == 0
    assert "3/3 exact matches" in result.output


def test_oracle_check_mismatch_is_a_verification_failure(runner, monkeypatch):
    monkeypatch.setattr(oracle, "run_trial", lambda x, settings=None: oracle.TrialOutcome(x, ["forced"]))
    result = runner.invoke(cli, ["oracle-check", "--support", "3", "--trials", "2", "--seed", "1"])
    assert result.exit_code == 3
    assert "0/2 exact matches" in result.output


def test_exit_code_is_read_from_the_error(runner, monkeypatch):
    class Unverifiable(BudgetExceeded):
        exit_code = 3

    def refuse(*args, **kwargs):
        raise Unverifiable("cannot certify")

    monkeypatch.setattr(lab, "stabilization_experiment", refuse)
    result = runner.invoke(cli, ["stabilize", "--n", "1"])
    assert result.exit_code == 3


def test_bad_experiment_file_is_a_domain_error(runner, tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("experiment: unknown\n")
    result = runner.invoke(cli, ["stabilize", "--config", str(path)])
    assert result.exit_code == 2
