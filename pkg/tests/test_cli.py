import csv

import pytest

from holderipm.cli import main
from holderipm.measures import DiscreteMeasure, measure_to_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def measures(tmp_path):
    p = tmp_path / "p.csv"
    q = tmp_path / "q.csv"
    p.write_text(measure_to_csv(DiscreteMeasure.dirac([0.0])))
    q.write_text(measure_to_csv(DiscreteMeasure.dirac([1.0])))
    return p, q


def test_bounds_single_row(capsys):
    code, out, _ = run(capsys, "bounds", "--alpha", "1", "--d", "4", "--n", "100")
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["n", "bound", "mode", "branch"]
    assert len(rows) == 2


def test_bounds_both_modes_and_plot(capsys, tmp_path):
    fig = tmp_path / "b.svg"
    code, out, _ = run(capsys, "bounds", "--alpha", "1", "--d", "4", "--n", "100,1000", "--K", "1",
                       "--lambda", "1", "--mode", "both", "--plot", str(fig))
    assert code == 0
    assert len(out.splitlines()) == 5
    assert "paper-display" in out
    assert fig.exists()


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "bounds", "--alpha", "1", "--d", "4", "--n", "100", "--bogus")
    assert code == 1
    assert "usage" in err


def test_help_exits_zero(capsys):
    assert run(capsys, "compute", "--help")[0] == 0


def test_compute_rejects_alpha_above_one(capsys):
    code, _, err = run(capsys, "compute", "--alpha", "1.5")
    assert code == 1
    assert "alpha <= 1" in err


def test_compute_value_and_witness(capsys, measures, tmp_path):
    p, q = measures
    wit = tmp_path / "w.csv"
    code, out, _ = run(capsys, "compute", "--p", str(p), "--q", str(q), "--alpha", "1", "--ball", "max",
                       "--witness", str(wit))
    assert code == 0
    row = next(csv.DictReader(out.splitlines()))
    assert float(row["value"]) == pytest.approx(1.0)
    assert row["status"] == "optimal"
    assert wit.read_text().splitlines()[0] == "index,x1,f"


def test_compute_missing_file_is_io_error(capsys, measures):
    p, _ = measures
    assert run(capsys, "compute", "--p", str(p), "--q", "/nonexistent/q.csv", "--alpha", "1")[0] == 3


def test_divergent_dudley_is_numeric_failure(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, _, err = run(capsys, "bounds", "--alpha", "1", "--d", "2", "--n", "100", "--dudley", "1",
                       "--out", str(out))
    assert code == 2
    assert "diverges" in err
    assert not out.exists()


def test_entropy_output(capsys):
    code, out, _ = run(capsys, "entropy", "--alpha", "1", "--d", "1", "--eps", "0.4,0.3,0.2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "epsilon,logN"
    assert lines[-1].startswith("# fitted_exponent=")


def test_entropy_too_few_eps(capsys):
    assert run(capsys, "entropy", "--alpha", "1", "--d", "1", "--eps", "0.4")[0] == 1


def test_rademacher_seeded(capsys):
    args = ("rademacher", "--alpha", "1", "--n", "8", "--grid-per-axis", "256", "--draws", "5", "--seed", "3")
    code, first, _ = run(capsys, *args)
    assert code == 0
    assert run(capsys, *args)[1] == first


def test_rates_config_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1\nd = 1\ngrid_per_axis = 256\nn_list = 4,8,16\nreps = 5\nseed = 2\n"
                   f"out_dir = {tmp_path / 'out'}\n")
    code, out, err = run(capsys, "rates", "--config", str(cfg), "--reps", "6", "--format", "csv")
    assert code == 0
    assert "n=16" in err
    recs = (tmp_path / "out" / "records.csv").read_text().splitlines()
    assert len(recs) == 1 + 3 * 6
    assert "p_hat,stderr_p,r2" in out


def test_rates_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1\nd = 1\nwidth = 3\n")
    code, _, err = run(capsys, "rates", "--config", str(cfg))
    assert code == 1
    assert "unknown key" in err


def test_rates_saturation_guard(capsys):
    code, _, err = run(capsys, "rates", "--alpha", "1", "--d", "1", "--grid-per-axis", "64", "--n-list", "4,8,16")
    assert code == 1
    assert "grid_per_axis" in err


def test_symcheck_small(capsys):
    code, out, _ = run(capsys, "symcheck", "--alpha", "1", "--d", "1", "--grid-per-axis", "256", "--n", "8",
                       "--samples", "4", "--sign-draws", "100")
    assert code == 0
    row = next(csv.DictReader(out.splitlines()))
    assert row["pass"] == "true"
