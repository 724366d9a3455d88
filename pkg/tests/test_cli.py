import pytest

from app.commands import cli_main
from app.data.csv_io import read_table, write_csv
from app.data.sidecar import read_sidecar
from app.regression import fit_ols
from config import DEFAULTS

DUMMIES = "bus,leased_land,south_road"


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for key in DEFAULTS:
        monkeypatch.delenv(key, raising=False)


@pytest.fixture
def housing_csv(tmp_path, small_housing):
    path = tmp_path / "in.csv"
    write_csv(small_housing, path)
    return path


def run(*argv):
    return cli_main([str(arg) for arg in argv])


def output_pairs(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def perturb_args(source, target, *extra):
    return ["perturb", "--response", "price", "--dummies", DUMMIES, *extra, source, target]


class TestPerturbCommand:
    def test_writes_release_and_sidecar(self, tmp_path, housing_csv):
        """The release keeps every row and the sidecar records the disclosed seed."""
        out = tmp_path / "out.csv"
        status = run(*perturb_args(housing_csv, out, "--a", "-2", "--b", "1.0", "--seed", "42", "--disclose-seed"))
        assert status == 0
        assert len(read_table(out)) == len(read_table(housing_csv))
        metadata = read_sidecar(f"{out}.meta")
        assert metadata["seed"] == "42"
        assert metadata["b"] == "1.0"
        assert metadata["mode"] == "standard"

    def test_same_seed_same_bytes(self, tmp_path, housing_csv):
        """Two runs with one seed write identical files."""
        first, second = tmp_path / "first.csv", tmp_path / "second.csv"
        assert run(*perturb_args(housing_csv, first, "--seed", "7")) == 0
        assert run(*perturb_args(housing_csv, second, "--seed", "7")) == 0
        assert first.read_bytes() == second.read_bytes()
        assert (tmp_path / "first.csv.meta").read_bytes() == (tmp_path / "second.csv.meta").read_bytes()

    def test_positivity_failure_exit_status(self, tmp_path, outlier_housing, capsys):
        """b = 0 on a row with y > 2 y_hat cannot stay positive."""
        source = tmp_path / "outlier.csv"
        write_csv(outlier_housing, source)
        out = tmp_path / "out.csv"
        status = run(*perturb_args(source, out, "--b", "0", "--positivity", "required"))
        assert status == 5
        assert "error=POSITIVITY_UNACHIEVABLE" in capsys.readouterr().err
        assert not out.exists()

    def test_sidecar_failure_leaves_no_release(self, tmp_path, housing_csv, monkeypatch):
        """If the sidecar cannot be written, the release is not written either."""
        def broken_sidecar(path, metadata):
            raise OSError("disk full")

        monkeypatch.setattr("app.commands.perturb.write_sidecar", broken_sidecar)
        with pytest.raises(OSError):
            run(*perturb_args(housing_csv, tmp_path / "out.csv"))
        assert [path.name for path in tmp_path.iterdir()] == ["in.csv"]

    def test_unknown_response(self, tmp_path, housing_csv, capsys):
        """A response missing from the header is a data error."""
        status = run("perturb", "--response", "rent", housing_csv, tmp_path / "out.csv")
        assert status == 3
        assert "error=SCHEMA_MISMATCH" in capsys.readouterr().err


class TestUsageErrors:
    def test_missing_arguments(self, capsys):
        """argparse errors exit 2 with a machine-readable line."""
        assert run("perturb") == 2
        assert "error=INVALID_PARAMETERS" in capsys.readouterr().err

    def test_unknown_command(self, capsys):
        """An unknown subcommand is a usage error."""
        assert run("publish") == 2
        assert "error=INVALID_PARAMETERS" in capsys.readouterr().err

    def test_invalid_noise_parameter(self, tmp_path, housing_csv, capsys):
        """a = 0 is rejected before any file is written."""
        assert run(*perturb_args(housing_csv, tmp_path / "out.csv", "--a", "0")) == 2
        assert "error=INVALID_PARAMETERS" in capsys.readouterr().err


class TestConfiguration:
    def test_config_file_overrides_environment(self, tmp_path, housing_csv, monkeypatch):
        """A --config value beats the environment."""
        monkeypatch.setenv("NOISE_B", "2.0")
        config = tmp_path / "run.env"
        config.write_text("NOISE_B=0.5\n")
        out = tmp_path / "out.csv"
        assert run("--config", config, *perturb_args(housing_csv, out)) == 0
        assert read_sidecar(f"{out}.meta")["b"] == "0.5"

    def test_environment_overrides_default(self, tmp_path, housing_csv, monkeypatch):
        """The environment beats the built-in default."""
        monkeypatch.setenv("NOISE_B", "2.0")
        out = tmp_path / "out.csv"
        assert run(*perturb_args(housing_csv, out)) == 0
        assert read_sidecar(f"{out}.meta")["b"] == "2.0"

    def test_flag_overrides_config_file(self, tmp_path, housing_csv):
        """A command-line flag beats every other source."""
        config = tmp_path / "run.env"
        config.write_text("NOISE_B=0.5\n")
        out = tmp_path / "out.csv"
        assert run("--config", config, *perturb_args(housing_csv, out, "--b", "1.5")) == 0
        assert read_sidecar(f"{out}.meta")["b"] == "1.5"

    def test_resolved_config_shown_at_any_log_level(self, monkeypatch, capsys):
        """Every setting and its source reach stderr even with LOG_LEVEL=WARNING."""
        monkeypatch.setenv("LOG_LEVEL", "WARNING")
        assert run("theory-table") == 0
        err = capsys.readouterr().err.splitlines()
        assert "config.LOG_LEVEL=WARNING source=environment" in err
        assert "config.NOISE_B=1.0 source=default" in err
        assert sum(line.startswith("config.") for line in err) == len(DEFAULTS)

    def test_missing_config_file(self, tmp_path, housing_csv):
        """A --config path that does not exist is a data error."""
        assert run("--config", tmp_path / "absent.env", *perturb_args(housing_csv, tmp_path / "out.csv")) == 3

    def test_bad_config_value(self, tmp_path, housing_csv, monkeypatch):
        """A value that does not convert is a usage error."""
        monkeypatch.setenv("NOISE_MAX_RETRIES", "many")
        assert run(*perturb_args(housing_csv, tmp_path / "out.csv")) == 2


class TestVerifyCommand:
    def test_release_verifies(self, tmp_path, housing_csv, capsys):
        """A release written at full precision passes every check."""
        out = tmp_path / "out.csv"
        assert run(*perturb_args(housing_csv, out, "--seed", "3")) == 0
        capsys.readouterr()
        assert run("verify", housing_csv, out, f"{out}.meta") == 0
        assert output_pairs(capsys.readouterr().out)["passed"] == "true"

    def test_edited_release_fails(self, tmp_path, housing_csv, capsys):
        """Changing released prices breaks the invariances."""
        out = tmp_path / "out.csv"
        assert run(*perturb_args(housing_csv, out, "--seed", "3")) == 0
        table = read_table(out)
        table["price"] = [str(float(value) * 1.01) for value in table["price"]]
        table.to_csv(out, index=False)
        capsys.readouterr()
        assert run("verify", housing_csv, out, f"{out}.meta") == 1
        assert output_pairs(capsys.readouterr().out)["passed"] == "false"


class TestRestoreCommand:
    def test_recovers_original_statistics(self, tmp_path, housing_csv, small_housing, capsys):
        """sqrt(2) t~ and 2 R~^2 / (1 + R~^2) give back the original fit."""
        out = tmp_path / "out.csv"
        assert run(*perturb_args(housing_csv, out, "--reduced-accuracy", "--b", "1", "--seed", "5")) == 0
        capsys.readouterr()
        assert run("restore", f"{out}.meta") == 0
        pairs = output_pairs(capsys.readouterr().out)
        original = fit_ols(small_housing)
        assert float(pairs["r_squared"]) == pytest.approx(original.r_squared, rel=1e-9)
        assert float(pairs["t_value.floor_area"]) == pytest.approx(original.t_values[4], rel=1e-8)

    def test_standard_release_has_nothing_to_restore(self, tmp_path, housing_csv):
        """Restore needs a reduced-accuracy sidecar."""
        out = tmp_path / "out.csv"
        assert run(*perturb_args(housing_csv, out)) == 0
        assert run("restore", f"{out}.meta") == 2


class TestTheoryTableCommand:
    def test_published_cell(self, capsys):
        """R^2 = 0.8 and b = 1 gives a correlation of 0.80."""
        assert run("theory-table") == 0
        lines = capsys.readouterr().out.splitlines()
        header = lines[0].split(",")
        assert header[0] == "R2\\b"
        row = next(line.split(",") for line in lines[1:] if line.startswith("0.8,"))
        assert row[header.index("1")] == "0.80"

    def test_custom_grid(self, capsys):
        """Grids come from comma lists."""
        assert run("theory-table", "--r2", "0.5", "--b", "0,3", "--decimals", "3") == 0
        assert capsys.readouterr().out.splitlines() == ["R2\\b,0,3", "0.5,0.000,0.750"]


class TestOtherCommands:
    def test_fit(self, housing_csv, small_housing, capsys):
        """fit prints R^2 and one coefficient per design column."""
        assert run("fit", "--response", "price", "--dummies", DUMMIES, housing_csv) == 0
        pairs = output_pairs(capsys.readouterr().out)
        assert float(pairs["r_squared"]) == pytest.approx(fit_ols(small_housing).r_squared, rel=1e-12)
        assert "beta.intercept" in pairs and "t_value.south_road" in pairs

    def test_chow_same_file(self, housing_csv, capsys):
        """A file compared with itself has F = 0."""
        assert run("chow", "--response", "price", housing_csv, housing_csv) == 0
        pairs = output_pairs(capsys.readouterr().out)
        assert float(pairs["f_value"]) < 1e-9
        assert pairs["accepted"] == "true"

    def test_synth(self, tmp_path, capsys):
        """synth writes the requested rows and can describe them."""
        out = tmp_path / "synth.csv"
        assert run("synth", out, "--n", "150", "--seed", "2", "--describe") == 0
        table = read_table(out)
        assert len(table) == 150
        assert list(table.columns)[-1] == "price"
        assert capsys.readouterr().out.startswith("column,min,max,mean,sd")

    def test_quasi(self, tmp_path, housing_csv, capsys):
        """quasi prints the correlation matrix and writes the boxplot."""
        plot = tmp_path / "quasi.png"
        assert run("quasi", housing_csv, "--response", "price", "--count", "2", "--seed", "1",
                   "--plot", plot) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == ",original,quasi1,quasi2"
        assert plot.stat().st_size > 0

    def test_quasi_scatter(self, tmp_path, housing_csv):
        """quasi --scatter writes the pairwise scatterplot matrix."""
        scatter = tmp_path / "scatter.png"
        assert run("quasi", housing_csv, "--response", "price", "--count", "4", "--seed", "1",
                   "--scatter", scatter) == 0
        assert scatter.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        assert sorted(path.name for path in tmp_path.iterdir()) == ["in.csv", "scatter.png"]

    def test_calibrate(self, tmp_path, housing_csv, capsys):
        """A small sweep prints the table, writes its side outputs and recommends a b."""
        percentiles, plot = tmp_path / "f.csv", tmp_path / "f.png"
        status = run("calibrate", housing_csv, "--response", "price", "--dummies", DUMMIES,
                     "--q", "0.2,0.5", "--b", "0.5:1.0", "--trials", "3", "--seed", "8",
                     "--percentiles", percentiles, "--plot", plot, "--plot-q", "0.5")
        assert status == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "b\\q,0.20,0.50"
        assert output_pairs(out)["recommended_b"] == "0.5"
        assert read_table(percentiles).columns.tolist() == ["b", "q", "p5", "p10", "p50", "p90", "p95"]
        assert plot.stat().st_size > 0

    def test_calibrate_plot_q_off_grid(self, tmp_path, housing_csv):
        """The charted q must be on the grid."""
        status = run("calibrate", housing_csv, "--response", "price", "--q", "0.2", "--b", "1.0",
                     "--trials", "2", "--plot", tmp_path / "f.png", "--plot-q", "0.3")
        assert status == 2
