import dataclasses

import numpy as np
import pytest

import qdiode.cli.sweep as sweep_mod
from qdiode.cli import (
    FIGURE_IDS,
    ResultTable,
    emit,
    figure_preset,
    load_config,
    parse_preparation,
    parse_run_config,
    read_table,
    run_sweep,
)
from qdiode.cli.emit import to_csv
from qdiode.cli.main import main
from qdiode.errors import (
    EmptyTable,
    NonConvergence,
    ParseError,
    UnknownFigure,
    UnsupportedFormat,
    ValidationError,
)
from qdiode.solver import AllExcited, AllGround, ClassicalWeights, ProductPure, WeakBathLimit

BASE = """\
n_aux = 1
omega_left = 5.0
omega_right = 3.0
omega_aux = 2.0
g_lr = 1.0
g_la = 0.5
gamma = 0.001
temp_left = 2.0
temp_right = 1.0
"""

TIME_DOC = BASE + """
[sweep]
parameter = "time"
min = 0.0
max = 400.0
count = 3

[[sweep.series]]
label = "pure"
preparation = "pure:0.5"

[[sweep.series]]
label = "mixed"
preparation = "fractions:0.5"
"""

TEMP_DOC = BASE + """
[sweep]
parameter = "temp_left"
values = [0.5, 1.0, 1.5]
preparation = "excited"
"""


class TestRunDocuments:
    def test_time_sweep(self):
        spec = parse_run_config(TIME_DOC, name="fig3")
        assert spec.parameter == "time" and spec.values == (0.0, 200.0, 400.0)
        assert [s.label for s in spec.series] == ["pure", "mixed"]
        assert isinstance(spec.series[0].preparation, ProductPure)
        assert spec.plot == "q_l_forward" and spec.base.omega_left == 5.0

    def test_missing_field_is_named(self):
        doc = TEMP_DOC.replace("temp_right = 1.0\n", "")
        with pytest.raises(ValidationError) as err:
            parse_run_config(doc)
        assert any("temp_right" in p for p in err.value.problems)

    def test_grid_points_are_prevalidated(self):
        # omega_left = 4.5 is fine at the base point but the n_aux = 3 point is not
        doc = BASE.replace("omega_left = 5.0", "omega_left = 4.5") + """
[sweep]
parameter = "n_aux"
values = [0, 1, 2, 3]
"""
        with pytest.raises(ValidationError) as err:
            parse_run_config(doc)
        assert any("n_aux=3" in p for p in err.value.problems)
        assert not any("n_aux=1" in p for p in err.value.problems)

    @pytest.mark.parametrize("snippet,exc", [
        ('temp_left = "hot"', ParseError),
        ("temp_left = ", ParseError),
        ("bogus_field = 1.0", ValidationError),
    ])
    def test_bad_documents(self, snippet, exc):
        doc = TEMP_DOC.replace("temp_left = 2.0", snippet)
        with pytest.raises(exc):
            parse_run_config(doc)

    def test_sweep_section_required(self):
        with pytest.raises(ValidationError, match="sweep"):
            parse_run_config(BASE)
        assert load_config(BASE).temp_left == 2.0

    def test_grid_rules(self):
        with pytest.raises(ValidationError):
            parse_run_config(TEMP_DOC.replace("values = [0.5, 1.0, 1.5]", "values = [0.5]"))
        with pytest.raises(ValidationError):
            parse_run_config(TEMP_DOC.replace('parameter = "temp_left"', 'parameter = "p_1"'))
        with pytest.raises(ValidationError):
            parse_run_config(TEMP_DOC.replace('parameter = "temp_left"', 'parameter = "gamma"'))

    def test_aux_bath_table(self):
        doc = BASE + "\n[aux_bath]\ngamma_aux = 1e-6\ntemp_aux = 0.8\n"
        assert load_config(doc).aux_bath.temp_aux == 0.8
        with pytest.raises(ValidationError):
            load_config(BASE + "\n[aux_bath]\ngamma_aux = 1e-6\n")


class TestPreparationParser:
    def test_kinds(self):
        assert parse_preparation("excited") == AllExcited()
        assert parse_preparation("Ground") == AllGround()
        assert parse_preparation("none") is None
        assert parse_preparation("weights:0.25,0.75") == ClassicalWeights((0.25, 0.75))
        assert parse_preparation("fractions:0.5").weights == (0.5, 0.5)
        assert isinstance(parse_preparation("pure:0.5"), ProductPure)
        assert parse_preparation("weak:0.8") == WeakBathLimit(0.8)

    @pytest.mark.parametrize("text", ["hot", "weights:0.5,0.6", "fractions:abc", "excited:1", "weak:1,2"])
    def test_rejects(self, text):
        with pytest.raises(ValidationError):
            parse_preparation(text)


def _table(n=3):
    rows = np.column_stack([np.linspace(0.1, 0.3, n), np.arange(n), np.pi * np.arange(n) / 7])
    return ResultTable(("x", "series_id", "y"), rows, (("tool", "qdiode"), ("note", "a: b")))


class TestTables:
    def test_csv_layout(self):
        text = to_csv(_table())
        body = [ln for ln in text.splitlines() if not ln.startswith("#")]
        assert len(body) == 4 and body[0] == "x,series_id,y"
        assert text.startswith("# tool: qdiode\n# note: a: b\n")

    def test_round_trip_is_exact(self):
        table = _table(5)
        assert read_table(to_csv(table)) == table

    def test_emit_errors(self):
        with pytest.raises(UnsupportedFormat):
            emit(_table(), "png")
        with pytest.raises(EmptyTable):
            emit(ResultTable(("a",), np.zeros((0, 1))), "csv")

    def test_rejects_non_finite_and_ragged(self):
        with pytest.raises(ValueError):
            ResultTable(("a",), [[np.nan]])
        with pytest.raises(ParseError):
            read_table("a,b\n1,2,3\n")
        with pytest.raises(ParseError):
            read_table("a,b\n1,x\n")


class TestPresets:
    def test_every_preset_builds(self):
        for fid in FIGURE_IDS:
            spec = figure_preset(fid)
            assert len(spec.values) >= 2 and spec.series
        with pytest.raises(UnknownFigure):
            figure_preset("9")

    def test_assumed_parameters_are_noted(self):
        for fid in ("p1", "5a", "5b", "3", "8"):
            table = run_sweep(dataclasses.replace(figure_preset(fid), values=figure_preset(fid).values[:2]))
            assert table.meta("note") is not None, fid

    def test_symmetric_no_aux_series_has_zero_rectification(self):
        spec = figure_preset("4")
        spec = dataclasses.replace(spec, values=spec.values[::30], series=spec.series[:1])
        table = run_sweep(spec)
        assert np.all(np.abs(table.column("rectification")) < 1e-12)

    def test_equilibrium_rows_have_zero_current(self):
        spec = figure_preset("2c")
        spec = dataclasses.replace(spec, values=(0.5, 0.6), series=spec.series[:3])
        table = run_sweep(spec)
        at_eq = table.rows[table.column("sweep_value") == 0.5]
        assert len(at_eq) == 3
        assert np.all(np.abs(at_eq[:, 2:5]) < 1e-14 * spec.base.gamma)
        assert np.all(at_eq[:, 5] == 0.0)

    def test_threads_do_not_change_results(self):
        spec = dataclasses.replace(figure_preset("7"), values=figure_preset("7").values[:6])
        assert run_sweep(spec) == run_sweep(spec, threads=4)

    def test_failing_point_reports_coordinate(self, monkeypatch):
        real = sweep_mod.steady_state

        def flaky(cfg, prep=None):
            if cfg.omega_right == 4.5:
                raise NonConvergence("stalled")
            return real(cfg, prep)

        monkeypatch.setattr(sweep_mod, "steady_state", flaky)
        spec = dataclasses.replace(figure_preset("6"), values=(4.0, 4.5))
        with pytest.raises(NonConvergence) as err:
            run_sweep(spec)
        assert err.value.sweep_point == "series 'N=0', omega_right=4.5"
        assert str(err.value).endswith("stalled")


class TestMain:
    def test_figure_svg_marks_zero_crossings(self, tmp_path):
        out = tmp_path / "fig6.svg"
        assert main(["figure", "6", "--format", "svg", "--out", str(out)]) == 0
        svg = out.read_text()
        assert svg.lstrip().startswith("<?xml") and "zero-crossing-" in svg
        table = read_table((tmp_path / "fig6.csv").read_text())
        assert table.meta("preset") == "6" and len(table) > 0

    def test_steady_csv_and_plain(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text(BASE)
        out = tmp_path / "steady.csv"
        assert main(["steady", str(cfg), "--weights", "excited", "--out", str(out)]) == 0
        table = read_table(out.read_text())
        assert table.columns[0] == "subspace" and len(table) == 2
        assert float(table.meta("q_left")) == -float(table.meta("q_right"))
        assert main(["steady", str(cfg), "--format", "plain"]) == 0
        assert "Q_L =" in capsys.readouterr().out

    def test_evolve(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text(BASE)
        out = tmp_path / "traj.csv"
        assert main(["evolve", str(cfg), "--t-final", "100", "--count", "3", "--weights", "pure:0.5",
                     "--out", str(out)]) == 0
        table = read_table(out.read_text())
        assert table.columns == ("time", "q_left", "q_right", "max_coherence") and len(table) == 3

    def test_sweep_document(self, tmp_path):
        doc = tmp_path / "t.toml"
        doc.write_text(TEMP_DOC)
        out = tmp_path / "t.csv"
        assert main(["sweep", str(doc), "--out", str(out)]) == 0
        assert len(read_table(out.read_text())) == 3

    def test_exit_codes(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text(BASE.replace("temp_right = 1.0\n", "temp_rihgt = 1.0\n"))
        assert main(["steady", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "temp_right" in err and "temp_rihgt" in err
        assert main(["steady", str(tmp_path / "missing.toml")]) == 1
        assert main(["figure", "nope"]) == 1
        with pytest.raises(SystemExit):
            main(["figure", "6", "--threads", "0"])
