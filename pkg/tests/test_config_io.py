"""Configuration parsing, file formats and the command line front end."""

import math
import os
import struct

import numpy as np
import pytest
from PIL import Image

from gmnonlocal import (ConfigError, CsvSink, DiagnosticsConfig, Field, Grid,
                        GridMismatchError, ModelParams, default_functional_params,
                        parse_config, parse_config_file, read_diagnostics_csv,
                        read_snapshot, record_diagnostics, render_config,
                        render_heatmap, write_snapshot)
from gmnonlocal.cli import cli_main
from gmnonlocal.config import OUTPUT_DIR_ENV
from gmnonlocal.io import CSV_COLUMNS, CSV_SCHEMA_COMMENT, SNAPSHOT_MAGIC

REF = ModelParams.gm_reduction(b=0.5, d1=0.3, d2=30.0)


class TestParseDefaults:
    def test_empty_text_yields_reference_setup(self):
        cfg = parse_config("")
        assert cfg.model == REF
        assert (cfg.grid.nx, cfg.grid.ny) == (100, 100)
        assert (cfg.grid.lx, cfg.grid.ly) == (100.0, 100.0)
        assert cfg.stepper.operator_kind == "local"
        assert cfg.kernel is None
        # dt resolves from the explicit stability bound, 0.9 h^2 / (4 dmax).
        assert cfg.stepper.dt == pytest.approx(0.0075, rel=1e-12)
        assert cfg.stepper.record_every == 133
        fp = cfg.diagnostics.functional
        assert fp.alpha == pytest.approx(2.1, rel=1e-13)
        assert fp.a == pytest.approx(5.3025, rel=1e-13)
        assert cfg.diagnostics.lb_set == (2, 4)
        assert cfg.outputs.dir == "gm_runs" and cfg.outputs.enabled

    def test_one_dimensional_extent_defaults_to_unit(self):
        cfg = parse_config("[grid]\nnx = 64\nny = 1\nlx = 1.0\n")
        assert cfg.grid.ly == 1.0
        assert cfg.grid.dimension == 1

    def test_output_dir_from_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "elsewhere"))
        cfg = parse_config("")
        assert cfg.outputs.dir == str(tmp_path / "elsewhere")

    def test_explicit_dir_beats_environment(self, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, "ignored")
        cfg = parse_config("[outputs]\ndir = chosen\n")
        assert cfg.outputs.dir == "chosen"


class TestParseErrors:
    def test_unknown_section_named(self):
        with pytest.raises(ConfigError, match="solver"):
            parse_config("[solver]\ndt = 0.1\n")

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match=r"foo.*\[grid\]|\[grid\].*foo"):
            parse_config("[grid]\nfoo = 3\n")

    def test_type_error_cites_section_and_key(self):
        with pytest.raises(ConfigError, match=r"\[grid\] nx"):
            parse_config("[grid]\nnx = lots\n")

    def test_window_violation_cites_value(self):
        with pytest.raises(ConfigError, match="beta=2.5"):
            parse_config("[diagnostics]\nbeta = 2.5\n")

    def test_nonlocal_requires_kernel_section(self):
        with pytest.raises(ConfigError, match="kernel"):
            parse_config("[stepper]\noperator_kind = nonlocal\n")

    def test_kernel_section_requires_nonlocal(self):
        with pytest.raises(ConfigError, match="nonlocal"):
            parse_config("[kernel]\nfamily = gaussian\n")

    def test_gaussian_rejects_index(self):
        text = "[stepper]\noperator_kind = nonlocal\n[kernel]\nfamily = gaussian\nj = 4\n"
        with pytest.raises(ConfigError, match="rescaled_bump"):
            parse_config(text)

    def test_bump_requires_index(self):
        text = "[stepper]\noperator_kind = nonlocal\n[kernel]\nfamily = rescaled_bump\n"
        with pytest.raises(ConfigError, match="j is required"):
            parse_config(text)

    def test_unresolvable_kernel_reported_at_parse(self):
        text = ("[grid]\nnx = 8\nny = 1\nlx = 1.0\n"
                "[stepper]\noperator_kind = nonlocal\n"
                "[kernel]\nfamily = rescaled_bump\nj = 64\n")
        with pytest.raises(ConfigError, match=r"\[kernel\]"):
            parse_config(text)

    def test_keys_need_a_section(self):
        with pytest.raises(ConfigError):
            parse_config("nx = 8\n")


class TestRenderRoundTrip:
    NONLOCAL = (
        "[model]\nb1 = 0.5\nd1 = 0.3\nd2 = 30.0\n"
        "[grid]\nnx = 32\nny = 32\nlx = 32.0\nly = 32.0\n"
        "[ic]\nbase_u = 0.1\nbase_v = 0.1\nnoise_amp = 0.01\nrng_seed = 7\n"
        "[stepper]\noperator_kind = nonlocal\nt_end = 5.0\n"
        "[kernel]\nfamily = gaussian\nsigma = 0.6\n"
        "[outputs]\ndir = out\ncsv = true\n"
    )

    def test_canonical_form_is_a_fixed_point(self):
        cfg = parse_config(self.NONLOCAL)
        text = render_config(cfg)
        again = parse_config(text)
        assert again == cfg
        assert render_config(again) == text

    def test_render_covers_kernel_section_only_when_present(self):
        local = parse_config("")
        assert "[kernel]" not in render_config(local)
        nonlocal_cfg = parse_config(self.NONLOCAL)
        assert "[kernel]" in render_config(nonlocal_cfg)

    def test_file_round_trip(self, tmp_path):
        cfg = parse_config(self.NONLOCAL)
        path = tmp_path / "run.cfg"
        path.write_text(render_config(cfg))
        assert parse_config_file(str(path)) == cfg

    def test_missing_file_is_a_config_error(self):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config_file("/nonexistent/run.cfg")


class TestSnapshots:
    def test_round_trip_bit_exact(self, tmp_path):
        grid = Grid(12, 7, 3.0, 2.0)
        rng = np.random.default_rng(2)
        field = Field(grid, rng.uniform(0.1, 5.0, size=grid.n_cells))
        path = str(tmp_path / "field.gmf")
        write_snapshot(field, 1.25, path)
        back, t = read_snapshot(path, grid=grid)
        assert t == 1.25
        assert np.array_equal(back.values, field.values)
        assert back.values.dtype == np.float64

    def test_zero_time_preserved(self, tmp_path):
        grid = Grid(4, 1, 1.0, 1.0)
        path = str(tmp_path / "z.gmf")
        write_snapshot(Field.constant(grid, 1.0), 0.0, path)
        _, t = read_snapshot(path)
        assert t == 0.0

    def test_reader_synthesizes_unit_spacing_grid(self, tmp_path):
        grid = Grid(6, 3, 6.0, 3.0)
        path = str(tmp_path / "f.gmf")
        write_snapshot(Field.constant(grid, 2.0), 0.5, path)
        back, _ = read_snapshot(path)
        assert (back.grid.nx, back.grid.ny) == (6, 3)
        assert back.grid.hx == 1.0 and back.grid.hy == 1.0

    def test_grid_mismatch_rejected(self, tmp_path):
        grid = Grid(6, 3, 6.0, 3.0)
        path = str(tmp_path / "f.gmf")
        write_snapshot(Field.constant(grid, 2.0), 0.5, path)
        with pytest.raises(GridMismatchError):
            read_snapshot(path, grid=Grid(3, 6, 3.0, 6.0))

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.gmf"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 24)
        with pytest.raises(ValueError, match="magic"):
            read_snapshot(str(path))

    def test_truncated_payload_rejected(self, tmp_path):
        grid = Grid(4, 4, 1.0, 1.0)
        path = tmp_path / "t.gmf"
        write_snapshot(Field.constant(grid, 1.0), 0.0, str(path))
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(ValueError):
            read_snapshot(str(path))

    def test_trailing_bytes_rejected(self, tmp_path):
        grid = Grid(4, 4, 1.0, 1.0)
        path = tmp_path / "t.gmf"
        write_snapshot(Field.constant(grid, 1.0), 0.0, str(path))
        path.write_bytes(path.read_bytes() + b"junk")
        with pytest.raises(ValueError):
            read_snapshot(str(path))


class TestDiagnosticsCsv:
    def _series(self, grid):
        dcfg = DiagnosticsConfig(default_functional_params(REF), lb_set=(2, 4))
        rng = np.random.default_rng(5)
        for t in (0.0, 0.5, 1.0):
            u = Field(grid, rng.uniform(0.5, 2.0, size=grid.n_cells))
            v = Field(grid, rng.uniform(0.5, 2.0, size=grid.n_cells))
            yield record_diagnostics(t, u, v, dcfg)

    def test_schema_and_round_trip(self, tmp_path):
        grid = Grid(6, 6, 6.0, 6.0)
        path = str(tmp_path / "diag.csv")
        records = list(self._series(grid))
        with CsvSink(path) as sink:
            for rec in records:
                sink(rec)
        lines = open(path).read().splitlines()
        assert lines[0] == CSV_SCHEMA_COMMENT
        assert lines[1] == ",".join(CSV_COLUMNS)
        data = read_diagnostics_csv(path)
        assert data["t"].tolist() == [0.0, 0.5, 1.0]
        # repr-formatted floats survive the round trip exactly.
        assert data["y"][2] == records[2].y
        assert data["l4_v"][1] == records[1].lb_norms[4][1]
        assert data["Yj_u"].tolist() == [0.0, 0.0, 0.0]

    def test_requires_both_reference_orders(self, tmp_path):
        with pytest.raises(ValueError):
            CsvSink(str(tmp_path / "d.csv"), lb_set=(2,))


class TestHeatmaps:
    def test_constant_field_renders_single_color(self, tmp_path):
        grid = Grid(8, 5, 8.0, 5.0)
        path = str(tmp_path / "c.png")
        render_heatmap(Field.constant(grid, 3.0), path)
        img = np.asarray(Image.open(path).convert("RGB"))
        assert img.shape == (5, 8, 3)
        assert (img == img[0, 0]).all()

    def test_hot_cell_stands_out_and_metadata_recorded(self, tmp_path):
        grid = Grid(2, 2, 2.0, 2.0)
        field = Field(grid, [0.0, 0.0, 0.0, 1.0])
        path = str(tmp_path / "h.png")
        render_heatmap(field, path, t=2.5)
        img = Image.open(path)
        arr = np.asarray(img.convert("RGB"))
        # Flat index 3 is (iy=1, ix=1); the image is flipped so y points up.
        assert not (arr[0, 1] == arr[1, 0]).all()
        assert float(img.text["field_min"]) == 0.0
        assert float(img.text["field_max"]) == 1.0
        assert float(img.text["time"]) == 2.5

    def test_scale_multiplies_pixels(self, tmp_path):
        grid = Grid(4, 3, 4.0, 3.0)
        path = str(tmp_path / "s.png")
        render_heatmap(Field.constant(grid, 1.0), path, scale=3)
        assert Image.open(path).size == (12, 9)


class TestCli:
    TINY = ("[grid]\nnx = 12\nny = 12\nlx = 12.0\nly = 12.0\n"
            "[stepper]\nt_end = 0.1\n")

    def test_help_exits_zero(self, capsys):
        assert cli_main(["--help"]) == 0
        assert "simulate" in capsys.readouterr().out

    def test_simulate_happy_path(self, tmp_path, capsys):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text(self.TINY)
        out_dir = tmp_path / "out"
        rc = cli_main(["simulate", "--config", str(cfg_path),
                       "--output", str(out_dir), "--quiet"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "finished" in captured.out
        names = sorted(os.listdir(out_dir))
        assert "manifest.cfg" in names and "u_final.gmf" in names

    def test_simulate_bad_config_exits_one(self, tmp_path, capsys):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text("[grid]\nnx = -4\n")
        rc = cli_main(["simulate", "--config", str(cfg_path)])
        captured = capsys.readouterr()
        assert rc == 1
        assert "error:" in captured.err

    def test_simulate_abort_exits_two(self, tmp_path, capsys):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text("[grid]\nnx = 16\nny = 16\nlx = 16.0\nly = 16.0\n"
                            "[stepper]\ndt = 1.0\nt_end = 5.0\n")
        rc = cli_main(["simulate", "--config", str(cfg_path)])
        captured = capsys.readouterr()
        assert rc == 2
        assert "aborted:" in captured.err

    def test_turing_check_reports(self, capsys):
        assert cli_main(["turing-check", "--b", "0.5"]) == 0
        out = capsys.readouterr().out
        assert "satisfied" in out
        assert cli_main(["turing-check", "--b", "2.0", "--machine"]) == 0
        out = capsys.readouterr().out
        assert "cond1=false" in out

    def test_diffusive_limit_subcommand(self, capsys):
        rc = cli_main(["diffusive-limit", "--j", "4,8", "--t-end", "0.05",
                       "--dim", "1", "--cells", "32"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "4" in out and "8" in out

    def test_diffusive_limit_self_test(self, capsys):
        rc = cli_main(["diffusive-limit", "--j", "4", "--t-end", "0.05",
                       "--dim", "1", "--cells", "32", "--self-test"])
        assert rc == 0

    def test_sweep_subcommand(self, tmp_path, capsys):
        rc = cli_main(["sweep", "--sigmas", "0.6", "--size", "16",
                       "--extent", "16.0", "--t-end", "0.2", "--quiet"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "sigma" in out

    def test_sweep_all_failures_exits_two(self, capsys):
        rc = cli_main(["sweep", "--sigmas", "-1.0", "--size", "16",
                       "--extent", "16.0", "--t-end", "0.2", "--quiet"])
        assert rc == 2

    def test_render_subcommand(self, tmp_path, capsys):
        grid = Grid(6, 6, 6.0, 6.0)
        snap = str(tmp_path / "f.gmf")
        write_snapshot(Field.constant(grid, 1.0), 0.0, snap)
        png = str(tmp_path / "f.png")
        assert cli_main(["render", "--snapshot", snap, "--out", png]) == 0
        assert os.path.exists(png)

    def test_unknown_subcommand_exits_one(self, capsys):
        assert cli_main(["conjure"]) == 1
