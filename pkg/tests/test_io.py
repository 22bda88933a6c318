"""Tests for CSV, manifest and error-report files."""

import numpy as np
import pytest

from isothermal_collapse import numerics_config
from isothermal_collapse.exceptions import InvalidInput, InvalidParameters
from isothermal_collapse.flow_field import evaluate, trace
from isothermal_collapse.io import (
    export_density,
    export_trace,
    export_velocity,
    load_json,
    load_manifest,
    read_csv,
    write_csv,
    write_error,
    write_json,
)


class TestCsv:
    def test_preamble_header_and_rows(self, tmp_path):
        path = write_csv(tmp_path / "a" / "t.csv", {"x": [0.1, 2.0], "name": ["p", "q"]}, {"m": 2, "beta": -1.0})
        metadata, columns = read_csv(path)
        assert metadata == {"m": "2", "beta": "-1.0"}
        assert columns == {"x": ["0.1", "2.0"], "name": ["p", "q"]}

    def test_floats_keep_full_precision(self, tmp_path):
        value = 1.0 / 3.0
        path = write_csv(tmp_path / "p.csv", {"v": np.array([value])})
        _, columns = read_csv(path)
        assert float(columns["v"][0]) == value

    def test_none_written_empty(self, tmp_path):
        _, columns = read_csv(write_csv(tmp_path / "n.csv", {"v": [None, 1]}))
        assert columns["v"] == ["", "1"]

    def test_unequal_columns(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "bad.csv", {"a": [1, 2], "b": [1]})

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# only: metadata\n", encoding="utf-8")
        assert read_csv(path) == ({"only": "metadata"}, {})


class TestManifest:
    def test_load_reproduces_solution(self, sol_m2, manifest_m2):
        loaded = load_manifest(manifest_m2)
        t = np.array([-1.0, 0.0, 0.5, 2.0])
        r = np.array([0.3, 1.0, 0.9, 7.0])
        for got, expected in zip(evaluate(loaded, t, r), evaluate(sol_m2, t, r)):
            assert np.array_equal(got, expected)
        assert loaded.density.C_minus == sol_m2.density.C_minus

    def test_rejects_wrong_schema(self, tmp_path):
        path = write_json(tmp_path / "other.json", {"schema": "other"})
        with pytest.raises(InvalidInput):
            load_manifest(path)

    def test_rejects_non_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(InvalidInput):
            load_manifest(path)


class TestErrorReport:
    def test_write_error(self, tmp_path):
        path = write_error(tmp_path, InvalidParameters("β out of (−m,0): beta=-2.5"), "inspect")
        data = load_json(path)
        assert path.name == "error.json"
        assert data["schema"] == numerics_config.ERROR_SCHEMA
        assert data["error"] == "InvalidParameters"
        assert data["exit_code"] == 2
        assert data["command"] == "inspect"
        assert data["message"].startswith("β out of (−m,0)")


class TestExports:
    def test_velocity_csv(self, sol_m2, out_dir):
        metadata, columns = read_csv(export_velocity(sol_m2, out_dir))
        assert list(columns) == ["branch", "xi", "U", "dU"]
        assert set(columns["branch"]) == {"kink", "hat", "tilde"}
        assert float(metadata["u_star"]) == sol_m2.u_star
        assert float(metadata["xi_s"]) == sol_m2.xi_s

    def test_density_csv(self, sol_m2, out_dir):
        metadata, columns = read_csv(export_density(sol_m2, out_dir))
        assert list(columns) == ["branch", "sgn_t", "xi", "Omega", "dOmega"]
        for name, branch, sign in (
            ("kink", sol_m2.density.kink, "-1"),
            ("hat_neg", sol_m2.density.hat_neg, "-1"),
            ("hat_pos", sol_m2.density.hat_pos, "1"),
            ("tilde", sol_m2.density.tilde, "1"),
        ):
            rows = [i for i, b in enumerate(columns["branch"]) if b == name]
            assert len(rows) == branch.grid.size
            assert {columns["sgn_t"][i] for i in rows} == {sign}
        assert float(metadata["C_minus"]) == sol_m2.density.C_minus

    def test_trace_csv(self, sol_m2, out_dir):
        path_trace = trace(sol_m2, "particle", -1.0, 1.0, 1.0)
        metadata, columns = read_csv(export_trace(out_dir / "trace.csv", sol_m2, path_trace))
        assert list(columns) == ["t", "r"]
        assert len(columns["t"]) == path_trace.t.size
        assert "crossing_0" in metadata
        assert metadata["kind"] == "particle"
