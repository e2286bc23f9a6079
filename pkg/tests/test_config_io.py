"""Config parsing/validation round trips, diagnostics tables, snapshots."""

import numpy as np
import pytest

from nlcflow.config import ConfigError, RunConfig, dumps, load_config, loads, save_config
from nlcflow.dynamics import SolverConfig, State, run
from nlcflow.grid import Field, Grid
from nlcflow.initial import make_initial
from nlcflow.io import (
    DIAGNOSTICS_HEADER,
    SnapshotError,
    read_diagnostics,
    read_snapshot,
    write_diagnostics,
    write_snapshot,
)
from nlcflow.monitor import CriterionMonitor


class TestConfig:
    def test_empty_document_gets_defaults(self):
        cfg = loads("")
        assert cfg.solver.scheme == "imex1"
        assert cfg.solver.dealias_on is True
        assert cfg.solver.renormalize_every == 1
        assert cfg.grid.n == 32

    def test_minimal_document(self):
        cfg = loads("solver: {dt: 0.01, t_end: 0.1}\ninitial: {name: helical}")
        assert cfg.solver.dt == 0.01
        assert cfg.initial.name == "helical"

    def test_dt_validation_names_field(self):
        with pytest.raises(ConfigError, match="solver.dt"):
            loads("solver: {dt: -1.0}")

    @pytest.mark.parametrize("doc,field", [
        ("grid: {dim: 4}", "grid.dim"),
        ("grid: {n: 12}", "grid.n"),
        ("solver: {nu: 0}", "solver.nu"),
        ("solver: {scheme: rk4}", "solver.scheme"),
        ("solver: {renormalize_every: 0}", "solver.renormalize_every"),
        ("initial: {name: bogus}", "initial.name"),
        ("outputs: {snapshot_every: -1}", "outputs.snapshot_every"),
    ])
    def test_validation_failures(self, doc, field):
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            loads(doc)

    def test_unknown_section_and_field(self):
        with pytest.raises(ConfigError, match="physics"):
            loads("physics: {}")
        with pytest.raises(ConfigError, match="solver.timestep"):
            loads("solver: {timestep: 0.1}")

    def test_parse_error(self):
        with pytest.raises(ConfigError, match="parse"):
            loads("solver: {dt: [unclosed")

    def test_round_trip(self, tmp_path):
        cfg = loads(
            "grid: {dim: 3, n: 16}\n"
            "solver: {nu: 0.5, dt: 0.002, t_end: 0.1, scheme: sbdf2}\n"
            "initial: {name: random_smooth, parameters: {amplitude_u: 0.7}, seed: 3}\n"
            "outputs: {diagnostics: d.csv, snapshot_every: 5, snapshot_prefix: s}\n"
        )
        path = tmp_path / "cfg.yaml"
        save_config(cfg, path)
        assert load_config(path) == cfg
        assert loads(dumps(cfg)) == cfg

    def test_builders(self):
        cfg = loads("grid: {dim: 3, n: 16}\ninitial: {name: helical, parameters: {m: 2}}")
        grid = cfg.build_grid()
        assert grid == Grid(3, 16)
        solver = cfg.build_solver()
        assert isinstance(solver, SolverConfig)
        st = cfg.build_state(grid)
        assert st.d.components == 3

    def test_seed_flows_to_random_initial(self):
        c1 = loads("initial: {name: random_smooth, seed: 5}")
        c2 = loads("initial: {name: random_smooth, seed: 6}")
        s1, s2 = c1.build_state(), c2.build_state()
        assert not np.array_equal(s1.u.values, s2.u.values)

    def test_unwritable_output_dir(self):
        with pytest.raises(ConfigError, match="outputs.diagnostics"):
            loads("outputs: {diagnostics: /nonexistent_dir_xyz/d.csv}")


class TestDiagnosticsTable:
    def _records(self, n=4):
        grid = Grid(3, 16)
        st = make_initial("helical", {"m": 1}, grid)
        res = run(st, SolverConfig(nu=1.0, dt=1e-3, t_end=n * 1e-3, diagnostics_every=1))
        return res.records

    def test_header_only_for_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_diagnostics([], path)
        assert path.read_text().strip() == ",".join(DIAGNOSTICS_HEADER)
        assert read_diagnostics(path) == []

    def test_round_trip_exact(self, tmp_path):
        records = self._records()
        path = tmp_path / "diag.csv"
        write_diagnostics(records, path)
        back = read_diagnostics(path)
        assert back == records  # float64 survives the 17-digit text round trip

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            read_diagnostics(path)


class TestSnapshot:
    def test_round_trip_bit_exact(self, tmp_path):
        st = make_initial("random_smooth", {"seed": 2}, Grid(2, 16))
        path = tmp_path / "state.nlcf"
        write_snapshot(st, path)
        back = read_snapshot(path)
        assert back.grid == st.grid
        assert np.array_equal(back.u.values, st.u.values)
        assert np.array_equal(back.d.values, st.d.values)
        assert back.t == 0.0

    def test_reader_is_self_describing(self, tmp_path):
        st = make_initial("helical", {"m": 1}, Grid(3, 16, length=4.0))
        path = tmp_path / "state.nlcf"
        write_snapshot(st, path)
        back = read_snapshot(path)
        assert back.grid.length == 4.0
        assert back.grid.dim == 3

    def test_rediagnosed_records_match(self, tmp_path):
        grid = Grid(3, 16)
        st = make_initial("helical", {"m": 1}, grid)
        path = tmp_path / "state.nlcf"
        write_snapshot(st, path)
        back = read_snapshot(path)
        rec_a = CriterionMonitor(grid).observe(st)
        rec_b = CriterionMonitor(grid).observe(back)
        assert rec_a == rec_b

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.nlcf"
        path.write_bytes(b"XXXX" + bytes(60))
        with pytest.raises(SnapshotError, match="magic"):
            read_snapshot(path)

    def test_bad_version(self, tmp_path):
        st = make_initial("constant", {}, Grid(2, 16))
        path = tmp_path / "v.nlcf"
        write_snapshot(st, path)
        raw = bytearray(path.read_bytes())
        raw[4] = 99
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotError, match="version"):
            read_snapshot(path)

    def test_truncation(self, tmp_path):
        st = make_initial("constant", {}, Grid(2, 16))
        path = tmp_path / "t.nlcf"
        write_snapshot(st, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 17])
        with pytest.raises(SnapshotError, match="bytes"):
            read_snapshot(path)

    def test_trailing_garbage(self, tmp_path):
        st = make_initial("constant", {}, Grid(2, 16))
        path = tmp_path / "g.nlcf"
        write_snapshot(st, path)
        path.write_bytes(path.read_bytes() + b"extra")
        with pytest.raises(SnapshotError, match="bytes"):
            read_snapshot(path)
