"""Sweep harness tests on small, fast configurations."""

import csv
import json
import math

import numpy as np
import pytest

from qcthreshold.closedform import constants
from qcthreshold.errors import InvalidParameterError
from qcthreshold.sweep import (
    CSV_COLUMNS,
    RunConfig,
    bound_check,
    crossing_estimates,
    emit_figures,
    observable_table,
    run_experiment,
    run_point,
    threshold_sweep,
    write_records_csv,
)

FAST = dict(n_u=256, n_v=512, substeps=60)


@pytest.fixture(scope="module")
def small_records():
    cfg = RunConfig(h_list=(0.2,), d_rule=("exponent", (1.0, 4.0 / 3.0, 2.0)),
                    **FAST)
    return cfg, run_experiment(cfg, max_workers=1)


class TestRunConfig:
    def test_points_enumeration(self):
        cfg = RunConfig(h_list=(0.1,), d_rule=("exponent", (1.0, 2.0)))
        pts = cfg.points()
        assert (0.1, 0.0, pts[0][2]) == pts[0] and math.isnan(pts[0][2])
        assert pts[1] == (0.1, pytest.approx(0.1), 1.0)
        assert pts[2] == (0.1, pytest.approx(0.01), 2.0)

    def test_absolute_rule(self):
        cfg = RunConfig(h_list=(0.1,), d_rule=("absolute", (0.005,)),
                        include_zero=False)
        pts = cfg.points()
        assert len(pts) == 1
        assert pts[0][:2] == (0.1, 0.005)

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            RunConfig(h_list=())
        with pytest.raises(InvalidParameterError):
            RunConfig(d_rule=("scaled", (1.0,)))
        with pytest.raises(InvalidParameterError):
            RunConfig(tau2=0.0)

    def test_memory_gate(self):
        cfg = RunConfig(n_u=1 << 14, n_v=1 << 15)
        with pytest.raises(InvalidParameterError):
            run_experiment(cfg)


class TestRunPoint:
    def test_closed_point_is_tight(self):
        cfg = RunConfig(h_list=(0.2,), **FAST)
        r = run_point(0.2, 0.0, math.nan, cfg)
        assert r.measured_quantum_l1 < 1e-8
        assert r.measured_classical_l1 < 1e-8
        assert r.quantum_bound == 0.0
        assert r.classical_bound == 0.0
        # at D = 0 the quantum-classical gap equals the universal profile gap
        assert r.l1 == pytest.approx(constants(1.0).c_bar, abs=1e-3)
        assert r.discrepancy_g0 == pytest.approx(constants(1.0).c0, abs=1e-4)

    def test_record_metadata(self, small_records):
        _, records = small_records
        # the strongest-diffusion point gets the widened momentum grid
        assert all(r.grid in ("256x512", "256x1024") for r in records)
        assert records[-1].grid == "256x1024"
        assert all(r.substeps == 60 for r in records)
        assert all(r.wall_time > 0 for r in records)
        # sorted by (h, D)
        ds = [r.D for r in records]
        assert ds == sorted(ds)

    def test_discrepancy_shrinks_with_d(self, small_records):
        _, records = small_records
        by_d = {r.D: r.discrepancy_g0 for r in records}
        ds = sorted(by_d)
        assert by_d[ds[-1]] < by_d[ds[0]]


class TestArtifacts:
    def test_files_and_schema(self, tmp_path, small_records):
        cfg, records = small_records
        cfg = RunConfig(h_list=cfg.h_list, d_rule=cfg.d_rule,
                        out_dir=str(tmp_path), **FAST)
        run_experiment(cfg, max_workers=1)
        assert (tmp_path / "records.csv").exists()
        assert (tmp_path / "summary.json").exists()
        assert (tmp_path / "bounds.csv").exists()

        with open(tmp_path / "records.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) == 1 + len(records)

        payload = json.loads((tmp_path / "summary.json").read_text())
        assert payload["schema"] == "v1"
        assert payload["config"]["grid"] == "256x512"
        assert "wall_time" not in payload["records"][0]
        assert payload["records"][0]["exponent"] is None  # D = 0 row

        with open(tmp_path / "bounds.csv", newline="") as fh:
            brows = list(csv.reader(fh))
        assert brows[0] == ["h", "D", "side", "measured", "bound", "passed"]
        assert all(row[5] == "PASS" for row in brows[1:])

    def test_empty_records_csv_is_header_only(self, tmp_path):
        path = tmp_path / "records.csv"
        write_records_csv(path, [])
        assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_summary_deterministic(self, tmp_path, small_records):
        from qcthreshold.sweep import write_summary_json
        cfg, records = small_records
        write_summary_json(tmp_path / "a.json", cfg, records)
        write_summary_json(tmp_path / "b.json", cfg, records)
        assert (tmp_path / "a.json").read_bytes() == \
            (tmp_path / "b.json").read_bytes()


class TestCrossing:
    def test_interpolates_between_points(self, small_records):
        _, records = small_records
        est = crossing_estimates(records)
        assert set(est) == {0.2}
        d_star = est[0.2]
        # the crossing must sit inside the swept D range
        ds = sorted(r.D for r in records if r.D > 0)
        assert ds[0] < d_star < ds[-1]

    def test_threshold_sweep_ratio(self):
        records, ratios = threshold_sweep(
            (0.2,), (1.0, 4.0 / 3.0, 2.0), RunConfig(h_list=(0.2,), **FAST))
        assert 0.2 in ratios
        assert 0.01 < ratios[0.2] < 100.0

    def test_exponents_must_straddle(self):
        with pytest.raises(InvalidParameterError):
            threshold_sweep((0.2,), (1.5, 2.0))


class TestBoundCheck:
    def test_rows_pass(self):
        rows = bound_check((0.2,), (0.2 ** (4.0 / 3.0),), substeps=60)
        assert len(rows) == 2
        assert all(r["passed"] for r in rows)
        sides = {r["side"] for r in rows}
        assert sides == {"quantum", "classical"}


class TestFiguresAndTables:
    def test_observable_table_values(self):
        table = observable_table()
        assert table[0][0] == 0
        assert abs(table[0][1] - table[0][2]) == \
            pytest.approx(constants(1.0).c0, abs=1e-4)
        # odd-n entries stay finite and ordered by index
        assert [row[0] for row in table] == list(range(9))

    def test_emit_figures(self, tmp_path):
        data = emit_figures(str(tmp_path))
        for name in ("fig2.svg", "fig3.svg", "fig3.csv"):
            assert (tmp_path / name).exists()
        p, q, c = data["fig2"]
        assert len(p) == len(q) == len(c)
        assert float(np.max(q)) > 0.2 and float(np.max(c)) > 0.2
        text = (tmp_path / "fig2.svg").read_text()
        assert text.startswith("<svg") and text.rstrip().endswith("</svg>")

    def test_figures_deterministic(self, tmp_path):
        emit_figures(str(tmp_path / "a"))
        emit_figures(str(tmp_path / "b"))
        assert (tmp_path / "a" / "fig2.svg").read_bytes() == \
            (tmp_path / "b" / "fig2.svg").read_bytes()
        assert (tmp_path / "a" / "fig3.csv").read_bytes() == \
            (tmp_path / "b" / "fig3.csv").read_bytes()
