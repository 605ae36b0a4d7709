"""End-to-end runs of the command-line driver against temporary directories."""

import csv
import json
import math

import numpy as np
import pytest

from kickedharper import TRANSPORT_LABELS
from kickedharper.cli import DIFFUSION_HEADER, SPECTRUM_HEADER, main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def butterfly_config(tmp_path, prefix="out/run", **extra):
    cfg = {
        "command": "butterfly",
        "output_prefix": str(tmp_path / prefix),
        "model": {"kind": "khm", "k1": 1.0, "k2": 1.0},
        "s_max": 2,
        "theta_count": 3,
    }
    cfg.update(extra)
    return cfg


# ── butterfly ──────────────────────────────────────────────────────────────

def test_butterfly_writes_spectrum_csv_and_plot(tmp_path):
    cfg = butterfly_config(tmp_path)
    assert main([write_config(tmp_path, "c.json", cfg)]) == 0
    csv_path = tmp_path / "out" / "run_spectrum.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == SPECTRUM_HEADER
    assert len(lines) == 1 + (2 + 1) * 3        # dens 2 and 1, three angles
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            assert int(row["hbar_num"]) >= 1 and int(row["hbar_den"]) >= 1
            assert math.isfinite(float(row["quasienergy"]))
            assert abs(float(row["hbar"]) -
                       2 * math.pi * int(row["hbar_num"]) / int(row["hbar_den"])) < 1e-12
    plot = (tmp_path / "out" / "run_plot.py").read_text()
    assert "run_spectrum.csv" in plot


def test_butterfly_output_is_reproducible_across_workers(tmp_path):
    paths = []
    for tag, workers in (("a", None), ("b", None), ("c", 2)):
        cfg = butterfly_config(tmp_path, prefix=f"{tag}/run")
        if workers:
            cfg["workers"] = workers
        assert main([write_config(tmp_path, f"{tag}.json", cfg)]) == 0
        paths.append((tmp_path / tag / "run_spectrum.csv").read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_flags_override_the_config(tmp_path):
    cfg = butterfly_config(tmp_path, prefix="ignored/run")
    cfg["s_max"] = 5
    target = tmp_path / "flagged" / "run"
    code = main([write_config(tmp_path, "c.json", cfg),
                 "--s-max", "1", "--theta-count", "2",
                 "--output-prefix", str(target)])
    assert code == 0
    lines = (tmp_path / "flagged" / "run_spectrum.csv").read_text().splitlines()
    assert len(lines) == 1 + 1 * 2              # only 1/1 at two angles
    assert not (tmp_path / "ignored").exists()


def test_workers_env_variable_is_honored(tmp_path, monkeypatch):
    monkeypatch.setenv("KICKEDHARPER_WORKERS", "2")
    cfg = butterfly_config(tmp_path, prefix="env/run")
    assert main([write_config(tmp_path, "c.json", cfg)]) == 0
    monkeypatch.setenv("KICKEDHARPER_WORKERS", "zero")
    assert main([write_config(tmp_path, "c.json", cfg)]) == 2


# ── evolve ─────────────────────────────────────────────────────────────────

def test_evolve_writes_series_and_summary(tmp_path):
    cfg = {
        "command": "evolve",
        "output_prefix": str(tmp_path / "ev"),
        "model": {"kind": "dkrm-resonant", "k1": 3.0, "k2": 3.0,
                  "hbar": "2pi*1/3"},
        "n_steps": 300,
        "fit_window": [10, 300],
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 0
    lines = (tmp_path / "ev_diffusion.csv").read_text().splitlines()
    assert lines[0] == DIFFUSION_HEADER
    assert len(lines) == 1 + 301
    summary = json.loads((tmp_path / "ev_summary.json").read_text())
    assert set(summary) == {"alpha", "classification", "window", "final_norm"}
    assert summary["classification"] in TRANSPORT_LABELS
    assert isinstance(summary["alpha"], float)
    assert summary["window"] == [10.0, 300.0]
    assert abs(summary["final_norm"] - 1.0) < 1e-8
    assert "ev_diffusion.csv" in (tmp_path / "ev_plot.py").read_text()


def test_evolve_with_zero_kicks_reports_a_pinned_state(tmp_path):
    cfg = {
        "command": "evolve",
        "output_prefix": str(tmp_path / "still"),
        "model": {"kind": "dkrm-resonant", "k1": 0.0, "k2": 0.0,
                  "hbar": "2pi*1/5"},
        "n_steps": 50,
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 0
    with open(tmp_path / "still_diffusion.csv", newline="") as fh:
        variances = [float(r["variance"]) for r in csv.DictReader(fh)]
    assert variances == [0.0] * 51
    summary = json.loads((tmp_path / "still_summary.json").read_text())
    assert summary["alpha"] is None
    assert summary["classification"] == "localized"


# ── classical ──────────────────────────────────────────────────────────────

def test_classical_reports_map_equivalence(tmp_path):
    cfg = {
        "command": "classical",
        "output_prefix": str(tmp_path / "cl"),
        "model": {"kind": "khm", "k1": 1.3, "k2": 0.7},
        "n_points": 2000,
        "n_steps": 40,
        "seed": 7,
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 0
    report = json.loads((tmp_path / "cl_classical.json").read_text())
    assert report["map_equivalence_max_residual"] < 1e-12
    assert report["half_step_max_deviation"] < 1e-12
    assert report["map"] == "khm" and report["seed"] == 7
    lines = (tmp_path / "cl_trajectory.csv").read_text().splitlines()
    assert lines[0] == "step,q,p"
    assert len(lines) == 1 + 41


def test_classical_rejects_the_general_resonance_model(tmp_path):
    cfg = {
        "command": "classical",
        "output_prefix": str(tmp_path / "cl"),
        "model": {"kind": "dkrm-general", "k1": 1.0, "k2": 1.0,
                  "resonance": [1, 2]},
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 2


# ── fractal ────────────────────────────────────────────────────────────────

def test_fractal_writes_spectrum_and_dimension(tmp_path):
    cfg = {
        "command": "fractal",
        "output_prefix": str(tmp_path / "fr"),
        "model": {"kind": "khm", "k1": 1.0, "k2": 1.0, "hbar": "2pi*1/13"},
        "theta_count": 8,
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 0
    report = json.loads((tmp_path / "fr_fractal.json").read_text())
    assert report["n_points"] == 13 * 8
    assert 0.0 <= report["d0"] <= 1.5
    assert len(report["scales"]) == len(report["counts"])
    lines = (tmp_path / "fr_spectrum.csv").read_text().splitlines()
    assert len(lines) == 1 + 13 * 8


def test_fractal_requires_an_exact_rational_hbar(tmp_path):
    cfg = {
        "command": "fractal",
        "output_prefix": str(tmp_path / "fr"),
        "model": {"kind": "khm", "k1": 1.0, "k2": 1.0, "hbar": 1.0},
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 2


# ── check-symmetries ───────────────────────────────────────────────────────

def test_check_symmetries_passes_on_the_harper_model(tmp_path):
    cfg = {
        "command": "check-symmetries",
        "output_prefix": str(tmp_path / "sym"),
        "model": {"kind": "khm", "k1": 1.0, "k2": 1.0},
        "s_max": 4,
        "theta_count": 4,
        "n_rationals": 3,
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 0
    report = json.loads((tmp_path / "sym_symmetries.json").read_text())
    assert report["all_passed"] is True
    assert len(report["claims"]) >= 3
    for claim in report["claims"]:
        assert set(claim) == {"name", "hbar", "distance", "tolerance", "passed"}
        assert claim["distance"] < claim["tolerance"]


# ── failure modes ──────────────────────────────────────────────────────────

def test_config_validation_failures_exit_two(tmp_path):
    bad = [
        {},                                                     # no command
        {"command": "nope", "output_prefix": "x", "model": {}},
        butterfly_config(tmp_path, bogus_key=1),
        {**butterfly_config(tmp_path), "output_prefix": ""},
        {"command": "evolve", "output_prefix": str(tmp_path / "x"),
         "model": {"kind": "dkrm-resonant", "k1": 1.0, "k2": 1.0}},  # no hbar
        {**butterfly_config(tmp_path),
         "model": {"kind": "khm", "k1": 1.0, "k2": 1.0, "hbar": 1.0}},
        {**butterfly_config(tmp_path),
         "model": {"kind": "khm", "k1": -1.0, "k2": 1.0}},
        {**butterfly_config(tmp_path), "theta_count": 0},
    ]
    for i, cfg in enumerate(bad):
        assert main([write_config(tmp_path, f"bad{i}.json", cfg)]) == 2, cfg


def test_unreadable_or_malformed_config_exits_two(tmp_path):
    assert main([str(tmp_path / "missing.json")]) == 2
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    assert main([str(garbled)]) == 2
    listy = tmp_path / "listy.json"
    listy.write_text("[1, 2]")
    assert main([str(listy)]) == 2


def test_unwritable_output_prefix_exits_one(tmp_path):
    blocker = tmp_path / "blocker.txt"
    blocker.write_text("in the way")
    cfg = {
        "command": "evolve",
        "output_prefix": str(blocker / "out"),
        "model": {"kind": "dkrm-resonant", "k1": 0.5, "k2": 0.5, "hbar": 1.0},
        "n_steps": 2,
    }
    assert main([write_config(tmp_path, "c.json", cfg)]) == 1
