"""Acceptance gate: every certified criterion at its fixed tolerance.

The full suite runs once in a module fixture (printing one line per
criterion); the individual tests then assert each criterion's verdict.  The
determinism criterion is additionally exercised in its literal form: two
consecutive acceptance runs with the same config must produce byte-identical
CSV bodies.
"""

import dataclasses

import pytest

from gibbschain import csvio
from gibbschain.config import ExperimentConfig
from gibbschain.experiments import run_experiment


@pytest.fixture(scope="module")
def acceptance_run(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("acceptance_run1")
    cfg = ExperimentConfig(experiment="acceptance", output_dir=str(outdir))
    manifest = run_experiment(cfg, output_dir=str(outdir))
    return manifest, outdir


def _criterion_check(manifest, number):
    hits = [c for c in manifest.checks if c[0].startswith(f"criterion_{number:02d}_")]
    main = [c for c in hits if not c[0].endswith("_runtime")]
    assert len(main) == 1, f"criterion {number} missing from the manifest"
    label, passed, detail = main[0]
    assert passed, f"{label} failed: {detail}"
    for label, passed, detail in hits:
        if label.endswith("_runtime"):
            assert passed, f"{label} over budget: {detail}"


def test_no_runtime_errors(acceptance_run):
    manifest, _ = acceptance_run
    assert manifest.errors == []


@pytest.mark.parametrize("number", range(1, 14))
def test_criterion(acceptance_run, number):
    manifest, _ = acceptance_run
    _criterion_check(manifest, number)


def test_acceptance_outputs_written(acceptance_run):
    manifest, outdir = acceptance_run
    names = {name for name, _, _ in manifest.files}
    assert {"acceptance.csv", "acceptance_detail.csv"} <= names
    assert (outdir / "manifest.txt").exists()
    assert manifest.all_passed


def test_acceptance_rerun_byte_identical(acceptance_run, tmp_path_factory):
    _, first_dir = acceptance_run
    outdir = tmp_path_factory.mktemp("acceptance_run2")
    cfg = ExperimentConfig(experiment="acceptance", output_dir=str(outdir))
    manifest = run_experiment(cfg, output_dir=str(outdir))
    assert manifest.all_passed
    for name in ("acceptance.csv", "acceptance_detail.csv"):
        b1 = csvio.csv_body_bytes(first_dir / name)
        b2 = csvio.csv_body_bytes(outdir / name)
        assert b1 == b2, f"{name} bodies differ between consecutive runs"
