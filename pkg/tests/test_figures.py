"""Smoke tests for figure rendering: files appear and are nonempty."""

import numpy as np

from ciflab.asymptotics import cif_check, cwikel_probe, l2_blowup_probe
from ciflab.figures import (
    render_cif_figure,
    render_lemmas_figure,
    render_norms_figure,
    render_probe_figure,
    render_spectrum_figure,
)
from ciflab.lemmalab import TrialConfig, product_inequality_test
from ciflab.orlicz import TorusFunction, membership_report


def _rendered(tmp_path, name, renderer, *args, **kwargs):
    path = tmp_path / name
    assert renderer(*args, path, **kwargs) == str(path)
    assert path.stat().st_size > 0


def test_render_cif_figure(tmp_path):
    report = cif_check(TorusFunction.constant(1.0), 1, (1e3, 1e4, 1e5))
    _rendered(tmp_path, "cif.png", render_cif_figure, report)


def test_render_probe_figures(tmp_path):
    cw = cwikel_probe(TorusFunction.constant(1.0), 1, (16.0, 32.0))
    _rendered(tmp_path, "cwikel.png", render_probe_figure, cw)
    bp = l2_blowup_probe(2, 1e6, (8, 12, 16))
    _rendered(tmp_path, "blowup.png", render_probe_figure, bp)


def test_render_norms_figure(tmp_path):
    report = membership_report(TorusFunction.constant(1.0, d=2), (32, 64, 128))
    _rendered(tmp_path, "norms.png", render_norms_figure, report)


def test_render_lemmas_figure(tmp_path):
    verdicts = [product_inequality_test(TrialConfig(trials=5, sizes=(8,)))]
    _rendered(tmp_path, "lemmas.png", render_lemmas_figure, verdicts)


def test_render_spectrum_figure(tmp_path):
    values = 1.0 / np.arange(1.0, 101.0)
    _rendered(tmp_path, "spectrum.png", render_spectrum_figure, values,
              title="harmonic decay")
