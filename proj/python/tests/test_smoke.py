import math

import numpy as np
import pytest

import gradedfem as gf


def test_grading_map_examples():
    assert np.allclose(gf.graded_forward(4.0, [0.5, 0.0]), [0.0625, 0.0])
    assert np.allclose(gf.graded_inverse(3.0, [0.0, 8.0]), [0.0, 2.0])
    assert np.allclose(gf.b_matrix(4.0, [1.0, 0.0]), np.diag([0.25, 4.0]))
    assert gf.load_weight(2.0, [0.5, 0.5]) == pytest.approx(1.0)
    assert gf.mesh_function(4.0, 0.1, [0.5, 0.0]) == pytest.approx(0.0125)
    assert gf.min_gamma(2, 1.5 * math.pi) == pytest.approx(3.0)
    assert gf.alpha_powers(2, 4.0) == pytest.approx([-0.5, 0.5, 1.5])


def test_singular_solution_peak():
    value, grad = gf.singular_solution(1.5 * math.pi, 1.0, 0.75 * math.pi)
    assert value == pytest.approx(1.0)
    assert grad.shape == (2,)


def test_run_sector_report():
    r = gf.run_sector(h=0.2)
    assert r["gamma"] == 4.0
    assert r["n_dofs"] > 0
    assert 0.0 < r["h1_semi"] <= r["energy"] * 2.0
    assert r["l2"] < r["h1_semi"]


def test_convergence_rates_graded_beat_ungraded():
    graded = gf.convergence_study([0.4, 0.2, 0.1])
    ungraded = gf.convergence_study([0.4, 0.2, 0.1], gamma=1.0)
    assert graded["rate_h1"] > 1.7
    assert ungraded["rate_h1"] < 1.0


def test_shift_study_is_reproducible():
    a = gf.mesh_shift_study(0.4, 10, 5)
    b = gf.mesh_shift_study(0.4, 10, 5)
    assert np.array_equal(a["shifts"], b["shifts"])
    assert a["h1_relative_std"] == b["h1_relative_std"]


def test_field_sample_shapes():
    f = gf.sample_sector_field(0.2, n=11)
    assert f["reference"].shape == (121, 2)
    assert f["physical"].shape == (121, 2)
    assert f["value"].shape == (121,)
    assert sum(f["inside"]) > 0


def test_multipatch_jump_decreases():
    rows = gf.multipatch_fig8([0.2, 0.1])
    assert rows[1]["interface_jump"] < rows[0]["interface_jump"]


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        gf.run_sector(omega=3.0)
    with pytest.raises(ValueError):
        gf.run_sector(fix="sometimes")
