import math

import numpy as np
import pytest

import plap


def test_constant_load_on_interval_matches_parabola():
    mesh = plap.interval_mesh(0.0, 1.0, 64)
    w = plap.Weight(mesh, 0.0)
    u, report = plap.solve(w, plap.Operator(2.0), plap.Measure.lebesgue(mesh))
    assert report["converged"]
    assert abs(u(0.5) - 0.125) < 1e-10
    assert abs(u.sup_norm() - 0.125) < 1e-10


def test_trace_constant_for_lebesgue_q_one():
    mesh = plap.interval_mesh(0.0, 1.0, 256)
    w = plap.Weight(mesh)
    c, maximizer = plap.trace_constant(w, plap.Measure.lebesgue(mesh), 2.0, 1.0)
    assert abs(c - 1.0 / math.sqrt(12.0)) < 1e-3
    assert len(maximizer) == mesh.num_nodes


def test_measure_arithmetic_and_masses():
    mesh = plap.interval_mesh(-1.0, 1.0, 32)
    mu = plap.Measure.lebesgue(mesh) + plap.Measure.atom(mesh, plap.Point(0.0), 2.0)
    assert abs(mu.total_mass() - 4.0) < 1e-12
    assert np.all(mu.masses >= 0)


def test_capacity_of_subinterval():
    mesh = plap.interval_mesh(0.0, 1.0, 128)
    nodes = mesh.nodes()[:, 0]
    K = [0.25 <= x <= 0.75 for x in nodes]
    cap, _ = plap.capacity(plap.Weight(mesh), 2.0, K)
    assert abs(cap - 8.0) < 1e-8


def test_singular_identity_case():
    mesh = plap.interval_mesh(0.0, 1.0, 256)
    w = plap.Weight(mesh)
    u, info = plap.solve_singular(w, plap.Operator(2.0), plap.Measure.lebesgue(mesh),
                                  plap.Nonlinearity.decreasing(1.0))
    assert info["verdict"] == "converged"
    assert np.all(u.values >= 0)


def test_bad_exponent_raises():
    mesh = plap.interval_mesh(0.0, 1.0, 8)
    with pytest.raises(plap.PlapError):
        plap.Operator(1.0)


def test_sweep_csv_from_config_text():
    text = """
[domain]
shape = interval
a = 0
b = 1
cells = 32
[measure]
kind = power
s = 1
[operator]
p = 2
[sweep]
q = 1
"""
    csv = plap.run_sweep(text)
    lines = csv.strip().splitlines()
    assert lines[0].startswith("p,q,t,s,level")
    assert len(lines) == 2
