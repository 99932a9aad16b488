"""Smoke tests for the python bindings: a thin pass over each exposed surface."""

import math

import pytest

import pvlab


def test_version():
    assert pvlab.__version__


def test_measure_builders():
    mu = pvlab.build_cantor_measure(2, 0.25)
    assert len(mu) == 16
    assert mu.total_mass() == 1.0
    assert mu.dim == 2
    assert mu.resolution == 0.0625

    seg = pvlab.build_uniform_segment(4)
    assert [seg.atom(i)[0] for i in range(4)] == [0.125, 0.375, 0.625, 0.875]

    cube = pvlab.build_uniform_cube(3, 2)
    assert len(cube) == 9

    with pytest.raises(Exception):
        pvlab.build_cantor_measure(2, 0.7)


def test_ball_mass_and_restrict():
    mu = pvlab.build_cantor_measure(2, 0.25)
    assert pvlab.ball_mass(mu, [0.0, 0.0], 0.25) == 3.0 / 16.0
    outside = pvlab.restrict(mu, [0.0, 0.0], 0.25, False)
    assert pvlab.ball_mass(mu, [0.0, 0.0], 0.25) + outside.total_mass() == 1.0


def test_kernels():
    k = pvlab.KernelSpec.riesz(1, 1)
    assert k([0.0, 0.0], [1.0, 0.0]) == -1.0
    assert pvlab.KernelSpec.hilbert()([0.0], [2.0]) == 0.5
    assert pvlab.KernelSpec.huovinen_combo()([1.0, 0.0], [0.0, 0.0]) == 0.0
    assert pvlab.check_antisymmetry(k, dim=2, n=2000) <= 1e-15

    h = pvlab.HFunction.power(1.0, 1.0)
    assert pvlab.check_size_condition(k, h, dim=2, n=2000) <= 1.0 + 1e-12


def test_truncated_operators():
    mu = pvlab.build_uniform_segment(4096)
    k = pvlab.KernelSpec.hilbert()
    one = pvlab.DensityFunction.one()
    grid = pvlab.TruncationGrid.geometric(0.5, 0.5, 11, mu.trust_floor)

    seq = pvlab.pv_sequence(mu, k, one, [0.25], grid)
    rep = pvlab.classify_convergence(seq, tail_fraction=0.5, tol_cauchy=1e-6,
                                     tol_drift=1e-6)
    assert rep.verdict == "convergent"
    assert abs(rep.limit - math.log(3.0)) <= 2e-2

    # symmetric point: exact zeros under compensated summation
    assert pvlab.truncated(mu, k, one, [0.5], 0.125) == 0.0
    assert pvlab.ball_average(mu, k, one, [0.5], 2.0 ** -7) == 0.0

    with pytest.raises(RuntimeError):
        pvlab.truncated(mu, k, one, [0.25], 1e-9)


def test_maximal_and_weak_type():
    mu = pvlab.build_uniform_segment(256)
    k = pvlab.KernelSpec.hilbert()
    f = pvlab.DensityFunction.of([1.0 if mu.atom(i)[0] < 0.5 else 0.0
                                  for i in range(len(mu))])
    grid = pvlab.TruncationGrid.geometric(2.0, 0.5, 8, mu.trust_floor)
    value, argmax_eps = pvlab.maximal(mu, k, f, [0.3], grid)
    assert value > 0.0 and argmax_eps > 0.0

    tstar = pvlab.maximal_at_atoms(mu, k, f, grid)
    tmax = max(tstar)
    t_grid = [tmax * (1.0 / 256.0) ** (j / 31.0) for j in range(32)]
    rep = pvlab.weak_type_constant(mu, k, f, grid, t_grid)
    assert rep.constant > 0.5
    assert rep.f_l1 == 0.5


def test_martingale():
    mu = pvlab.build_cantor_measure(4, 0.25)
    part = pvlab.nested_partition_from_ifs(mu, 4)
    part.validate()
    assert part.depth == 4
    k = pvlab.KernelSpec.riesz(1, 1)
    one = pvlab.DensityFunction.one()

    res = pvlab.check_martingale_property(mu, one, k, part, 2)
    assert res.max_relative <= 1e-10

    trace = pvlab.martingale_trace(mu, one, k, part, 7)
    assert len(trace.levels) == 4
    assert all(lv.gap == 0.0 for lv in trace.levels)
    assert trace.gap_nonincreasing_tail

    assert pvlab.s_k(mu, one, k, part, 1, 0) == pvlab.a_k(mu, one, k, part, 1, 0)


def test_diagnostics():
    mu = pvlab.build_cantor_measure(6, 0.25)
    h = pvlab.HFunction.power(4.0, 1.0)
    radii = [0.9 * 0.25 ** j for j in range(1, 5)]
    prof = pvlab.density_profile(mu, h, [0.0, 0.0], radii)
    assert all(0.05 <= row.ratio <= 1.0 for row in prof.rows)

    dbl = pvlab.doubling_scale_search(mu, [0.0, 0.0], 0.9, 5.0)
    assert dbl.found and dbl.k == 0


def test_experiment_roundtrip(tmp_path):
    cfg = """
[experiment]
kind = identity-suite
seed = 3

[measure]
type = cantor generation=3 contraction=0.25

[kernel]
kernel = riesz m=1 i=1

[limits]
cases = 4
"""
    findings = pvlab.validate_config_text(cfg)
    assert findings == []
    manifest = pvlab.run_config_text(cfg, out_dir=str(tmp_path / "out"))
    assert manifest.kind == "identity-suite"
    assert "identities.csv" in manifest.output_checksums
    summary = (tmp_path / "out" / "summary.txt").read_text()
    assert "all_pass = true" in summary

    manifest2 = pvlab.run_config_text(cfg, out_dir=str(tmp_path / "out2"))
    assert manifest.output_checksums == manifest2.output_checksums
