from fractions import Fraction

import numpy as np
import pytest

from oracles import LUROTH_DENSITY
from rpls import _pykernels
from rpls.density import invariant_densities
from rpls.gallery import luroth23, single_map
from rpls.simulate import (
    BACKEND,
    SimConfig,
    _float_tables,
    birkhoff_frequency,
    histogram_distance,
    histogram_to_csv,
    orbit_uniforms,
    sample_orbit,
    sample_orbits,
)
from rpls.scalar import RATIONAL
from rpls.stepfunc import StepFunction
from rpls.system import RandomSystem

F = Fraction


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n_steps=0)
    with pytest.raises(ValueError):
        SimConfig(seed=-1)


def test_deterministic_given_seed(lueroth):
    cfg = SimConfig(seed=7, n_steps=5000, n_orbits=3)
    a = list(sample_orbits(lueroth, cfg))
    b = list(sample_orbits(lueroth, cfg))
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    assert not np.array_equal(a[0], a[1])
    c = list(sample_orbits(lueroth, SimConfig(seed=8, n_steps=5000, n_orbits=3)))
    assert not np.array_equal(a[0], c[0])


def test_orbit_streams_independent_of_count():
    one = orbit_uniforms(SimConfig(seed=3, n_steps=100), 1)
    again = orbit_uniforms(SimConfig(seed=3, n_steps=100, n_orbits=5), 1)
    assert np.array_equal(one, again)


def test_single_map_matches_manual_iteration():
    sys = single_map("skewed")
    cfg = SimConfig(n_steps=50, burn_in=0, dither=0.0)
    trace = sample_orbit(sys, 0.3, cfg)
    x = 0.3
    for t in range(50):
        assert trace[t] == x
        x = 3 * x if x <= 1 / 3 else 1.5 * x - 0.5


def test_map_choice_frequency():
    # two maps sending everything to different constants reveal which one was picked
    sys = RandomSystem(RATIONAL, [F(0), F(1)], [[F(1, 4), F(1, 4)]], [[F(0), F(1, 2)]], [F(1, 5), F(4, 5)])
    trace = sample_orbit(sys, 0.0, SimConfig(seed=4, n_steps=100_000, burn_in=0, dither=0.0))
    first = np.mean(trace[1:] < 0.5)
    assert abs(first - 0.2) < 4 * np.sqrt(0.16 / 100_000)


def test_fixed_point_without_dither(doubling):
    trace = sample_orbit(doubling, 0.0, SimConfig(n_steps=1000, burn_in=0, dither=0.0))
    assert np.all(trace == 0.0)


def test_lueroth_orbit_stays_in_domain(lueroth):
    cfg = SimConfig(n_steps=1_000_000, burn_in=0)
    trace = sample_orbit(lueroth, 0.5, cfg)
    assert trace.min() >= 1 / 3 and trace.max() <= 1.0


def test_x0_outside_domain(lueroth):
    with pytest.raises(ValueError):
        sample_orbit(lueroth, 0.1, SimConfig(n_steps=10))


def test_full_domain_event(lueroth):
    est = birkhoff_frequency(lueroth, None, (F(1, 3), 1), SimConfig(n_steps=10_000, n_orbits=2), closed="both")
    assert est.estimate == 1.0 and est.n == 20_000


def test_event_validation(lueroth):
    cfg = SimConfig(n_steps=10)
    with pytest.raises(ValueError):
        birkhoff_frequency(lueroth, 0.5, (0, 1), cfg)
    with pytest.raises(ValueError):
        birkhoff_frequency(lueroth, 0.5, (F(1, 2), F(2, 3)), cfg, closed="half")


def test_lueroth_frequency_matches_density(lueroth):
    est = birkhoff_frequency(lueroth, 0.5, (F(2, 3), 1), SimConfig(seed=1, n_steps=200_000))
    assert abs(est.estimate - 5 / 8) < 4 * est.stderr
    assert est.stderr >= est.stderr_binomial


@pytest.mark.skipif(BACKEND != "compiled", reason="compiled kernel not built")
def test_compiled_and_python_kernels_agree(lueroth, golden_beta):
    from rpls import _ckernels

    for sys in (lueroth, golden_beta):
        z, right, k, d, cum, A, B = _float_tables(sys)
        u = orbit_uniforms(SimConfig(seed=11, n_steps=20_000), 0)
        args = (0.5, u, z, right, k, d, cum, A, B, 1e-12 * (B - A), 100)
        assert np.array_equal(_ckernels.run_orbit(*args), _pykernels.run_orbit(*args))


def test_histogram_of_true_density(lueroth):
    h = StepFunction.from_pieces(F(1, 3), F(1), LUROTH_DENSITY)
    res = histogram_distance(lueroth, h, SimConfig(seed=2, n_steps=1_000_000, bins=32))
    assert res.l1 < 0.02
    assert res.exact.sum() == pytest.approx(1.0)
    assert res.n == 1_000_000


def test_histogram_of_wrong_density(lueroth):
    wrong = StepFunction.constant(F(1, 3), F(1), F(3, 2))
    # exact L1 distance between the two densities is 1/4
    assert (wrong - StepFunction.from_pieces(F(1, 3), F(1), LUROTH_DENSITY)).l1_norm() == F(1, 4)
    res = histogram_distance(lueroth, wrong, SimConfig(seed=2, n_steps=1_000_000, bins=32))
    assert res.l1 > 0.1


def test_histogram_csv(golden_beta):
    h = invariant_densities(golden_beta).densities[0]
    res = histogram_distance(golden_beta, h, SimConfig(n_steps=10_000, bins=8))
    lines = histogram_to_csv(res).splitlines()
    assert lines[0] == "bin_left,bin_right,empirical,exact,diff"
    assert len(lines) == 9


def test_p_independent_frequency():
    for p in (F(1, 5), F(4, 5)):
        est = birkhoff_frequency(luroth23(p), 0.5, (F(2, 3), 1), SimConfig(seed=5, n_steps=200_000))
        assert abs(est.estimate - 5 / 8) < 4 * est.stderr


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, RPLS_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from rpls.simulate import BACKEND; print(BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
