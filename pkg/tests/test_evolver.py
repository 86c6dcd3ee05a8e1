"""Spectral evolver tests.

The solver should be essentially exact at D = 0 (every operation is an
exact multiplier there), so the main checks compare checkpoint moments
and final marginals against the analytic predictions, then exercise the
diffusive and diagnostic paths.
"""

import math

import numpy as np
import pytest

from qcthreshold.closedform import (
    classical_momentum_pdf,
    predicted_moments,
    quantum_momentum_pdf,
)
from qcthreshold.core import (
    GridSpec,
    SemiclassicalParams,
    initial_coherent_field,
    l1_distance,
    measure_central_moments,
    momentum_marginal,
    position_marginal,
    standard_schedule,
)
from qcthreshold.errors import (
    InvalidParameterError,
    ResolutionError,
    SolverFailureError,
)
from qcthreshold.evolver import (
    ConvergenceReport,
    EvolverConfig,
    convergence_check,
    cubic_kick_substep,
    diffusion_substep,
    evolve,
)

H = 0.05
SCH = standard_schedule(H)


def _initial(kind, D=0.0, grid=None):
    params = SemiclassicalParams(hbar=2 * H, D=D)
    return initial_coherent_field(params, grid or GridSpec.for_h(H), kind), \
        params


@pytest.fixture(scope="module")
def closed_runs():
    out = {}
    for kind in ("wigner", "classical"):
        field, params = _initial(kind)
        out[kind] = evolve(field, SCH, params)
    return out


class TestClosedEvolution:
    @pytest.mark.parametrize("kind", ["wigner", "classical"])
    def test_final_marginal_matches_closed_form(self, closed_runs, kind):
        md = momentum_marginal(closed_runs[kind].final)
        if kind == "wigner":
            ref = quantum_momentum_pdf(md.p, SCH.tau1, SCH.tau2, SCH.tau3, H)
        else:
            ref = classical_momentum_pdf(md.p, SCH.tau1, SCH.tau2, SCH.tau3, H)
        assert float(np.abs(md.q - ref).sum() * md.dp) < 1e-9

    @pytest.mark.parametrize("kind", ["wigner", "classical"])
    @pytest.mark.parametrize("cp", [0, 1, 2, 3])
    def test_checkpoint_moments(self, closed_runs, kind, cp):
        m = measure_central_moments(closed_runs[kind].checkpoints[cp])
        ref = predicted_moments(cp, SCH.tau1, SCH.tau2, SCH.tau3, H, kind=kind)
        for name in ("mean_x", "mean_p", "var_x", "var_p", "m3_p",
                     "m4_x", "m4_p"):
            got, want = getattr(m, name), getattr(ref, name)
            assert got == pytest.approx(want, rel=1e-6, abs=1e-9), (name, cp)

    def test_third_moment_separates_kinds(self, closed_runs):
        mq = measure_central_moments(closed_runs["wigner"].checkpoints[2])
        mc = measure_central_moments(closed_runs["classical"].checkpoints[2])
        assert mc.m3_p - mq.m3_p == pytest.approx(2 * SCH.tau2 * H * H,
                                                  rel=1e-5)

    def test_mass_conserved(self, closed_runs):
        for kind in ("wigner", "classical"):
            diag = closed_runs[kind].diagnostics
            for label in ("t0", "t1", "t2", "t3"):
                assert diag[label]["mass"] == pytest.approx(1.0, abs=1e-8)

    def test_x_marginals_agree_across_kinds(self, closed_runs):
        # the quantum correction only acts on the momentum direction
        xq = position_marginal(closed_runs["wigner"].final)
        xc = position_marginal(closed_runs["classical"].final)
        assert float(np.abs(xq.q - xc.q).sum() * xq.dp) < 1e-6


class TestSubsteps:
    def test_kick_translates_columns(self):
        # kappa = 0: each x-column shifts in p by delta * x^2
        field, params = _initial("classical")
        delta = 0.05
        kicked = cubic_kick_substep(field, delta, params, kappa=0)
        x2 = (field.frame.s_x * field.u) ** 2
        mass = field.values.sum(axis=1) * field.dv
        keep = mass > 1e-6  # columns with enough mass for a stable mean
        mean0 = (field.values * field.v).sum(axis=1) * field.dv / mass
        mean1 = (kicked.values * field.v).sum(axis=1) * field.dv / mass
        shift = delta * x2 / field.frame.s_p  # frame momentum units
        assert np.abs((mean1 - mean0 - shift)[keep]).max() < 1e-9

    def test_kick_linearity(self):
        field, params = _initial("wigner")
        a = cubic_kick_substep(field, 0.03, params, 1)
        b = cubic_kick_substep(field.with_values(2.0 * field.values),
                               0.03, params, 1)
        assert np.abs(b.values - 2.0 * a.values).max() < 1e-12

    def test_kick_zero_delta_is_identity(self):
        field, params = _initial("classical")
        assert cubic_kick_substep(field, 0.0, params, 0) is field

    def test_diffusion_is_heat_kernel(self):
        # after time t a Gaussian stays Gaussian with variance + D t
        D, t = 0.01, 0.3
        field, params = _initial("classical", D=D)
        m0 = measure_central_moments(field)
        out = diffusion_substep(field, params, t)
        m1 = measure_central_moments(out)
        assert m1.var_x == pytest.approx(m0.var_x + D * t, rel=1e-9)
        assert m1.var_p == pytest.approx(m0.var_p + D * t, rel=1e-9)
        assert out.mass() == pytest.approx(1.0, abs=1e-10)

    def test_x_parity_preserved(self):
        # the full dynamics commutes with p -> p reflection of x: initial
        # state is even in x, and every generator is even in x
        field, params = _initial("classical")
        result = evolve(field, SCH, params)
        vals = result.final.values
        # the endpoint=False axis pairs u_j with u_{-j mod n}, hence the roll
        mirrored = np.roll(vals[::-1], 1, axis=0)
        assert np.abs(vals - mirrored).max() < 1e-10 * np.abs(vals).max()


class TestDiffusiveEvolution:
    def test_small_d_stays_near_closed(self, closed_runs):
        D = 0.01 * H ** (4.0 / 3.0)
        field, params = _initial("classical", D=D)
        md = momentum_marginal(evolve(field, SCH, params).final)
        md0 = momentum_marginal(closed_runs["classical"].final)
        dist = l1_distance(md, md0)
        assert 0.0 < dist < 0.02

    def test_strang_beats_lie(self):
        D = 0.1 * H ** (4.0 / 3.0)
        field, params = _initial("wigner", D=D)
        fine = evolve(field, SCH, params,
                      EvolverConfig(substeps_per_unit=400)).final
        ref = momentum_marginal(fine)
        err = {}
        for order in (1, 2):
            cfg = EvolverConfig(substeps_per_unit=25, splitting_order=order)
            got = momentum_marginal(evolve(field, SCH, params, cfg).final)
            err[order] = l1_distance(got, ref)
        assert err[2] < err[1]

    def test_convergence_check(self):
        D = 0.1 * H ** (4.0 / 3.0)
        field, params = _initial("classical", D=D)
        report = convergence_check(field, SCH, params,
                                   EvolverConfig(substeps_per_unit=50))
        assert isinstance(report, ConvergenceReport)
        assert report.passed
        assert report.refined_substeps == 100


class TestGuards:
    def test_invalid_config(self):
        with pytest.raises(InvalidParameterError):
            EvolverConfig(substeps_per_unit=0)
        with pytest.raises(InvalidParameterError):
            EvolverConfig(splitting_order=3)
        with pytest.raises(InvalidParameterError):
            EvolverConfig(frame_policy="fixed")

    def test_unnormalized_input_rejected(self):
        field, params = _initial("classical")
        bad = field.with_values(1.5 * field.values)
        with pytest.raises(InvalidParameterError):
            evolve(bad, SCH, params)

    def test_coarse_grid_raises_resolution_error(self):
        grid = GridSpec.for_h(H, n_u=256, n_v=256, widths_u=16.0,
                              widths_v=64.0)
        field, params = _initial("classical", grid=grid)
        with pytest.raises(ResolutionError):
            evolve(field, SCH, params)

    def test_undersized_momentum_extent_raises(self):
        # the kicked density needs lab momenta far beyond 16 sqrt(h); a
        # narrow box wraps around and trips the momentum-edge diagnostic
        grid = GridSpec.for_h(H, n_v=256, widths_v=16.0)
        field, params = _initial("classical", grid=grid)
        with pytest.raises(SolverFailureError):
            evolve(field, SCH, params)
