"""Oracle cross-validation tests.

Three independent discretizations of the same dynamics are checked
against each other and against the closed forms: a Schrodinger solver
(closed quantum), a position-basis Lindblad density-matrix solver (open
quantum), and a Langevin sampler (open classical).
"""

import math

import numpy as np
import pytest

from qcthreshold.closedform import classical_momentum_pdf, quantum_momentum_pdf
from qcthreshold.core import (
    GridSpec,
    SemiclassicalParams,
    initial_coherent_field,
    momentum_marginal,
    resample_distribution,
    standard_schedule,
)
from qcthreshold.errors import InvalidParameterError, ResolutionError
from qcthreshold.evolver import evolve
from qcthreshold.oracles import (
    coherent_density_matrix,
    coherent_wavefunction,
    dm_momentum_marginal,
    histogram_distribution,
    langevin_sample,
    lindblad_dm_evolve,
    momentum_distribution,
    schrodinger_closed,
    wigner_from_dm,
)

H = 0.05
SCH = standard_schedule(H)
PARAMS0 = SemiclassicalParams(hbar=2 * H)


class TestSchrodinger:
    def test_initial_momentum_density(self):
        psi = coherent_wavefunction(H)
        md = momentum_distribution(psi, H)
        ref = np.exp(-md.p ** 2 / (2 * H)) / math.sqrt(2 * math.pi * H)
        assert float(np.abs(md.q - ref).sum() * md.dp) < 1e-9

    def test_stretch_is_pure_dilation(self):
        cps = schrodinger_closed(coherent_wavefunction(H), SCH, H)
        assert cps[1].scale == pytest.approx(math.exp(SCH.tau1))
        assert np.array_equal(cps[1].values, cps[0].values)
        # the cubic phase leaves |psi|^2 untouched
        assert np.abs(np.abs(cps[2].values) - np.abs(cps[1].values)).max() \
            < 1e-14

    def test_final_matches_airy_closed_form(self):
        cps = schrodinger_closed(coherent_wavefunction(H), SCH, H)
        md = momentum_distribution(cps[3], H)
        mask = (md.p > -14.0) & (md.p < 46.0)
        ref = quantum_momentum_pdf(md.p[mask], SCH.tau1, SCH.tau2, SCH.tau3, H)
        assert float(np.abs(md.q[mask] - ref).sum() * md.dp) < 1e-9

    def test_weak_kick_gaussian_limit(self):
        # tau2 -> 0 leaves a squeezed Gaussian of variance h e^{2(tau3-tau1)}
        from qcthreshold.core import Schedule
        sch = Schedule(tau1=0.3, tau2=1e-4, tau3=0.5)
        cps = schrodinger_closed(coherent_wavefunction(H), sch, H)
        md = momentum_distribution(cps[3], H)
        var = H * math.exp(2 * (sch.tau3 - sch.tau1))
        ref = np.exp(-md.p ** 2 / (2 * var)) / math.sqrt(2 * math.pi * var)
        assert float(np.abs(md.q - ref).sum() * md.dp) < 1e-3

    def test_undersampled_phase_raises(self):
        psi = coherent_wavefunction(H, n=128)
        with pytest.raises(ResolutionError):
            schrodinger_closed(psi, SCH, H)


@pytest.fixture(scope="module")
def dm_run():
    params = SemiclassicalParams(hbar=2 * H, D=H ** (4.0 / 3.0))
    rho0 = coherent_density_matrix(H, n=512)
    return params, lindblad_dm_evolve(rho0, SCH, params, steps=60)


class TestLindbladDensityMatrix:
    def test_trace_and_hermiticity(self, dm_run):
        _, cps = dm_run
        for rho in cps:
            assert rho.trace() == pytest.approx(1.0, abs=1e-6)
            assert rho.hermiticity_defect() < 1e-10

    def test_purity_decreases(self, dm_run):
        _, cps = dm_run
        purities = [r.purity() for r in cps]
        assert purities[0] == pytest.approx(1.0, abs=1e-6)
        assert purities[3] < purities[0] - 0.01

    def test_positivity(self):
        params = SemiclassicalParams(hbar=2 * H, D=H ** (4.0 / 3.0))
        rho0 = coherent_density_matrix(H, n=192)
        final = lindblad_dm_evolve(rho0, SCH, params, steps=40)[3]
        eigs = np.linalg.eigvalsh(final.values * final.dxi)
        assert eigs.min() > -1e-6

    def test_marginal_matches_spectral_evolver(self, dm_run):
        params, cps = dm_run
        md = dm_momentum_marginal(cps[3], params)
        f0 = initial_coherent_field(params, GridSpec.for_h(H), "wigner")
        sp = momentum_marginal(evolve(f0, SCH, params).final)
        mask = (md.p > -14.0) & (md.p < 46.0)
        ref = resample_distribution(sp, md.p[mask])
        assert float(np.abs(md.q[mask] - ref.q).sum() * md.dp) < 1e-4

    def test_initial_wigner_is_isotropic_gaussian(self):
        rho = coherent_density_matrix(H, n=512)
        x, p, W = wigner_from_dm(rho, PARAMS0)
        X, P = np.meshgrid(x, p, indexing="ij")
        ref = np.exp(-(X ** 2 + P ** 2) / (2 * H)) / (2 * math.pi * H)
        dx = float(x[1] - x[0])
        dp = float(p[1] - p[0])
        assert float(np.abs(W - ref).sum() * dx * dp) < 1e-6


class TestLangevin:
    def test_seed_reproducibility(self):
        a = langevin_sample(500, SCH, PARAMS0, seed=7)
        b = langevin_sample(500, SCH, PARAMS0, seed=7)
        c = langevin_sample(500, SCH, PARAMS0, seed=8)
        assert np.array_equal(a[3].p, b[3].p)
        assert not np.array_equal(a[3].p, c[3].p)

    def test_initial_ensemble_moments(self):
        ens = langevin_sample(400_000, SCH, PARAMS0, seed=1)[0]
        assert float(ens.x.mean()) == pytest.approx(0.0, abs=3e-3)
        assert float(ens.x.var()) == pytest.approx(H, rel=1e-2)
        assert float(ens.p.var()) == pytest.approx(H, rel=1e-2)

    def test_closed_kick_map(self):
        # with D = 0, window 2 fixes x and adds tau2 * x^2 to p
        ens = langevin_sample(2000, SCH, PARAMS0, seed=3)
        x1, p1 = ens[1].x, ens[1].p
        x2, p2 = ens[2].x, ens[2].p
        assert np.abs(x2 - x1).max() < 1e-12
        assert np.abs(p2 - p1 - SCH.tau2 * x1 ** 2).max() < 1e-5

    def test_closed_stretch_map(self):
        ens = langevin_sample(2000, SCH, PARAMS0, seed=3)
        x0, p0 = ens[0].x, ens[0].p
        # Euler integration of dx = chi x dt has O(dt) global error ~6e-4
        ratio = ens[1].x / x0
        assert np.abs(ratio - math.exp(SCH.tau1)).max() < 2e-3
        assert np.abs(ens[1].p * math.exp(SCH.tau1) - p0).max() < 2e-3

    def test_diffusion_broadens(self):
        d_params = SemiclassicalParams(hbar=2 * H, D=H ** (4.0 / 3.0))
        closed = langevin_sample(50_000, SCH, PARAMS0, seed=5)[3]
        noisy = langevin_sample(50_000, SCH, d_params, seed=5)[3]
        assert noisy.p.var() > closed.p.var()

    def test_histogram_against_closed_form(self):
        ens = langevin_sample(150_000, SCH, PARAMS0, seed=0)[3]
        hist = histogram_distribution(ens.p, 96, -8.0, 16.0)
        ref = classical_momentum_pdf(hist.p, SCH.tau1, SCH.tau2, SCH.tau3, H)
        assert float(np.abs(hist.q - ref).sum() * hist.dp) < 0.04

    def test_invalid_arguments(self):
        with pytest.raises(InvalidParameterError):
            langevin_sample(0, SCH, PARAMS0)
        with pytest.raises(InvalidParameterError):
            langevin_sample(10, SCH, PARAMS0, dt=0.01)
