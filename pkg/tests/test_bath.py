import numpy as np
import pytest
from scipy.integrate import quad

from regdeph.bath import (
    BathSpectrum,
    GaussianPeakCoupling,
    PowerLawCoupling,
    coth_half,
    discretize_spectrum,
    gaussian_peak_modes,
    spectral_moments,
    thermal_occupation,
)
from regdeph.regimes import damping_scale


class TestThermalOccupation:
    def test_zero_temperature(self):
        assert thermal_occupation(1.0, 0.0) == 0.0

    def test_ln2_point(self):
        # exp(ln 2) - 1 = 1
        assert thermal_occupation(np.log(2.0), 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_high_temperature_value(self):
        # frozen from a 30-digit evaluation of 1/(exp(1/100) - 1)
        assert thermal_occupation(1.0, 100.0) == pytest.approx(99.5008333319444, abs=1e-10)

    @pytest.mark.parametrize("omega", [0.0, -1.0])
    def test_nonpositive_frequency_rejected(self, omega):
        with pytest.raises(ValueError):
            thermal_occupation(omega, 1.0)

    def test_monotone_in_temperature_and_frequency(self):
        temps = np.linspace(0.1, 5.0, 40)
        occ_t = [thermal_occupation(1.0, t) for t in temps]
        assert np.all(np.diff(occ_t) > 0)
        omegas = np.linspace(0.2, 6.0, 40)
        occ_w = [thermal_occupation(w, 1.0) for w in omegas]
        assert np.all(np.diff(occ_w) < 0)


def test_coth_half_zero_temperature_limit():
    assert np.array_equal(coth_half(np.array([0.3, 2.0]), 0.0), [1.0, 1.0])


class TestDiscretize:
    def test_degenerate_grid_single_frequency(self):
        bath = discretize_spectrum(PowerLawCoupling(), v=1.0, n_freq=1, omega_max=2.0)
        assert np.unique(bath.omega).tolist() == [2.0]
        # 1-D shells carry the +k/-k pair with the weight split evenly
        assert bath.n_modes == 2
        assert bath.g2[0] == bath.g2[1]
        assert np.allclose(bath.k[0], -bath.k[1])

    def test_ohmic_weight_vanishes_at_zero_frequency(self):
        assert PowerLawCoupling(exponent=1.0).g2(0.0) == 0.0

    def test_grid_refinement_converges(self):
        vals = []
        for n in (10_000, 20_000):
            bath = discretize_spectrum(PowerLawCoupling(1.0, 1.0, 1.0), v=1.0,
                                       n_freq=n, omega_max=10.0)
            vals.append(damping_scale(bath, 3.0))
        assert abs(vals[1] / vals[0] - 1.0) < 1e-3

    def test_mode_set_is_inversion_symmetric(self):
        bath = discretize_spectrum(PowerLawCoupling(), v=2.0, n_freq=16, omega_max=4.0)
        kset = {tuple(np.round(k, 12)) for k in bath.k}
        assert all(tuple(np.round(-np.array(k), 12)) in kset for k in kset)

    def test_three_dimensional_directions(self):
        bath = discretize_spectrum(PowerLawCoupling(), v=1.0, dimensionality=3,
                                   n_freq=5, omega_max=2.0, n_directions=14)
        assert bath.n_modes == 5 * 14
        norms = np.linalg.norm(bath.k, axis=1)
        assert np.allclose(bath.v * norms, bath.omega)
        kset = {tuple(np.round(k, 10)) for k in bath.k}
        assert all(tuple(np.round(-np.array(k), 10)) in kset for k in kset)

    def test_bad_inputs_rejected(self):
        with pytest.raises(ValueError):
            discretize_spectrum(PowerLawCoupling(), v=1.0, n_freq=0, omega_max=1.0)
        with pytest.raises(ValueError):
            discretize_spectrum(PowerLawCoupling(), v=1.0, n_freq=4, omega_max=-1.0)


class TestBathSpectrum:
    def test_rejects_zero_frequency_mode(self):
        with pytest.raises(ValueError):
            BathSpectrum(omega=np.array([0.0]), k=np.zeros((1, 3)),
                         g2=np.array([1.0]), v=1.0)

    def test_rejects_dispersion_violation(self):
        with pytest.raises(ValueError):
            BathSpectrum(omega=np.array([1.0]), k=np.array([[2.0, 0, 0]]),
                         g2=np.array([1.0]), v=1.0)

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            BathSpectrum(omega=np.array([1.0]), k=np.array([[1.0, 0, 0]]),
                         g2=np.array([-1.0]), v=1.0)

    def test_occupation_and_immutability(self):
        bath = discretize_spectrum(PowerLawCoupling(), v=1.0, n_freq=4, omega_max=2.0,
                                   temperature=1.0)
        occ = bath.occupation()
        assert np.all(occ > 0)
        with pytest.raises(ValueError):
            bath.omega[0] = 5.0

    def test_csv_rows(self):
        bath = discretize_spectrum(PowerLawCoupling(), v=1.0, n_freq=1, omega_max=2.0)
        rows = list(bath.modes_csv_rows())
        assert len(rows) == bath.n_modes
        assert rows[0][0] == 2.0


class TestSpectralMoments:
    def test_point_mass(self):
        bath = BathSpectrum(omega=np.array([3.0]), k=np.array([[3.0, 0, 0]]),
                            g2=np.array([0.5]), v=1.0)
        m = spectral_moments(bath)
        assert (m.mean1, m.mean2) == (3.0, 3.0)
        assert (m.width1, m.width2) == (0.0, 0.0)

    def test_two_point_distribution(self):
        # equal channel weight needs g2 proportional to omega^2 at T = 0
        bath = BathSpectrum(omega=np.array([1.0, 3.0]),
                            k=np.array([[1.0, 0, 0], [3.0, 0, 0]]),
                            g2=np.array([1.0, 9.0]), v=1.0)
        m = spectral_moments(bath)
        assert m.mean1 == pytest.approx(2.0)
        assert m.width1 == pytest.approx(1.0)
        assert m.mean2 == pytest.approx(2.0)
        assert m.width2 == pytest.approx(1.0)

    def test_against_quadrature_oracle(self):
        # smooth phase-channel density (p = 2): grid moments vs direct quadrature
        bath = discretize_spectrum(PowerLawCoupling(1.0, 2.0, 1.0), v=1.0,
                                   n_freq=2000, omega_max=12.0)
        m = spectral_moments(bath)
        den = quad(lambda w: np.exp(-w), 0, 12)[0]
        mean = quad(lambda w: w * np.exp(-w), 0, 12)[0] / den
        var = quad(lambda w: (w - mean) ** 2 * np.exp(-w), 0, 12)[0] / den
        assert m.mean2 == pytest.approx(mean, rel=0.01)
        assert m.width2 == pytest.approx(np.sqrt(var), rel=0.01)

    def test_all_zero_weights_rejected(self):
        bath = BathSpectrum(omega=np.array([1.0]), k=np.array([[1.0, 0, 0]]),
                            g2=np.array([0.0]), v=1.0)
        with pytest.raises(ValueError):
            spectral_moments(bath)

    def test_time_reference_modulates_damping_channel(self):
        bath = discretize_spectrum(PowerLawCoupling(), v=1.0, n_freq=64, omega_max=6.0)
        base = spectral_moments(bath)
        modulated = spectral_moments(bath, t_ref=2.0)
        assert modulated.mean1 != base.mean1
        assert modulated.mean2 == base.mean2


def test_gaussian_peak_preset_moments():
    bath = gaussian_peak_modes(center=8.0, width=0.5, v=1.0, n_freq=401)
    m = spectral_moments(bath)
    assert m.mean2 == pytest.approx(8.0, rel=1e-3)
    assert m.width2 == pytest.approx(0.5, rel=1e-2)
    # the phase-channel weight is the Gaussian itself by construction
    h = bath.g2 / bath.omega**2
    h = h / h.max()
    peak_idx = np.argmax(h)
    assert bath.omega[peak_idx] == pytest.approx(8.0, abs=0.05)


def test_gaussian_peak_coupling_validation():
    with pytest.raises(ValueError):
        GaussianPeakCoupling(center=-1.0, width=0.5)
    with pytest.raises(ValueError):
        GaussianPeakCoupling(center=1.0, width=0.0)
