import numpy as np
import pytest

from chiptrap.experiment import (
    RB87_NU_COEFF,
    RB87_OMEGA_COEFF,
    RB87_RATIO_COEFF,
    Coefficients,
    bias_scan,
    bias_values,
    from_experimental,
    gradient_for,
    omega_ratio,
    panels,
    to_experimental,
    trap_frequency,
)
from chiptrap.resonance import Resonance

# ground resonance at rho^2 = 0.2 on the default grid (m = 0), and the
# m = -1 / m = +1 splitting there
GROUND = Resonance(E=1.05682056, Gamma=1.0202845e-3, m=0, stability=1e-9, label=0, rho_sq=0.2)
SPLIT = 0.1542


def test_caption_point():
    pt = to_experimental(GROUND, 0.2, 0.05, splitting=SPLIT)
    assert pt.G == pytest.approx(0.2 * 0.05**1.5 / 9.25e-5)
    assert pt.nu_T == pytest.approx(129.47 * pt.G / np.sqrt(0.05))
    assert pt.G == pytest.approx(25.0, rel=0.05)
    assert pt.nu_T == pytest.approx(14.5e3, rel=0.05)
    assert pt.lifetime == pytest.approx(0.070, rel=0.10)
    assert pt.splitting == pytest.approx(2.2e3, rel=0.10)
    assert pt.omega_ratio == pytest.approx(0.2)
    assert pt.Gamma_exp == pytest.approx(2 * np.pi * pt.nu_T * GROUND.Gamma)
    assert pt.lifetime_text().endswith("ms")


def test_zero_width_is_stable():
    res = Resonance(E=1.0, Gamma=0.0, m=0, stability=0.0, rho_sq=0.01, kind="bound")
    pt = to_experimental(res, 0.01, 0.1)
    assert pt.stable and pt.lifetime_text() == "stable"
    assert np.isnan(pt.splitting)
    assert from_experimental(pt)[1] == 0.0


@pytest.mark.parametrize("bz", [0.0, -0.1, float("nan")])
def test_nonpositive_bias_rejected(bz):
    with pytest.raises(ValueError):
        to_experimental(GROUND, 0.2, bz)


def test_rho_mismatch_rejected():
    with pytest.raises(ValueError):
        to_experimental(GROUND, 0.25, 0.05)


@pytest.mark.parametrize("bz", [0.01, 0.05, 0.7])
def test_round_trip(bz):
    rho_sq, gamma = from_experimental(to_experimental(GROUND, 0.2, bz))
    assert rho_sq == pytest.approx(0.2, rel=1e-10)
    assert gamma == pytest.approx(GROUND.Gamma, rel=1e-10)


def test_scaling_relations():
    G, bz = 12.0, 0.3
    assert omega_ratio(G, bz) == pytest.approx(RB87_RATIO_COEFF * G / bz**1.5)
    assert trap_frequency(G, bz) == pytest.approx(RB87_NU_COEFF * G / np.sqrt(bz))
    assert Coefficients.tabulated().omega == pytest.approx(RB87_OMEGA_COEFF, rel=1e-4)
    assert gradient_for(omega_ratio(G, bz), bz) == pytest.approx(G)


def test_lifetime_times_bias_is_constant_along_scan():
    scan = bias_scan(0.2, GROUND)
    assert len(scan) == 25
    assert scan[0].B_z == pytest.approx(0.01) and scan[-1].B_z == pytest.approx(1.0)
    products = np.array([p.lifetime * p.B_z for p in scan])
    assert np.allclose(products, products[0], rtol=1e-12)
    assert all(p.omega_ratio == pytest.approx(0.2) for p in scan)


def test_bias_values_validation():
    with pytest.raises(ValueError):
        bias_values(1.0, 0.5)
    with pytest.raises(ValueError):
        bias_values(-1.0, 0.5)


def test_four_panels_and_missing_data():
    data = {rs: (Resonance(E=1.0, Gamma=1e-3 * rs, m=0, stability=0, rho_sq=rs), 0.1) for rs in (0.2, 0.25, 0.31, 0.4)}
    out = panels(data, B_z_values=[0.05, 0.1])
    assert list(out) == [0.2, 0.25, 0.31, 0.4]
    assert all(len(v) == 2 for v in out.values())
    with pytest.raises(LookupError):
        bias_scan(0.3, None)


def test_constants_versus_tabulated():
    from_constants = Coefficients.from_species()
    tab = Coefficients.tabulated()
    assert from_constants.ratio / tab.ratio == pytest.approx(0.9855, abs=1e-3)
    assert from_constants.nu / tab.nu == pytest.approx(0.9854, abs=1e-3)
    assert from_constants.source.startswith("constants")
