import math

import pytest

from laemec.channel import (ChannelParams, LinkKind, Position3D, a2g_gain,
                            a2h_gain, g2g_gain, g2h_gain, link_gain,
                            link_geometry, link_kind, link_rate,
                            los_probability)

PARAMS = ChannelParams()


class TestLinkGeometry:
    def test_vertical_link(self):
        d, phi = link_geometry(Position3D(0, 0, 0), Position3D(0, 0, 100))
        assert d == pytest.approx(100.0)
        assert phi == pytest.approx(90.0)

    def test_horizontal_link(self):
        d, phi = link_geometry(Position3D(0, 0, 0), Position3D(100, 0, 0))
        assert d == pytest.approx(100.0)
        assert phi == pytest.approx(0.0)

    def test_345_triangle(self):
        d, phi = link_geometry(Position3D(0, 0, 0), Position3D(3, 4, 0))
        assert d == pytest.approx(5.0)
        assert phi == pytest.approx(0.0)

    def test_coincident_positions_rejected(self):
        with pytest.raises(ValueError):
            link_geometry(Position3D(1, 2, 3), Position3D(1, 2, 3))

    def test_elevation_range(self):
        for dz in (1.0, 57.0, 1234.0):
            _, phi = link_geometry(Position3D(0, 0, 0),
                                   Position3D(40, 9, dz))
            assert 0.0 <= phi <= 90.0


class TestG2G:
    def test_reference_distance(self):
        assert g2g_gain(1.0, 1e-3) == pytest.approx(1e-3)

    def test_inverse_square(self):
        assert g2g_gain(10.0, 1e-3) == pytest.approx(1e-5)

    def test_hand_computed(self):
        assert g2g_gain(250.0, 1e-3) == pytest.approx(1.6e-8)

    def test_nonpositive_distance(self):
        with pytest.raises(ValueError):
            g2g_gain(0.0, 1e-3)


class TestLosProbability:
    def test_exponent_vanishes_at_kappa1(self):
        assert los_probability(10.0, 10.0, 0.6) == pytest.approx(1.0 / 11.0)

    def test_high_elevation_saturates(self):
        assert los_probability(90.0, 10.0, 0.6) == pytest.approx(1.0,
                                                                 abs=1e-9)

    def test_zero_elevation(self):
        expected = 1.0 / (1.0 + 10.0 * math.exp(6.0))
        assert los_probability(0.0, 10.0, 0.6) == pytest.approx(expected)
        assert expected == pytest.approx(2.48e-4, rel=2e-3)

    def test_strictly_increasing_and_bounded(self):
        # strict growth holds until the sigmoid saturates in doubles
        values = [los_probability(phi, 10.0, 0.6) for phi in range(0, 71, 5)]
        for lo, hi in zip(values, values[1:]):
            assert lo < hi
        full = [los_probability(phi, 10.0, 0.6) for phi in range(0, 91, 5)]
        for lo, hi in zip(full, full[1:]):
            assert lo <= hi
        assert all(0.0 < v <= 1.0 for v in full)


class TestG2H:
    def test_zero_path_loss(self):
        # distance where 4*pi*fc*l/c = 1 and zero excess losses
        p = ChannelParams(eta_los=1e-12, eta_nlos=1e-12)
        l = p.c / (4.0 * math.pi * p.fc)
        assert g2h_gain(l, 45.0, p) == pytest.approx(1.0, rel=1e-9)

    def test_hand_computed_vertical(self):
        # fc=100 MHz, l=20 km, phi=90: L ~ 98.4626 + 0.1 dB
        gain = g2h_gain(20000.0, 90.0, PARAMS)
        assert gain == pytest.approx(1.39e-10, rel=5e-3)

    def test_rho_mixing_at_zero_elevation(self):
        l = 20000.0
        loss_90 = -10.0 * math.log10(g2h_gain(l, 90.0, PARAMS))
        loss_0 = -10.0 * math.log10(g2h_gain(l, 0.0, PARAMS))
        rho0 = los_probability(0.0, PARAMS.kappa1, PARAMS.kappa2)
        expected_delta = (1.0 - rho0) * (PARAMS.eta_nlos - PARAMS.eta_los)
        assert loss_0 - loss_90 == pytest.approx(expected_delta, rel=1e-6)


class TestA2G:
    def test_equal_branches_collapse(self):
        p = ChannelParams(eta_los=5.0, eta_nlos=5.0)
        a2g = a2g_gain(300.0, 40.0, p)
        g2h = g2h_gain(300.0, 40.0, p)
        assert a2g == pytest.approx(g2h, rel=1e-12)

    def test_hand_computed(self):
        # AU at 200 m altitude, 300 m slant, elevation ~41.8 deg
        gain = a2g_gain(300.0, 41.8, PARAMS)
        assert gain == pytest.approx(10 ** (-6.2084), rel=1e-3)

    def test_mixture_endpoint(self):
        # a kappa1 -> huge forces rho -> 0, i.e. the NLoS branch alone
        p = ChannelParams(kappa1=1e6, kappa2=0.6)
        gain = a2g_gain(300.0, 41.8, p)
        fspl = 20.0 * math.log10(4.0 * math.pi * p.fc * 300.0 / p.c)
        assert gain == pytest.approx(10 ** (-(fspl + p.eta_nlos) / 10.0),
                                     rel=1e-9)

    def test_between_branch_bounds(self):
        fspl = 20.0 * math.log10(4.0 * math.pi * PARAMS.fc * 500.0 / PARAMS.c)
        lo = 10 ** (-(fspl + PARAMS.eta_nlos) / 10.0)
        hi = 10 ** (-(fspl + PARAMS.eta_los) / 10.0)
        gain = a2g_gain(500.0, 30.0, PARAMS)
        assert lo <= gain <= hi


class TestA2H:
    def test_hand_computed_1km(self):
        assert a2h_gain(1000.0, PARAMS) == pytest.approx(5.6885e-8, rel=1e-4)

    def test_hand_computed_hap_altitude(self):
        assert a2h_gain(20000.0, PARAMS) == pytest.approx(1.4221e-10,
                                                          rel=1e-4)

    def test_distance_doubling_adds_6db(self):
        l1 = -10.0 * math.log10(a2h_gain(3000.0, PARAMS))
        l2 = -10.0 * math.log10(a2h_gain(6000.0, PARAMS))
        assert l2 - l1 == pytest.approx(20.0 * math.log10(2.0), rel=1e-9)


class TestLinkRate:
    def test_unit_snr(self):
        p = ChannelParams(bandwidth=1e7, noise_power=1e-12)
        rate = link_rate(p, 1e-3, 1e-9)
        assert rate == pytest.approx(p.bandwidth)

    def test_hand_computed(self):
        p = ChannelParams(bandwidth=1e7, noise_power=7.96159e-13)
        rate = link_rate(p, 0.2, 1e-9)
        assert rate == pytest.approx(7.98e7, rel=1e-3)

    def test_vanishing_gain(self):
        p = ChannelParams()
        assert link_rate(p, 0.2, 1e-30) < 1.0

    def test_bandwidth_linearity(self):
        p1 = ChannelParams(bandwidth=1e7)
        p2 = ChannelParams(bandwidth=2e7)
        assert link_rate(p2, 0.2, 1e-9) == pytest.approx(
            2.0 * link_rate(p1, 0.2, 1e-9), rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            link_rate(PARAMS, 0.0, 1e-9)
        with pytest.raises(ValueError):
            link_rate(PARAMS, 0.2, 0.0)


class TestLinkDispatch:
    def test_kind_mapping(self):
        assert link_kind(False, False) is LinkKind.G2G
        assert link_kind(False, True) is LinkKind.G2H
        assert link_kind(True, False) is LinkKind.A2G
        assert link_kind(True, True) is LinkKind.A2H

    @pytest.mark.parametrize("kind", list(LinkKind))
    def test_gain_decreasing_in_distance(self, kind):
        gains = [link_gain(kind, d, 35.0, PARAMS)
                 for d in (50.0, 150.0, 400.0, 1200.0, 5000.0)]
        for near, far in zip(gains, gains[1:]):
            assert far < near

    @pytest.mark.parametrize("kind", list(LinkKind))
    def test_purity(self, kind):
        a = link_gain(kind, 321.0, 27.3, PARAMS)
        b = link_gain(kind, 321.0, 27.3, PARAMS)
        assert a == b
