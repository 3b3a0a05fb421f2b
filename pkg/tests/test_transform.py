"""Tests for the multi-channel correlation fusion."""

import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from fusestyle.core.transform import (
    MultiChannelCorrelation,
    channel_energy,
    correlation_route,
    lipschitz_bound,
    normalize,
)
from fusestyle.errors import ChannelMismatchError
from fusestyle.models.config import FusionMode


def seeded(seed: int) -> torch.Generator:
    return torch.Generator().manual_seed(seed)


def randomized_mcc(channels: int, mode: FusionMode, seed: int = 0) -> MultiChannelCorrelation:
    """Module with a non-trivial mixer so gains differ per channel."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        mcc = MultiChannelCorrelation(channels, mode).double()
        with torch.no_grad():
            mcc.mixer.weight.normal_(0.0, 0.5)
    return mcc


class TestCorrelationOracle:
    """The explicit N x N route equals energy-scaled content."""

    def test_random_pairs(self):
        """Should agree within 1e-5 relative error for 100 random pairs."""
        gen = seeded(0)
        for trial in range(100):
            channels = (1, 4, 16)[trial % 3]
            h = int(torch.randint(1, 9, (1,), generator=gen))
            w = int(torch.randint(1, 9, (1,), generator=gen))
            f_c = torch.randn(1, channels, h, w, generator=gen, dtype=torch.float64)
            f_s = torch.randn(1, channels, h, w, generator=gen, dtype=torch.float64)
            energy = channel_energy(f_s)[0]
            for ch in range(channels):
                explicit = correlation_route(f_c[0, ch].flatten(), f_s[0, ch].flatten())
                closed = energy[ch] * f_c[0, ch].flatten()
                rel = (explicit - closed).norm() / closed.norm().clamp_min(1e-300)
                assert rel < 1e-5

    def test_rejects_unequal_lengths(self):
        """Should refuse channels of different lengths."""
        with pytest.raises(ValueError):
            correlation_route(torch.ones(4), torch.ones(5))

    def test_energy_is_sum_of_squares(self):
        """Should not take a square root."""
        f = torch.tensor([[[[1.0, 2.0], [2.0, 0.0]]]])
        assert channel_energy(f).item() == 9.0


class TestContentAlignment:
    """Fused features are per-channel multiples of the content branch."""

    @pytest.mark.parametrize("mode", list(FusionMode))
    def test_ratio_spread(self, mode):
        """Should have a constant fused/content ratio per channel over 100 trials."""
        mcc = randomized_mcc(8, mode)
        gen = seeded(1)
        with torch.no_grad():
            for _ in range(100):
                content = mcc.content_branch(torch.randn(1, 8, 6, 5, generator=gen, dtype=torch.float64))
                gains = mcc.gains(torch.randn(1, 8, 7, 4, generator=gen, dtype=torch.float64))
                fused = mcc.fuse(content, gains)
                mask = content.abs() > 1e-6
                ratio = fused / torch.where(mask, content, torch.ones_like(content))
                for ch in range(8):
                    values = ratio[0, ch][mask[0, ch]]
                    if values.numel() > 1:
                        assert (values.max() - values.min()).item() < 1e-5


class TestLipschitzBound:
    """Fusion-stage sensitivity to content perturbations."""

    @pytest.mark.parametrize("mode", list(FusionMode))
    def test_no_violations(self, mode):
        """Should never amplify a perturbation beyond the gain bound."""
        mcc = randomized_mcc(8, mode, seed=3)
        gen = seeded(2)
        f_s = torch.randn(1, 8, 5, 5, generator=gen, dtype=torch.float64)
        bound = lipschitz_bound(mcc, f_s)
        with torch.no_grad():
            gains = mcc.gains(f_s)
            for _ in range(100):
                c = torch.randn(1, 8, 6, 6, generator=gen, dtype=torch.float64)
                delta = 0.1 * torch.randn(c.shape, generator=gen, dtype=torch.float64)
                change = (mcc.fuse(c + delta, gains) - mcc.fuse(c, gains)).norm()
                assert change <= bound * delta.norm() * (1 + 1e-12)

    def test_initial_bound_is_one(self):
        """Should start with unit gains."""
        mcc = MultiChannelCorrelation(4)
        assert lipschitz_bound(mcc, torch.randn(1, 4, 3, 3)) == 1.0

    @pytest.mark.parametrize("w", [-3.0, 0.25, 2.0])
    def test_scalar_bound(self, w):
        """Should equal |1 + w*e| for a single channel with mixer weight w."""
        mcc = MultiChannelCorrelation(1).double()
        with torch.no_grad():
            mcc.mixer.weight.fill_(w)
        f_s = torch.randn(1, 1, 4, 4, generator=seeded(8), dtype=torch.float64)
        with torch.no_grad():
            energy = mcc.energies(f_s).item()
            gain = mcc.gains(f_s)
            c = torch.randn(1, 1, 3, 3, generator=seeded(9), dtype=torch.float64)
            delta = torch.randn(1, 1, 3, 3, generator=seeded(10), dtype=torch.float64)
            change = mcc.fuse(c + delta, gain) - mcc.fuse(c, gain)
        assert lipschitz_bound(mcc, f_s) == pytest.approx(abs(1.0 + w * energy), rel=1e-12)
        expected = abs(1.0 + w * energy) * delta.norm().item()
        assert change.norm().item() == pytest.approx(expected, rel=1e-10)


class TestModes:
    """Multi-channel and channel-wise fusion."""

    def test_identity_mixer_matches_channel_wise(self):
        """Should coincide when the mixer is the identity matrix."""
        multi = randomized_mcc(6, FusionMode.MULTI_CHANNEL, seed=5)
        single = randomized_mcc(6, FusionMode.CHANNEL_WISE, seed=5)
        with torch.no_grad():
            multi.mixer.weight.copy_(torch.eye(6, dtype=torch.float64))
        gen = seeded(4)
        f_c = torch.randn(2, 6, 5, 7, generator=gen, dtype=torch.float64)
        f_s = torch.randn(2, 6, 4, 4, generator=gen, dtype=torch.float64)
        with torch.no_grad():
            assert torch.allclose(multi.gains(f_s), single.gains(f_s), rtol=0, atol=1e-12)
            assert torch.allclose(multi(f_c, f_s), single(f_c, f_s), rtol=0, atol=1e-12)

    def test_channel_wise_gains(self):
        """Should be 1 + own energy, ignoring the mixer."""
        mcc = randomized_mcc(4, FusionMode.CHANNEL_WISE)
        f_s = torch.randn(1, 4, 3, 3, dtype=torch.float64)
        with torch.no_grad():
            assert torch.allclose(mcc.gains(f_s), 1.0 + mcc.energies(f_s))

    def test_style_layout_permutation(self):
        """Should give the same gains for spatially shuffled style features."""
        mcc = randomized_mcc(4, FusionMode.MULTI_CHANNEL)
        f_s = torch.randn(1, 4, 6, 6, dtype=torch.float64)
        order = torch.randperm(36, generator=seeded(9))
        shuffled = f_s.flatten(2)[:, :, order].view_as(f_s)
        with torch.no_grad():
            assert torch.allclose(mcc.gains(f_s), mcc.gains(shuffled), atol=1e-12)

    def test_zero_style_keeps_content_branch(self):
        """Should leave the content branch unchanged for an all-zero style feature."""
        mcc = MultiChannelCorrelation(4)
        f_c = torch.randn(1, 4, 5, 5)
        with torch.no_grad():
            gains = mcc.gains(torch.zeros(1, 4, 3, 3))
            assert torch.equal(gains, torch.ones(1, 4))
            assert torch.equal(mcc.fuse(mcc.content_branch(f_c), gains), mcc.content_branch(f_c))

    def test_zero_mixer_ignores_style(self):
        """Should output proj_out(content_branch) exactly for any style while the mixer is zero."""
        mcc = MultiChannelCorrelation(4)
        gen = seeded(12)
        f_c = torch.randn(1, 4, 5, 5, generator=gen)
        f_s = 3.0 * torch.randn(1, 4, 3, 3, generator=gen) + 1.0
        with torch.no_grad():
            assert bool((mcc.energies(f_s) > 0).all())
            assert torch.equal(mcc(f_c, f_s), mcc.proj_out(mcc.content_branch(f_c)))

    def test_alpha_zero_is_content_branch(self):
        """Should reduce to the content branch at zero style strength."""
        mcc = randomized_mcc(4, FusionMode.MULTI_CHANNEL)
        content = torch.randn(1, 4, 3, 3, dtype=torch.float64)
        gains = torch.full((1, 4), 3.0, dtype=torch.float64)
        assert torch.equal(mcc.fuse(content, gains, alpha=0.0), content)
        assert torch.equal(mcc.fuse(content, gains, alpha=1.0), content * 3.0)

    def test_style_resolution_does_not_rescale_energy(self):
        """Should give equal energies for a style feature and its 2x nearest upsampling."""
        mcc = randomized_mcc(4, FusionMode.MULTI_CHANNEL)
        f_s = torch.randn(1, 4, 4, 4, dtype=torch.float64)
        big = torch.nn.functional.interpolate(f_s, scale_factor=2, mode="nearest")
        with torch.no_grad():
            assert torch.allclose(mcc.energies(f_s), mcc.energies(big), atol=1e-10)

    def test_channel_mismatch(self):
        """Should reject features with the wrong channel count."""
        mcc = MultiChannelCorrelation(4)
        with pytest.raises(ChannelMismatchError):
            mcc(torch.randn(1, 5, 3, 3), torch.randn(1, 4, 3, 3))


class TestNormalize:
    """Tests for instance normalization."""

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), scale=st.floats(1.0, 100.0), shift=st.floats(-50.0, 50.0))
    def test_idempotent(self, seed, scale, shift):
        """Should be (nearly) unchanged by a second normalization."""
        f = shift + scale * torch.randn(2, 3, 5, 5, generator=seeded(seed), dtype=torch.float64)
        once = normalize(f)
        assert torch.allclose(normalize(once), once, atol=1e-3)

    def test_zero_mean_unit_variance(self):
        """Should centre and scale every channel."""
        f = 3.0 + 2.0 * torch.randn(1, 2, 8, 8, dtype=torch.float64)
        out = normalize(f)
        var, mean = torch.var_mean(out, dim=(2, 3), correction=0)
        assert torch.allclose(mean, torch.zeros_like(mean), atol=1e-10)
        assert torch.allclose(var, torch.ones_like(var), atol=1e-3)

    def test_constant_channel_is_zero(self):
        """Should map a constant channel to zeros."""
        assert torch.equal(normalize(torch.full((1, 1, 4, 4), 7.0)), torch.zeros(1, 1, 4, 4))
