"""U-Net generator and patch-level conditional discriminator."""

import math

import torch
from torch import nn


class UnetBlock(nn.Module):
    """One encoder/decoder level with a skip connection, built recursively."""

    def __init__(self, outer_ch, inner_ch, submodule=None, outermost=False, innermost=False):
        super().__init__()
        self.outermost = outermost
        down_conv = nn.Conv2d(outer_ch, inner_ch, 4, stride=2, padding=1)
        if outermost:
            up = nn.ConvTranspose2d(inner_ch * 2, outer_ch, 4, stride=2, padding=1)
            self.down = nn.Sequential(down_conv)
            self.up = nn.Sequential(nn.ReLU(inplace=True), up, nn.Tanh())
        elif innermost:
            up = nn.ConvTranspose2d(inner_ch, outer_ch, 4, stride=2, padding=1)
            self.down = nn.Sequential(nn.LeakyReLU(0.2, inplace=True), down_conv)
            self.up = nn.Sequential(
                nn.ReLU(inplace=True), up, nn.InstanceNorm2d(outer_ch, affine=True)
            )
        else:
            up = nn.ConvTranspose2d(inner_ch * 2, outer_ch, 4, stride=2, padding=1)
            self.down = nn.Sequential(
                nn.LeakyReLU(0.2, inplace=True),
                down_conv,
                nn.InstanceNorm2d(inner_ch, affine=True),
            )
            self.up = nn.Sequential(
                nn.ReLU(inplace=True), up, nn.InstanceNorm2d(outer_ch, affine=True)
            )
        self.submodule = submodule

    def forward(self, x):
        y = self.down(x)
        if self.submodule is not None:
            y = self.submodule(y)
        y = self.up(y)
        if self.outermost:
            return y
        return torch.cat([x, y], dim=1)


class Generator(nn.Module):
    """Image-to-image U-Net: depth log2(resolution) stride-2 stages."""

    def __init__(self, resolution: int, base_channels: int = 32, max_channels: int = 256):
        super().__init__()
        depth = int(math.log2(resolution))
        if 2**depth != resolution or depth < 3:
            raise ValueError(f"resolution must be a power of two >= 8, got {resolution}")
        self.resolution = resolution
        self.depth = depth

        chans = [min(base_channels * 2**i, max_channels) for i in range(depth)]
        # innermost level first
        block = UnetBlock(chans[depth - 2], chans[depth - 1], innermost=True)
        for level in range(depth - 3, -1, -1):
            block = UnetBlock(chans[level], chans[level + 1], submodule=block)
        self.net = UnetBlock(3, chans[0], submodule=block, outermost=True)

    def forward(self, condition):
        if condition.shape[-1] != self.resolution or condition.shape[-2] != self.resolution:
            raise ValueError(
                f"expected {self.resolution}x{self.resolution} input, "
                f"got {condition.shape[-2]}x{condition.shape[-1]}"
            )
        return self.net(condition)


class PatchDiscriminator(nn.Module):
    """Conditional real/fake classifier over local patches.

    Sees the condition and the candidate frame concatenated channel-wise and
    emits one logit per patch.
    """

    def __init__(self, base_channels: int = 32):
        super().__init__()
        c = base_channels
        self.net = nn.Sequential(
            nn.Conv2d(6, c, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(c, c * 2, 4, stride=2, padding=1),
            nn.InstanceNorm2d(c * 2, affine=True),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(c * 2, c * 4, 4, stride=2, padding=1),
            nn.InstanceNorm2d(c * 4, affine=True),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(c * 4, 1, 4, stride=1, padding=1),
        )

    def forward(self, condition, image):
        return self.net(torch.cat([condition, image], dim=1))


def to_tensor(img) -> torch.Tensor:
    """uint8 HWC image to a [-1, 1] float CHW tensor with batch dim."""
    t = torch.from_numpy(img.copy()).permute(2, 0, 1).float()
    return (t / 127.5 - 1.0).unsqueeze(0)


def to_image(t: torch.Tensor):
    """[-1, 1] float tensor back to a uint8 HWC array."""
    arr = ((t.squeeze(0).permute(1, 2, 0) + 1.0) * 127.5).clamp(0, 255)
    return arr.round().byte().numpy()
