"""Two-branch recurrent illuminant network.

Branch "temporal" runs the backbone and a ConvLSTM over the input frames;
branch "shot" does the same over a pseudo zoom-out sequence cut from the shot
frame. Final hidden maps are concatenated, 2x2 max-pooled and mapped by two
1x1 convolutions with sigmoids to a 3-channel illumination map, whose spatial
mean is the estimate.

Parameters live in a flat ``dict[str, ndarray]`` so the optimizer, the
checkpoint format and the gradient checker all see the same names.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..color import Illuminant, check_image
from ..errors import EmptyInputError, ShapeError, ValidationError
from .convlstm import ConvLstmParams, ConvLstmState, conv_lstm_step, conv_lstm_step_backward
from .layers import conv2d, conv2d_backward, maxpool2, maxpool2_backward, sigmoid
from .zoom import pseudo_zoom_sequence, resize_frame

BRANCHES = ("temporal", "shot")
# arccos is clamped this far inside [-1, 1]; below ~0.03 deg the loss is flat
COS_CLAMP = 1e-7


@dataclass(frozen=True)
class BackboneConfig:
    """Stride-2 convolutions with ReLU; total stride is 2 ** len(channels)."""

    channels: tuple[int, ...] = (64, 128, 512)
    kernel_size: int = 3
    # "relu" mirrors SqueezeNet; "tanh" is smooth, for finite-difference checks
    activation: str = "relu"

    @property
    def stride(self) -> int:
        return 2 ** len(self.channels)


@dataclass(frozen=True)
class LstmConfig:
    hidden_channels: int = 128
    kernel_size: int = 5


@dataclass(frozen=True)
class HeadConfig:
    hidden_channels: int = 64


@dataclass(frozen=True)
class TccNetConfig:
    branches: int = 2
    input_size: int = 64
    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    lstm: tuple[LstmConfig, ...] = (LstmConfig(), LstmConfig())
    head: HeadConfig = field(default_factory=HeadConfig)
    share_backbone: bool = False

    def __post_init__(self):
        if self.branches not in (1, 2):
            raise ValidationError("branches must be 1 or 2")
        if len(self.lstm) != self.branches:
            raise ValidationError(f"{self.branches} branch(es) need {self.branches} LSTM spec(s)")
        for spec in self.lstm:
            if spec.kernel_size % 2 == 0 or spec.kernel_size < 1:
                raise ValidationError("LSTM kernel size must be odd")
        if self.backbone.kernel_size % 2 == 0:
            raise ValidationError("backbone kernel size must be odd")
        if self.backbone.activation not in ("relu", "tanh"):
            raise ValidationError(f"unknown backbone activation {self.backbone.activation!r}")
        if self.input_size % (self.backbone.stride * 2):
            raise ValidationError(
                f"input_size must be a multiple of {self.backbone.stride * 2}"
            )

    @property
    def branch_names(self) -> tuple[str, ...]:
        return BRANCHES[: self.branches]

    @property
    def map_size(self) -> int:
        """Side of the output illumination map."""
        return self.input_size // (self.backbone.stride * 2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["backbone"]["channels"] = list(self.backbone.channels)
        d["lstm"] = [asdict(s) for s in self.lstm]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TccNetConfig":
        return cls(
            branches=int(d["branches"]),
            input_size=int(d["input_size"]),
            backbone=BackboneConfig(
                tuple(d["backbone"]["channels"]),
                int(d["backbone"]["kernel_size"]),
                d["backbone"].get("activation", "relu"),
            ),
            lstm=tuple(LstmConfig(int(s["hidden_channels"]), int(s["kernel_size"])) for s in d["lstm"]),
            head=HeadConfig(int(d["head"]["hidden_channels"])),
            share_backbone=bool(d.get("share_backbone", False)),
        )


def model_g() -> TccNetConfig:
    """Full-width layout: two branches, H=128, K=5."""
    return TccNetConfig()


def desk(hidden: int = 8, kernel_size: int = 3, input_size: int = 32, branches: int = 2) -> TccNetConfig:
    """Small preset that trains in minutes on a CPU."""
    return TccNetConfig(
        branches=branches,
        input_size=input_size,
        backbone=BackboneConfig((8, 8, 8)),
        lstm=tuple(LstmConfig(hidden, kernel_size) for _ in range(branches)),
        head=HeadConfig(16),
    )


def tiny(branches: int = 2, activation: str = "tanh") -> TccNetConfig:
    """Smallest useful net, for gradient checks."""
    return TccNetConfig(
        branches=branches,
        input_size=16,
        backbone=BackboneConfig((3, 4, 4), activation=activation),
        lstm=tuple(LstmConfig(3, 3) for _ in range(branches)),
        head=HeadConfig(5),
    )

def small(branches: int = 2) -> TccNetConfig:
    """Two-branch net with 16-channel maps; enough capacity to memorize a few sequences."""
    return TccNetConfig(
        branches=branches,
        input_size=32,
        backbone=BackboneConfig((16, 16, 16)),
        lstm=tuple(LstmConfig(16, 3) for _ in range(branches)),
        head=HeadConfig(32),
    )


PRESETS = {"model-g": model_g, "desk": desk, "small": small, "tiny": tiny}


def backbone_prefix(config: TccNetConfig, branch: str) -> str:
    return "backbone." if config.share_backbone else f"{branch}.backbone."


def _uniform(rng, shape, fan_in):
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_params(config: TccNetConfig, seed: int = 0) -> dict[str, np.ndarray]:
    """Uniform +-1/sqrt(fan_in) everywhere; forget-gate biases start at 1."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    k = config.backbone.kernel_size
    for branch in config.branch_names:
        pre = backbone_prefix(config, branch)
        if pre + "conv0.weight" in params:
            continue
        cin = 3
        for n, cout in enumerate(config.backbone.channels):
            params[f"{pre}conv{n}.weight"] = _uniform(rng, (cout, cin, k, k), cin * k * k)
            params[f"{pre}conv{n}.bias"] = _uniform(rng, (cout,), cin * k * k)
            cin = cout
    for branch, spec in zip(config.branch_names, config.lstm):
        lstm = ConvLstmParams.init(config.backbone.channels[-1], spec.hidden_channels,
                                   spec.kernel_size, rng)
        for name, arr in lstm.as_dict().items():
            params[f"{branch}.lstm.{name}"] = arr
    concat = sum(s.hidden_channels for s in config.lstm)
    hid = config.head.hidden_channels
    params["head.conv0.weight"] = _uniform(rng, (hid, concat, 1, 1), concat)
    params["head.conv0.bias"] = _uniform(rng, (hid,), concat)
    params["head.conv1.weight"] = _uniform(rng, (3, hid, 1, 1), hid)
    params["head.conv1.bias"] = _uniform(rng, (3,), hid)
    return params


def check_params(config: TccNetConfig, params: dict[str, np.ndarray]) -> None:
    expected = init_params(config, seed=0)
    if set(expected) != set(params):
        missing = sorted(set(expected) - set(params))
        extra = sorted(set(params) - set(expected))
        raise ShapeError(f"parameter names differ; missing {missing[:3]}, unexpected {extra[:3]}")
    for name, arr in expected.items():
        if params[name].shape != arr.shape:
            raise ShapeError(f"{name}: shape {params[name].shape}, expected {arr.shape}")


def prepare_inputs(sequence: Sequence[np.ndarray], config: TccNetConfig) -> dict[str, list[np.ndarray]]:
    """Per-branch lists of (3, S, S) network inputs."""
    frames = [check_image(f, f"frame {i}") for i, f in enumerate(sequence)]
    if not frames:
        raise EmptyInputError("TCC-Net needs at least one frame")
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ShapeError(f"frame {i} has shape {f.shape}, expected {shape}")
    size = config.input_size
    to_chw = lambda img: np.ascontiguousarray(img.transpose(2, 0, 1))  # noqa: E731
    inputs = {"temporal": [to_chw(resize_frame(f, size)) for f in frames]}
    if config.branches == 2:
        inputs["shot"] = [to_chw(f) for f in pseudo_zoom_sequence(frames[-1], len(frames), size)]
    return inputs


def _backbone_forward(x, params, prefix, config):
    caches = []
    pad = config.backbone.kernel_size // 2
    for n in range(len(config.backbone.channels)):
        z, cc = conv2d(x, params[f"{prefix}conv{n}.weight"], params[f"{prefix}conv{n}.bias"], 2, pad)
        if config.backbone.activation == "relu":
            local = (z > 0).astype(z.dtype)
            x = z * local
        else:
            x = np.tanh(z)
            local = 1.0 - x * x
        # local holds d(activation)/dz
        caches.append((cc, local))
    return x, caches


def _backbone_backward(dout, caches, params, prefix, grads):
    for n in reversed(range(len(caches))):
        cc, local = caches[n]
        dz = dout * local
        w = params[f"{prefix}conv{n}.weight"]
        dout, dw, db = conv2d_backward(dz, cc, w, need_dx=n > 0)
        grads[f"{prefix}conv{n}.weight"] += dw
        grads[f"{prefix}conv{n}.bias"] += db


@dataclass
class ForwardResult:
    estimate: np.ndarray  # spatially averaged map, components in (0, 1)
    spatial_map: np.ndarray  # (3, h, w)
    steps: dict[str, int]
    cache: dict = field(repr=False, default_factory=dict)

    @property
    def illuminant(self) -> Illuminant:
        return Illuminant.from_array(self.estimate / np.linalg.norm(self.estimate))


def forward(sequence, config: TccNetConfig, params: dict[str, np.ndarray]) -> ForwardResult:
    inputs = prepare_inputs(sequence, config)
    branch_cache = {}
    steps = {}
    finals = []
    for branch, spec in zip(config.branch_names, config.lstm):
        pre = backbone_prefix(config, branch)
        lstm = ConvLstmParams.from_dict(params, f"{branch}.lstm.")
        state = None
        per_step = []
        for x in inputs[branch]:
            feat, bb_cache = _backbone_forward(x, params, pre, config)
            if state is None:
                state = ConvLstmState.zeros(spec.hidden_channels, *feat.shape[1:])
            state, lstm_cache = conv_lstm_step(feat, state, lstm, return_cache=True)
            per_step.append((bb_cache, lstm_cache))
        steps[branch] = len(per_step)
        branch_cache[branch] = (per_step, lstm)
        finals.append(state.hidden)

    cat = np.concatenate(finals)
    pooled, pool_cache = maxpool2(cat)
    z0, c0 = conv2d(pooled, params["head.conv0.weight"], params["head.conv0.bias"])
    a0 = sigmoid(z0)
    z1, c1 = conv2d(a0, params["head.conv1.weight"], params["head.conv1.bias"])
    spatial = sigmoid(z1)
    y = spatial.mean(axis=(1, 2))
    cache = dict(branches=branch_cache, split=[f.shape[0] for f in finals], pool=pool_cache,
                 c0=c0, a0=a0, c1=c1, spatial=spatial)
    return ForwardResult(y, spatial, steps, cache)


def angular_loss(estimate: np.ndarray, truth) -> tuple[float, np.ndarray]:
    """Angle in radians between `estimate` and `truth`, and its gradient w.r.t. estimate."""
    t = truth.as_array() if isinstance(truth, Illuminant) else np.asarray(truth, dtype=np.float64)
    t = t / np.linalg.norm(t)
    ny = float(np.linalg.norm(estimate))
    u = estimate / ny
    cos = float(u @ t)
    lo, hi = -1.0 + COS_CLAMP, 1.0 - COS_CLAMP
    clamped = min(hi, max(lo, cos))
    loss = math.acos(clamped)
    if clamped != cos:
        return loss, np.zeros_like(estimate)
    dcos = (t - cos * u) / ny
    return loss, -dcos / math.sqrt(1.0 - cos * cos)


def backward(result: ForwardResult, config: TccNetConfig, params: dict[str, np.ndarray],
             truth) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and exact gradients for every parameter, through time in both branches."""
    cache = result.cache
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    loss, dy = angular_loss(result.estimate, truth)

    spatial = cache["spatial"]
    hw = spatial.shape[1] * spatial.shape[2]
    dspatial = np.broadcast_to(dy[:, None, None] / hw, spatial.shape)
    dz1 = dspatial * spatial * (1.0 - spatial)
    da0, dw, db = conv2d_backward(dz1, cache["c1"], params["head.conv1.weight"])
    grads["head.conv1.weight"] += dw
    grads["head.conv1.bias"] += db
    a0 = cache["a0"]
    dz0 = da0 * a0 * (1.0 - a0)
    dpooled, dw, db = conv2d_backward(dz0, cache["c0"], params["head.conv0.weight"])
    grads["head.conv0.weight"] += dw
    grads["head.conv0.bias"] += db
    dcat = maxpool2_backward(dpooled, cache["pool"])

    offset = 0
    for branch, width in zip(config.branch_names, cache["split"]):
        dh = dcat[offset:offset + width]
        offset += width
        per_step, lstm = cache["branches"][branch]
        pre = backbone_prefix(config, branch)
        dc = np.zeros_like(dh)
        for bb_cache, lstm_cache in reversed(per_step):
            dx, dh, dc, g = conv_lstm_step_backward(dh, dc, lstm_cache, lstm)
            for name, val in g.items():
                grads[f"{branch}.lstm.{name}"] += val
            _backbone_backward(dx, bb_cache, params, pre, grads)
    return loss, grads


def tcc_net_forward(sequence, config: TccNetConfig, params) -> tuple[Illuminant, np.ndarray]:
    """Illuminant estimate and the (3, h, w) spatial illumination map."""
    r = forward(sequence, config, params)
    return r.illuminant, r.spatial_map


def loss_and_gradients(sequence, config: TccNetConfig, params, truth):
    result = forward(sequence, config, params)
    return backward(result, config, params, truth)


def tcc_net_backward(sequence, config: TccNetConfig, params, truth) -> dict[str, np.ndarray]:
    """Gradient of the angular loss (radians) w.r.t. every parameter tensor."""
    return loss_and_gradients(sequence, config, params, truth)[1]
