import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import humanfriendly.tables
import jsonpickle

from Errors import ParameterError, ShapeError
from ImageTypes import BinaryMask, ProbabilityMap

logger = logging.getLogger(__name__)


class LayerKind(str, Enum):
    ATROUS_CONV = 'atrous_conv'
    CONV1X1 = 'conv1x1'
    GLOBAL_AVG_POOL = 'global_avg_pool'
    CONCAT = 'concat'
    RESIDUAL_ADD = 'residual_add'
    UPSAMPLE = 'upsample'
    BATCH_NORM = 'batch_norm'
    RELU = 'relu'


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    kernel: int = 1
    stride: int = 1
    rate: int = 1
    padding: int = 0
    out_channels: int | None = None  # None keeps the input channel count

    def __post_init__(self):
        if self.rate < 1 or self.stride < 1 or self.kernel < 1 or self.padding < 0:
            raise ParameterError(f'illegal {self.kind.value} layer: {self}')
        if self.kind == LayerKind.CONV1X1 and (self.kernel != 1 or self.rate != 1):
            raise ParameterError('a 1x1 convolution has kernel 1 and rate 1')
        if self.out_channels is not None and self.out_channels < 1:
            raise ParameterError(f'out_channels must be positive, got {self.out_channels}')


@dataclass(frozen=True)
class BlockSpec:
    """BN -> ReLU -> atrous conv, added to a strided 1x1 projection of the block input."""
    layers: tuple[LayerSpec, ...]
    shortcut: LayerSpec
    residual: bool = True

    @property
    def stride(self) -> int:
        return math.prod(layer.stride for layer in self.layers)


@dataclass(frozen=True)
class BranchSpec:
    name: str
    layers: tuple[LayerSpec, ...]

    @property
    def rate(self) -> int | None:
        rates = [layer.rate for layer in self.layers if layer.kind == LayerKind.ATROUS_CONV]
        return rates[0] if rates else None


@dataclass(frozen=True)
class DecoderSpec:
    skip_block: int
    skip_projection: LayerSpec
    refine: LayerSpec
    classifier: LayerSpec


@dataclass(frozen=True)
class TrainingSpec:
    learning_rate: float = 0.001
    steps: int = 30000
    batch_size: int = 8
    # stated as "the parameter of ReLU"; kept as a dropout-style annotation, nothing computes with it
    relu_parameter: float = 0.5
    threshold: float = 0.9


@dataclass(frozen=True)
class ArchitectureSpec:
    input_channels: int
    encoder_blocks: tuple[BlockSpec, ...]
    branches: tuple[BranchSpec, ...]
    compression: LayerSpec
    decoder: DecoderSpec
    training: TrainingSpec = field(default_factory=TrainingSpec)

    @property
    def branch_rates(self) -> tuple[int, ...]:
        return tuple(branch.rate for branch in self.branches if branch.rate is not None and branch.rate > 1)


@dataclass(frozen=True)
class Stage:
    name: str
    height: int
    width: int
    channels: int


@dataclass(frozen=True)
class ShapeTrace:
    stages: tuple[Stage, ...]

    def stage(self, name: str) -> Stage:
        for stage in self.stages:
            if stage.name == name:
                return stage
        raise KeyError(name)

    @property
    def final(self) -> Stage:
        return self.stages[-1]

    def to_dict(self) -> dict:
        return {'stages': [{'name': s.name, 'height': s.height, 'width': s.width, 'channels': s.channels}
                           for s in self.stages]}

    def to_json(self) -> str:
        return jsonpickle.encode(self.to_dict(), unpicklable=False, indent=4)

    def to_table(self) -> str:
        rows = [[s.name, s.height, s.width, s.channels] for s in self.stages]
        return humanfriendly.tables.format_pretty_table(rows, ['Stage', 'Height', 'Width', 'Channels'])


def build_pt_resnet_spec(branch_channels: int = 256,
                         fifth_branch: str = 'conv1x1',
                         block_channels: tuple[int, ...] = (256, 512, 1024, 2048)) -> ArchitectureSpec:
    blocks = tuple(
        BlockSpec(layers=(LayerSpec(LayerKind.BATCH_NORM),
                          LayerSpec(LayerKind.RELU),
                          LayerSpec(LayerKind.ATROUS_CONV, kernel=3, stride=2, rate=2, padding=2,
                                    out_channels=channels)),
                  shortcut=LayerSpec(LayerKind.CONV1X1, stride=2, out_channels=channels))
        for channels in block_channels)

    branches = [BranchSpec('global_avg_pool', (LayerSpec(LayerKind.GLOBAL_AVG_POOL),
                                               LayerSpec(LayerKind.CONV1X1, out_channels=branch_channels),
                                               LayerSpec(LayerKind.UPSAMPLE)))]
    for rate in (4, 8, 16):
        branches.append(BranchSpec(f'atrous_r{rate}', (LayerSpec(LayerKind.ATROUS_CONV, kernel=3, rate=rate,
                                                                 padding=rate, out_channels=branch_channels),)))
    if fifth_branch == 'conv1x1':
        branches.append(BranchSpec('conv1x1', (LayerSpec(LayerKind.CONV1X1, out_channels=branch_channels),)))
    elif fifth_branch == 'conv3x3':
        branches.append(BranchSpec('conv3x3', (LayerSpec(LayerKind.ATROUS_CONV, kernel=3, padding=1,
                                                         out_channels=branch_channels),)))
    else:
        raise ParameterError(f'unknown fifth branch {fifth_branch!r}')

    spec = ArchitectureSpec(
        input_channels=7,
        encoder_blocks=blocks,
        branches=tuple(branches),
        compression=LayerSpec(LayerKind.CONV1X1, out_channels=branch_channels),
        decoder=DecoderSpec(skip_block=2,
                            skip_projection=LayerSpec(LayerKind.CONV1X1, out_channels=48),
                            refine=LayerSpec(LayerKind.ATROUS_CONV, kernel=3, padding=1, out_channels=256),
                            classifier=LayerSpec(LayerKind.CONV1X1, out_channels=1)))
    validate_spec(spec)
    return spec


def validate_spec(spec: ArchitectureSpec):
    problems = []
    if spec.input_channels != 7:
        problems.append(f'input has {spec.input_channels} channels, expected 7')
    if len(spec.encoder_blocks) != 4:
        problems.append(f'{len(spec.encoder_blocks)} encoder blocks, expected 4')
    for i, block in enumerate(spec.encoder_blocks, 1):
        if block.stride != 2 or block.shortcut.stride != 2:
            problems.append(f'block {i} has stride {block.stride}, expected 2')
        if not block.residual:
            problems.append(f'block {i} has no residual add')
    if len(spec.branches) != 5:
        problems.append(f'{len(spec.branches)} head branches, expected 5')
    if spec.branch_rates != (4, 8, 16):
        problems.append(f'atrous branch rates {spec.branch_rates}, expected (4, 8, 16)')
    pools = [b for b in spec.branches if any(layer.kind == LayerKind.GLOBAL_AVG_POOL for layer in b.layers)]
    if len(pools) != 1:
        problems.append(f'{len(pools)} global average pooling branches, expected 1')
    if spec.compression.kind != LayerKind.CONV1X1:
        problems.append('head compression must be a 1x1 convolution')
    if spec.decoder.skip_block != 2:
        problems.append(f'decoder skip from block {spec.decoder.skip_block}, expected block 2')
    if problems:
        raise ShapeError('; '.join(problems), stage='spec')


def conv_out_extent(n: int, kernel: int, stride: int, rate: int, padding: int) -> int:
    if n < 1 or kernel < 1 or stride < 1 or rate < 1 or padding < 0:
        raise ParameterError(f'illegal convolution arguments n={n} kernel={kernel} stride={stride} '
                             f'rate={rate} padding={padding}')
    out = (n + 2 * padding - rate * (kernel - 1) - 1) // stride + 1
    if out <= 0:
        raise ShapeError(f'extent {n} collapses to {out}')
    return out


def _apply(layer: LayerSpec, dims: tuple[int, int, int], name: str,
           target: tuple[int, int] | None = None) -> tuple[int, int, int]:
    h, w, c = dims
    channels = layer.out_channels or c
    try:
        if layer.kind in (LayerKind.ATROUS_CONV, LayerKind.CONV1X1):
            return (conv_out_extent(h, layer.kernel, layer.stride, layer.rate, layer.padding),
                    conv_out_extent(w, layer.kernel, layer.stride, layer.rate, layer.padding),
                    channels)
    except ShapeError as e:
        raise ShapeError(str(e), stage=name) from e
    if layer.kind == LayerKind.GLOBAL_AVG_POOL:
        return 1, 1, c
    if layer.kind == LayerKind.UPSAMPLE:
        return target[0], target[1], c
    return h, w, c


def trace_shapes(spec: ArchitectureSpec, input_shape: tuple[int, int, int]) -> ShapeTrace:
    validate_spec(spec)
    height, width, channels = input_shape
    if height < 16 or width < 16:
        raise ParameterError(f'input {height}x{width} is smaller than 16x16')
    if channels != spec.input_channels:
        raise ShapeError(f'{channels} input channels, network expects {spec.input_channels}', stage='input')

    stages = [Stage('input', height, width, channels)]

    def record(name, dims):
        stages.append(Stage(name, *dims))
        return dims

    dims = (height, width, channels)
    block_outputs = []
    for i, block in enumerate(spec.encoder_blocks, 1):
        block_input = dims
        for layer in block.layers:
            dims = record(f'block{i}.{layer.kind.value}', _apply(layer, dims, f'block{i}.{layer.kind.value}'))
        shortcut = record(f'block{i}.shortcut', _apply(block.shortcut, block_input, f'block{i}.shortcut'))
        if shortcut != dims:
            raise ShapeError(f'residual operands differ: {shortcut} vs {dims}', stage=f'block{i}.residual_add')
        dims = record(f'block{i}', dims)
        block_outputs.append(dims)

    deep = block_outputs[-1]
    expected = (math.ceil(height / 16), math.ceil(width / 16))
    if deep[:2] != expected:
        raise ShapeError(f'block 4 extent {deep[:2]}, expected {expected}', stage='block4')

    branch_outputs = []
    for branch in spec.branches:
        branch_dims = deep
        for layer in branch.layers:
            name = f'head.{branch.name}.{layer.kind.value}'
            branch_dims = record(name, _apply(layer, branch_dims, name, target=deep[:2]))
        if branch_dims[:2] != deep[:2]:
            raise ShapeError(f'branch output {branch_dims[:2]} does not match {deep[:2]}', stage=f'head.{branch.name}')
        branch_outputs.append(branch_dims)
    dims = record('head.concat', (deep[0], deep[1], sum(b[2] for b in branch_outputs)))
    dims = record('head.compress', _apply(spec.compression, dims, 'head.compress'))

    decoder = spec.decoder
    skip = block_outputs[decoder.skip_block - 1]
    dims = record('decoder.upsample_to_skip', _apply(LayerSpec(LayerKind.UPSAMPLE), dims, '', target=skip[:2]))
    projected = record('decoder.skip_projection', _apply(decoder.skip_projection, skip, 'decoder.skip_projection'))
    dims = record('decoder.concat', (skip[0], skip[1], dims[2] + projected[2]))
    dims = record('decoder.refine', _apply(decoder.refine, dims, 'decoder.refine'))
    dims = record('decoder.classifier', _apply(decoder.classifier, dims, 'decoder.classifier'))
    dims = record('decoder.upsample_to_input', _apply(LayerSpec(LayerKind.UPSAMPLE), dims, '',
                                                      target=(height, width)))
    record('probability', dims)
    logger.debug('traced %d stages for %dx%d input', len(stages), height, width)
    return ShapeTrace(tuple(stages))


def threshold_probability(p: ProbabilityMap, t: float) -> BinaryMask:
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f'threshold must lie in [0, 1], got {t}')
    return BinaryMask(p.probs > t)
