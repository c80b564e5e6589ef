import argparse

from SceneGenerator import Obstacle

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def obstacle(text: str) -> Obstacle:
    try:
        u0, v0, width, height, disparity = text.split(',')
        return Obstacle(int(u0), int(v0), int(width), int(height), float(disparity))
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected u0,v0,width,height,disparity, got {text!r}')


def _dp_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('road fit')
    group.add_argument('--lambda', dest='lambda', type=float, help='smoothness weight (>= 0)')
    group.add_argument('--tau-max', type=int, help='largest row jump between neighbouring disparity bins')
    group.add_argument('--smoothness-sign', type=int, choices=(-1, 1), help='sign of the smoothness term')
    group.add_argument('--min-support', type=float, help='smallest normalized count a path point needs to be fitted')
    group.add_argument('--row-direction', type=int, choices=(-1, 1),
                       help='+1 follows rows downward as disparity falls, -1 the reverse')
    group.add_argument('--no-refine', dest='refine_rows', action='store_const', const=False,
                       help='fit the integer path rows instead of their sub-row centroids')
    group.add_argument('--d-max', type=int, help='largest disparity bin of the v-disparity map')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='RoadPreprocessor',
                                     description='Stereo road-scene preprocessing, evaluation and tooling.')
    parser.add_argument('--log-level', choices=LOG_LEVELS, default='WARNING', help='standard error log level')
    parser.add_argument('--config', help='JSON configuration file; flags override its values')
    commands = parser.add_subparsers(dest='command', required=True)

    vdisp = commands.add_parser('vdisp', help='build the v-disparity map of a 16-bit disparity PNG')
    vdisp.add_argument('disparity')
    vdisp.add_argument('--csv', required=True, help='output CSV, one image row per line')
    vdisp.add_argument('--png', required=True, help='output visualization PNG')
    vdisp.add_argument('--d-max', type=int, help='largest disparity bin')
    vdisp.add_argument('--no-normalize', dest='normalize', action='store_const', const=False,
                       help='keep raw pixel counts')

    fit = commands.add_parser('fit', help='fit the linear road model to a disparity PNG')
    fit.add_argument('disparity')
    fit.add_argument('--out', required=True, help='output road model JSON')
    _dp_flags(fit)

    transform = commands.add_parser('transform', help='warp a right image into the left view')
    transform.add_argument('right')
    transform.add_argument('model', help='road model JSON written by `fit`')
    transform.add_argument('--out', required=True, help='output warped PNG')
    transform.add_argument('--valid', required=True, help='output 1-bit validity PNG')

    pipeline = commands.add_parser('pipeline', help='produce the cropped 7-channel frame of a stereo pair')
    pipeline.add_argument('inputs', nargs='*', metavar='LEFT RIGHT DISP')
    pipeline.add_argument('--batch', metavar='DIR', help='process every <stem>_left/_right/_disp.png triple in DIR')
    pipeline.add_argument('--out-dir', required=True)
    pipeline.add_argument('--jobs', type=int, help='frames processed concurrently in batch mode')
    _dp_flags(pipeline)

    evaluate = commands.add_parser('eval', help='threshold sweep metrics of a road probability map')
    evaluate.add_argument('inputs', nargs='*', metavar='PROB GT')
    evaluate.add_argument('--batch', nargs=2, metavar=('PROB_DIR', 'GT_DIR'),
                          help='pool pixels per KITTI category and for urban')
    evaluate.add_argument('--valid', help='extra evaluation mask PNG')
    evaluate.add_argument('--out', required=True, help='output metric report JSON')
    evaluate.add_argument('--csv', help='output threshold sweep CSV')
    evaluate.add_argument('--n-thresholds', type=int)
    evaluate.add_argument('--threshold', type=float, help='preset segmentation threshold reported as at_threshold')
    evaluate.add_argument('--mask', help='output 1-bit PNG of the probabilities above --threshold')

    synth = commands.add_parser('synth', help='render a synthetic planar-road stereo scene')
    synth.add_argument('--out-dir', required=True)
    synth.add_argument('--width', type=int, default=1242)
    synth.add_argument('--height', type=int, default=375)
    synth.add_argument('--alpha0', type=float, default=-20.0)
    synth.add_argument('--alpha1', type=float, default=0.25)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--noise-sigma', type=float, default=0.0)
    synth.add_argument('--obstacle', type=obstacle, action='append', default=[],
                       metavar='U0,V0,W,H,D', help='repeatable')

    netshape = commands.add_parser('netshape', help='print the layer-by-layer tensor shapes of the network')
    netshape.add_argument('--height', type=int, required=True)
    netshape.add_argument('--width', type=int, required=True)
    return parser


def config_overrides(args: argparse.Namespace) -> dict:
    """Configuration keys given on the command line; flags a subcommand lacks count as not given."""
    flags = vars(args)
    return {key: flags.get(key) for key in ('lambda', 'tau_max', 'smoothness_sign', 'min_support',
                                            'row_direction', 'refine_rows', 'd_max', 'normalize',
                                            'n_thresholds', 'threshold', 'jobs')}
