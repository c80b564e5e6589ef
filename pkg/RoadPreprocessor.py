#!/usr/bin/env python

import logging
import sys

from Cli.Batch import run_eval_batch, run_pipeline_batch
from Cli.Commands import cmd_eval, cmd_fit, cmd_netshape, cmd_pipeline, cmd_synth, cmd_transform, cmd_vdisp
from Cli.Config import apply_overrides, load_config
from Cli.Parser import build_parser, config_overrides
from Errors import RoadPrepError
from SceneGenerator import SceneParams

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def dispatch(args, config) -> int:
    if args.command == 'vdisp':
        return cmd_vdisp(args.disparity, args.csv, args.png, config)
    if args.command == 'fit':
        return cmd_fit(args.disparity, config, args.out)
    if args.command == 'transform':
        return cmd_transform(args.right, args.model, args.out, args.valid)
    if args.command == 'pipeline':
        if args.batch:
            return run_pipeline_batch(args.batch, args.out_dir, config)
        return cmd_pipeline(*args.inputs, config, args.out_dir)
    if args.command == 'eval':
        if args.batch:
            return run_eval_batch(*args.batch, args.out, config, args.csv)
        return cmd_eval(*args.inputs, args.valid, args.out, config, args.csv, args.mask)
    if args.command == 'synth':
        params = SceneParams(width=args.width, height=args.height, alpha0=args.alpha0, alpha1=args.alpha1,
                             texture_seed=args.seed, obstacles=tuple(args.obstacle), noise_sigma=args.noise_sigma)
        return cmd_synth(args.out_dir, params)
    return cmd_netshape(args.height, args.width)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == 'pipeline' and not args.batch and len(args.inputs) != 3:
        parser.error('pipeline needs LEFT RIGHT DISP or --batch DIR')
    if args.command == 'eval' and not args.batch and len(args.inputs) != 2:
        parser.error('eval needs PROB GT or --batch PROB_DIR GT_DIR')

    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT)
    logging.getLogger().setLevel(args.log_level)

    try:
        config = apply_overrides(load_config(args.config), config_overrides(args))
        return dispatch(args, config)
    except RoadPrepError as e:
        logger.error('error: %s: %s', e.stage or args.command, e)
        return e.exit_code
    except OSError as e:
        logger.error('error: %s: %s', args.command, e)
        return 2


if __name__ == '__main__':
    sys.exit(main())
