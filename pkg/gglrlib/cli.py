"""
Command line front end: `gglr denoise|interpolate|deblur|degrade|spectrum|tune|selftest`
"""
import argparse
import glob
import os
import pathlib
import sys

import numpy as np

from .utils import configutils, imageutils
from .utils.graph.core import KernelParams, random_walk_laplacian, path_laplacian, glr
from .utils.graph.spectral import spectrum, null_space_dim
from .utils.prior.features import FeatureConfig
from .utils.prior.gng import PriorBuilder, PRIOR_KINDS, COMBINATORIAL, RANDOM_WALK
from .utils.prior.operators import grad_op, gng_laplacian
from .utils.restore import report
from .utils.restore.bench import SelfTest
from .utils.restore.formation import Blur, NoiseSpec, add_awgn, make_mask, make_gaussian_kernel, model_for
from .utils.restore.runners import Image, restore, thread_count
from .utils.restore.solvers import AdmmConfig, SolverError, AUX_COUNTS
from .utils.restore.tuning import tune_params, DEFAULT_SEARCH_SPACE, PARAM_NAMES

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_SELFTEST = 4

# defaults of the options a config file may set; flags win over the file
RESTORE_DEFAULTS = {
    'aux': 1,
    'layers': 10,
    'cg_iters': 10,
    'cg_tol': 1e-8,
    'mu': 0.5,
    'mu_tilde': 0.5,
    'rho': 1.0,
    'rho_tilde': 1.0,
    'sigma_f': 0.5,
    'sigma_x': 0.1,
    'sigma_a': 0.5,
    'position_weight': 1.0,
    'luminance_weight': 1.0,
    'gradient_weight': 1.0,
    'normalized': False,
    'fixed_graphs': False,
    'prior': 'gglr',
    'patch': 36,
    'stride': 32,
    'seed': 0,
}

TRUE_VALUES = ['1', 'true', 'yes', 'on']


def _coerce(key, value):
    default = RESTORE_DEFAULTS[key]
    try:
        if isinstance(default, bool):
            return str(value).strip().lower() in TRUE_VALUES
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        raise ValueError("Invalid value %r for %s" % (value, key))
    return str(value)


def resolve_options(args):
    """
    Merges defaults, the optional config file and the flags given on the command line
    """
    options = dict(RESTORE_DEFAULTS)
    if getattr(args, 'config', None):
        for key, value in configutils.read_config(args.config).items():
            if key not in RESTORE_DEFAULTS:
                raise ValueError("Unknown config key: %s" % key)
            options[key] = _coerce(key, value)

    for key in RESTORE_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return options


def make_solver(options):
    """
    Validated solver configuration and prior builder for a set of options
    """
    if options['aux'] not in AUX_COUNTS:
        raise ValueError("--aux must be one of %s, got %d" % (sorted(AUX_COUNTS), options['aux']))
    if options['prior'] not in PRIOR_KINDS:
        raise ValueError("--prior must be one of %s, got %s" % (PRIOR_KINDS, options['prior']))
    if options['patch'] < 3:
        raise ValueError("--patch must be >= 3, got %d" % options['patch'])
    if options['stride'] < 1 or options['stride'] > options['patch']:
        raise ValueError("--stride must be in [1, %d], got %d" % (options['patch'], options['stride']))

    config = AdmmConfig(
        family=AUX_COUNTS[options['aux']],
        rho=options['rho'],
        rho_tilde=options['rho_tilde'],
        outer_layers=options['layers'],
        cg_iters=options['cg_iters'],
        cg_tol=options['cg_tol'],
        relearn_graphs=not options['fixed_graphs']
    )
    builder = PriorBuilder(
        kind=options['prior'],
        normalization=RANDOM_WALK if options['normalized'] else COMBINATORIAL,
        mu=options['mu'],
        mu_tilde=options['mu_tilde'],
        kernel=KernelParams(sigma_f=options['sigma_f'], sigma_x=options['sigma_x'], sigma_a=options['sigma_a']),
        feature_config=FeatureConfig(position_weight=options['position_weight'],
                                     luminance_weight=options['luminance_weight'],
                                     gradient_weight=options['gradient_weight'])
    )
    return config, builder


def load_kernel(args):
    if getattr(args, 'kernel', None):
        return imageutils.read_kernel(args.kernel)
    if getattr(args, 'blur_size', None):
        return make_gaussian_kernel(args.blur_size, args.blur_std)
    return None


def _check_noise(sigma, flag):
    if sigma is not None and (not np.isfinite(sigma) or sigma < 0):
        raise ValueError("%s must be >= 0, got %s" % (flag, sigma))


def _check_keep(keep, flag):
    if keep is not None and not 0 < keep <= 1:
        raise ValueError("%s must be in (0, 1], got %s" % (flag, keep))


def _check_blur(args):
    if getattr(args, 'blur_size', None) is not None:
        if args.blur_size < 1 or args.blur_size % 2 == 0:
            raise ValueError("--blur-size must be odd and >= 1, got %d" % args.blur_size)
        if args.blur_size > 1 and args.blur_std <= 0:
            raise ValueError("--blur-std must be > 0, got %s" % args.blur_std)


def prepare_denoise(args, options, image):
    if args.sigma > 0:
        image = Image(add_awgn(image.data, NoiseSpec(args.sigma, options['seed'])))
    return image, model_for('denoise', image.shape)


def prepare_interpolate(args, options, image):
    if args.mask:
        keep = imageutils.read_mask(args.mask)
        if keep.shape != image.shape:
            raise ValueError("Mask %s does not match the %dx%d image" % (str(keep.shape), image.height, image.width))
    else:
        keep = make_mask(image.height * image.width, args.keep, options['seed']).reshape(image.shape)
    return Image(image.data * keep), model_for('interpolate', image.shape, keep=keep)


def prepare_deblur(args, options, image):
    model = model_for('deblur', image.shape, kernel=load_kernel(args))
    if args.synthesize:
        blurred = model.apply(image.flat()).reshape(image.data.shape)
        image = Image(add_awgn(blurred, NoiseSpec(args.sigma, options['seed'])))
    return image, model


def validate_task(args):
    _check_noise(getattr(args, 'sigma', None), "--sigma")
    if args.command == 'interpolate':
        _check_keep(args.keep, "--keep")
        if not args.mask and args.keep is None:
            raise ValueError("interpolate needs --keep or --mask")
    if args.command == 'deblur':
        _check_blur(args)
        if not args.kernel and not args.blur_size:
            raise ValueError("deblur needs --kernel or --blur-size")


PREPARE = {
    'denoise': prepare_denoise,
    'interpolate': prepare_interpolate,
    'deblur': prepare_deblur,
}


def cmd_restore(args):
    task = args.command
    options = resolve_options(args)
    config, builder = make_solver(options)
    validate_task(args)
    threads = thread_count(args.threads)
    logger = report.Logger("gglr %s" % task, echo=args.verbose)

    image = Image(imageutils.read_pnm(args.input))
    reference = Image(imageutils.read_pnm(args.ref)) if args.ref else None
    if reference is not None and reference.data.shape != image.data.shape:
        raise ValueError("Reference image %s does not match input %s" % (str(reference.data.shape),
                                                                         str(image.data.shape)))

    observed, model = PREPARE[task](args, options, image)
    restored, rep = restore(observed, task, model, config, builder, patch_size=options['patch'],
                            stride=options['stride'], n_jobs=threads, reference=reference, logger=logger)

    pathlib.Path(os.path.dirname(os.path.abspath(args.output))).mkdir(parents=True, exist_ok=True)
    imageutils.write_pnm(args.output, restored.data)

    if reference is not None:
        line = report.metrics_line(task, config.aux_count, config.outer_layers, config.cg_iters, rep.psnr_db,
                                   rep.ssim, rep.seconds)
        print(report.CSV_HEADER)
        print(line)
        sys.stderr.write("max_abs_error %.6e\n" % rep.max_abs_error)
        if args.csv:
            report.append_metrics(args.csv, line)
    return EXIT_OK


def cmd_degrade(args):
    _check_noise(args.awgn, "--awgn")
    _check_keep(args.mask, "--mask")
    if args.blur:
        blur_kernel = imageutils.read_kernel(args.blur)
    else:
        _check_blur(args)
        blur_kernel = load_kernel(args)

    image = Image(imageutils.read_pnm(args.input))
    pixels = image.flat()
    if blur_kernel is not None:
        pixels = Blur(blur_kernel, image.shape).apply(pixels)
    if args.awgn:
        pixels = add_awgn(pixels, NoiseSpec(args.awgn, args.seed))
    if args.mask is not None:
        keep = make_mask(image.height * image.width, args.mask, args.seed)
        pixels = pixels * keep
        mask_out = args.mask_out or os.path.splitext(args.output)[0] + "_mask.pgm"
        imageutils.write_mask(mask_out, keep.reshape(image.shape))

    imageutils.write_pnm(args.output, pixels.reshape(image.data.shape))
    return EXIT_OK


def cmd_spectrum(args):
    n = args.n
    if n < 3 or n > 64:
        raise ValueError("--n must be in [3, 64], got %d" % n)
    k = args.k if args.k is not None else n
    if k < 1 or k > n:
        raise ValueError("--k must be in [1, %d], got %d" % (n, k))

    if args.weight is not None:
        if args.weight <= 0:
            raise ValueError("--weight must be > 0, got %s" % args.weight)
        weights = np.full(n - 2, args.weight)
    else:
        weights = np.random.default_rng(args.seed).uniform(0.1, 2.0, size=n - 2)

    Lbar = path_laplacian(weights)
    if args.normalized:
        Lt = random_walk_laplacian(Lbar)
        gradient_term = (Lt.T @ Lt).tocsr()
        print("1^T Lt^T Lt 1 = %.3e" % glr(gradient_term, np.ones(n - 1)))
    else:
        gradient_term = Lbar

    values, _ = spectrum(gng_laplacian(gradient_term, grad_op(n)), n)
    print("eigenvalues: %s" % " ".join("%.6g" % value for value in values[:k]))
    print("null_dim: %d" % null_space_dim(values))
    return EXIT_OK


def parse_grid(items):
    space = {}
    for item in items:
        if "=" not in item:
            raise ValueError("--grid expects name=v1,v2,..., got %s" % item)
        name, values = item.split("=", 1)
        name = configutils.normalize_key(name)
        if name not in PARAM_NAMES:
            raise ValueError("Cannot tune unknown parameter: %s" % name)
        try:
            grid = [float(value) for value in values.split(",") if value.strip()]
        except ValueError:
            raise ValueError("Invalid grid for %s: %s" % (name, values))
        if len(grid) == 0 or any(value <= 0 for value in grid):
            raise ValueError("Grid for %s must hold positive values, got %s" % (name, values))
        space[name] = grid
    return space


def load_pairs(directory, task, kernel):
    """
    Training pairs <name>.clean.<ext> / <name>.degraded.<ext>, plus <name>.mask.pgm for interpolation
    """
    pairs = []
    models = []
    for clean_file in sorted(glob.glob(os.path.join(directory, "*.clean.p[gp]m"))):
        stem, ext = clean_file[:-len(".clean.pgm")], clean_file[-4:]
        clean = Image(imageutils.read_pnm(clean_file))
        degraded = Image(imageutils.read_pnm(stem + ".degraded" + ext))
        keep = None
        if task == 'interpolate':
            keep = imageutils.read_mask(stem + ".mask.pgm")
            degraded = Image(degraded.data * keep)
        model = model_for(task, clean.shape, keep=keep, kernel=kernel)
        pairs.append((clean, degraded))
        models.append(model)
    return pairs, models


def cmd_tune(args):
    options = resolve_options(args)
    config, builder = make_solver(options)
    space = parse_grid(args.grid) if args.grid else dict(DEFAULT_SEARCH_SPACE)
    if args.task == 'deblur':
        _check_blur(args)
    kernel = load_kernel(args)
    if args.task == 'deblur' and kernel is None:
        raise ValueError("Tuning a deblurring job needs --kernel or --blur-size")
    if not os.path.isdir(args.directory):
        raise IOError("Directory: %s does not exist" % args.directory)

    pairs, models = load_pairs(args.directory, args.task, kernel)
    if len(pairs) == 0:
        raise ValueError("No <name>.clean.pgm / <name>.degraded.pgm pairs in %s" % args.directory)

    logger = report.Logger("gglr tune", echo=args.verbose)
    best, best_psnr, history = tune_params(pairs, models, config, space, builder=builder,
                                           n_jobs=thread_count(args.threads), patch_size=options['patch'],
                                           stride=options['stride'], logger=logger)

    configutils.write_config(args.out, best, header="tuned on %d pairs, mean PSNR %.4f dB" % (len(pairs), best_psnr))
    history_file = args.history or os.path.splitext(args.out)[0] + "_history.csv"
    history.to_csv(history_file, index=False)

    print("psnr_db %.4f" % best_psnr)
    for name in PARAM_NAMES:
        print("%s = %s" % (name, best[name]))
    return EXIT_OK


def cmd_selftest(args):
    logger = report.Logger("gglr selftest", echo=args.verbose)
    results = SelfTest(seed=args.seed, full=args.full, n_jobs=thread_count(args.threads), logger=logger).run()
    for name, passed, seconds, detail in results:
        print("%s: %s (%.3fs) %s" % (name, "PASS" if passed else "FAIL", seconds, detail))
    if args.verbose:
        sys.stderr.write(report.pretty_print_suites(results) + "\n")
    return EXIT_OK if all(item[1] for item in results) else EXIT_SELFTEST


def add_solver_args(parser):
    group = parser.add_argument_group("solver")
    group.add_argument("--aux", type=int, default=None, help="auxiliary variables: 0 (direct solve), 1, 2 or 4")
    group.add_argument("--layers", type=int, default=None, help="outer layers K")
    group.add_argument("--cg-iters", dest="cg_iters", type=int, default=None, help="CG iterations L per solve")
    group.add_argument("--cg-tol", dest="cg_tol", type=float, default=None)
    group.add_argument("--mu", type=float, default=None, help="inline prior weight")
    group.add_argument("--mu-tilde", dest="mu_tilde", type=float, default=None, help="cross prior weight")
    group.add_argument("--rho", type=float, default=None)
    group.add_argument("--rho-tilde", dest="rho_tilde", type=float, default=None)
    group.add_argument("--sigma-f", dest="sigma_f", type=float, default=None, help="feature bandwidth")
    group.add_argument("--sigma-x", dest="sigma_x", type=float, default=None, help="intensity bandwidth")
    group.add_argument("--sigma-a", dest="sigma_a", type=float, default=None, help="gradient bandwidth")
    group.add_argument("--position-weight", dest="position_weight", type=float, default=None)
    group.add_argument("--luminance-weight", dest="luminance_weight", type=float, default=None)
    group.add_argument("--gradient-weight", dest="gradient_weight", type=float, default=None)
    group.add_argument("--normalized", action="store_true", default=None, help="random walk GGLR")
    group.add_argument("--fixed-graphs", dest="fixed_graphs", action="store_true", default=None,
                       help="keep the graphs learned from the initial estimate")
    group.add_argument("--prior", choices=PRIOR_KINDS, default=None)
    group.add_argument("--patch", type=int, default=None)
    group.add_argument("--stride", type=int, default=None)
    group.add_argument("--seed", type=int, default=None)
    group.add_argument("--threads", type=int, default=None, help="patch level parallelism (env GGLR_THREADS)")
    group.add_argument("--config", default=None, help="key = value file, overridden by flags")
    group.add_argument("--verbose", action="store_true")


def add_blur_args(parser):
    parser.add_argument("--blur-size", dest="blur_size", type=int, default=None, help="odd Gaussian kernel size")
    parser.add_argument("--blur-std", dest="blur_std", type=float, default=2.0)


def build_parser():
    parser = argparse.ArgumentParser(prog="gglr", description="Graph Laplacian regularized image restoration")
    commands = parser.add_subparsers(dest="command")
    commands.required = True

    for task, helptext in [('denoise', "remove additive Gaussian noise"),
                           ('interpolate', "fill in missing pixels"),
                           ('deblur', "non-blind deblurring")]:
        sub = commands.add_parser(task, help=helptext)
        sub.add_argument("input")
        sub.add_argument("output")
        sub.add_argument("--ref", default=None, help="clean image; prints a CSV metrics record")
        sub.add_argument("--csv", default=None, help="append the metrics record to this file")
        add_solver_args(sub)
        sub.set_defaults(func=cmd_restore)

    commands.choices['denoise'].add_argument("--sigma", type=float, default=0.0,
                                             help="add AWGN of this level (0-255 scale) before restoring")
    commands.choices['interpolate'].add_argument("--keep", type=float, default=None,
                                                 help="keep a random fraction of the pixels")
    commands.choices['interpolate'].add_argument("--mask", default=None, help="PGM mask of the observed pixels")
    deblur = commands.choices['deblur']
    deblur.add_argument("--kernel", default=None, help="kernel stencil file")
    add_blur_args(deblur)
    deblur.add_argument("--synthesize", action="store_true", help="blur and add noise to the input first")
    deblur.add_argument("--sigma", type=float, default=0.0, help="noise level used with --synthesize")

    degrade = commands.add_parser("degrade", help="synthesize y = Ax + n")
    degrade.add_argument("input")
    degrade.add_argument("output")
    degrade.add_argument("--awgn", type=float, default=None, help="noise level on the 0-255 scale")
    degrade.add_argument("--mask", type=float, default=None, help="fraction of pixels kept")
    degrade.add_argument("--mask-out", dest="mask_out", default=None)
    degrade.add_argument("--blur", default=None, help="kernel stencil file")
    add_blur_args(degrade)
    degrade.add_argument("--seed", type=int, default=0)
    degrade.set_defaults(func=cmd_degrade)

    spectrum_cmd = commands.add_parser("spectrum", help="eigenvalues of a random line GNG Laplacian")
    spectrum_cmd.add_argument("--n", type=int, required=True)
    spectrum_cmd.add_argument("--k", type=int, default=None)
    spectrum_cmd.add_argument("--weight", type=float, default=None, help="use this weight on every gradient edge")
    spectrum_cmd.add_argument("--seed", type=int, default=0)
    spectrum_cmd.add_argument("--normalized", action="store_true")
    spectrum_cmd.set_defaults(func=cmd_spectrum)

    tune = commands.add_parser("tune", help="coordinate descent parameter search")
    tune.add_argument("directory")
    tune.add_argument("--task", choices=sorted(PREPARE), default='denoise')
    tune.add_argument("--out", required=True, help="config file receiving the best parameters")
    tune.add_argument("--history", default=None, help="CSV of evaluated points")
    tune.add_argument("--grid", action="append", default=None, help="name=v1,v2,... (repeatable)")
    tune.add_argument("--kernel", default=None)
    add_blur_args(tune)
    add_solver_args(tune)
    tune.set_defaults(func=cmd_tune)

    selftest = commands.add_parser("selftest", help="run the property suites")
    selftest.add_argument("--full", action="store_true", help="also run the denoising benchmark")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.add_argument("--threads", type=int, default=None)
    selftest.add_argument("--verbose", action="store_true")
    selftest.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolverError as e:
        sys.stderr.write("gglr: solver error: %s\n" % e)
        return EXIT_SOLVER
    except OSError as e:
        sys.stderr.write("gglr: i/o error: %s\n" % e)
        return EXIT_IO
    except ValueError as e:
        sys.stderr.write("gglr: invalid argument: %s\n" % e)
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
