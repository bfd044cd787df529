"""
Command-line surface

    python -m deeprest train    IMAGE [--layers L --patch P --keep-schedule ... | --config FILE]
    python -m deeprest encode   --model M IMAGE [-o codes.npz]
    python -m deeprest decode   --model M CODES [-o image.pgm|.npy] [--clamp]
    python -m deeprest denoise  IMAGE --sigma S [--layers L --passes K --pass-sigmas ...]
    python -m deeprest psnr     A B
    python -m deeprest table    IMAGE... --sigmas 10,20,30,100 --layers 1,3,5

Exit codes: 0 ok, 1 usage or validation error, 2 runtime error.
Every command writes manifest.json into its output directory.
"""
import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from deeprest import __version__
from deeprest.core.config import get_settings
from deeprest.core.errors import DeepRestError, InvalidArgumentError
from deeprest.core.logging import configure_logging, get_logger
from deeprest.database import images, storage
from deeprest.database.schemas import DenoiseConfig, LayerConfig
from deeprest.services.denoiser import (
    default_depths,
    default_layer_configs,
    denoise_table,
    psnr,
    run_denoise_experiment,
)
from deeprest.services.learn import atom_montage, model_cost, train_model
from deeprest.services.model import decode, encode

logger = get_logger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    """Bad command line"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_schedule_flags(parser: argparse.ArgumentParser, layers_help: str):
    parser.add_argument("--layers", type=int, default=3, help=layers_help)
    parser.add_argument("--patch", type=int, default=9, help="Layer-1 patch side (default 9)")
    parser.add_argument("--keep-schedule", type=_ints, default=None,
                        help="Depths of layers 2..L, e.g. 49,36 (default follows sigma)")
    parser.add_argument("--iters", type=int, default=100, help="Alternations per layer (default 100)")
    parser.add_argument("--eta-mult1", type=float, default=3.3, help="Layer-1 threshold / sigma (default 3.3)")
    parser.add_argument("--eta-mult2", type=float, default=3.1, help="Later threshold / sigma (default 3.1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deeprest", description="Multi-layer residual transform learning and denoising")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override DEEPREST_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    train = sub.add_parser("train", help="Learn a model from one image")
    train.add_argument("image", help="Training image (PGM or PNG)")
    train.add_argument("--config", help="JSON file with a list of layer configs (overrides schedule flags)")
    train.add_argument("--etas", type=_floats, default=None, help="Per-layer thresholds, e.g. 46.2,43.4,43.4")
    train.add_argument("--sigma", type=float, default=None, help="Derive thresholds from sigma and the multipliers")
    train.add_argument("--init", choices=["dct", "identity"], default="dct", help="Initial transforms")
    _add_schedule_flags(train, "Layer count L (default 3)")
    train.add_argument("--out-dir", default=None, help="Output directory")
    train.add_argument("--json", action="store_true", help="Print the training report as JSON")

    enc = sub.add_parser("encode", help="Encode an image with a stored model")
    enc.add_argument("image")
    enc.add_argument("--model", required=True, help="Model container")
    enc.add_argument("-o", "--output", default=None, help="Coefficient file (.npz)")
    enc.add_argument("--out-dir", default=None)

    dec = sub.add_parser("decode", help="Decode coefficient maps with a stored model")
    dec.add_argument("codes", help="Coefficient file written by encode")
    dec.add_argument("--model", required=True, help="Model container")
    dec.add_argument("-o", "--output", default=None, help="Output image (.pgm, .png or exact .npy)")
    dec.add_argument("--clamp", action="store_true", help="Clamp to [0, 255] when writing 8-bit images")
    dec.add_argument("--out-dir", default=None)

    den = sub.add_parser("denoise", help="Add noise to a clean image and denoise it")
    den.add_argument("image", help="Clean image")
    den.add_argument("--sigma", type=float, required=True, help="Noise standard deviation")
    den.add_argument("--seed", type=int, default=0, help="Noise seed (default 0)")
    den.add_argument("--passes", type=int, default=1, help="Stacked passes (default 1)")
    den.add_argument("--pass-sigmas", type=_floats, default=None, help="Per-pass sigma estimates, e.g. 90,20")
    _add_schedule_flags(den, "Layer count L (default 3)")
    den.add_argument("--out-dir", default=None)
    den.add_argument("--json", action="store_true", help="Print the report as JSON")

    ps = sub.add_parser("psnr", help="PSNR between two images")
    ps.add_argument("reference")
    ps.add_argument("test")
    ps.add_argument("--out-dir", default=None)
    ps.add_argument("--json", action="store_true")

    table = sub.add_parser("table", help="Denoise a grid of images x sigmas x layer counts")
    table.add_argument("images", nargs="+")
    table.add_argument("--sigmas", type=_floats, default=[10.0, 20.0, 30.0, 100.0])
    table.add_argument("--layers", type=_ints, default=[1, 3, 5])
    table.add_argument("--seed", type=int, default=0, help="Base seed; cell i uses seed + i")
    table.add_argument("--passes", type=int, default=1)
    table.add_argument("--pass-sigmas", type=_floats, default=None)
    table.add_argument("--patch", type=int, default=9)
    table.add_argument("--keep-schedule", type=_ints, default=None)
    table.add_argument("--iters", type=int, default=100)
    table.add_argument("--eta-mult1", type=float, default=3.3)
    table.add_argument("--eta-mult2", type=float, default=3.1)
    table.add_argument("--workers", type=int, default=None, help="Process pool size (default DEEPREST_TABLE_WORKERS)")
    table.add_argument("--out-dir", default=None)
    table.add_argument("--json", action="store_true")
    return parser


def _write_manifest(run_dir: Path, args: argparse.Namespace, argv: Sequence[str], config: Dict[str, Any],
                    inputs: Sequence[Path], outputs: Sequence[Path], seed: Optional[int] = None) -> Path:
    manifest = storage.build_manifest(args.command, argv, config, inputs, outputs, seed)
    path = run_dir / "manifest.json"
    storage.write_report(path, manifest)
    logger.info(f"[RUN] command={args.command} | outputs={len(manifest.outputs)} | dir={run_dir}")
    return path


def _format_psnr(value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    return "inf" if math.isinf(value) else f"{value:.2f}"


def _train_configs(args: argparse.Namespace) -> List[LayerConfig]:
    if args.config:
        raw = storage.read_json(args.config)
        if not isinstance(raw, list):
            raise InvalidArgumentError(f"{args.config} must hold a JSON list of layer configs")
        return [LayerConfig.model_validate(item) for item in raw]
    depths = args.keep_schedule
    if depths is None:
        depths = default_depths(args.sigma or 0.0, args.layers)
    if args.etas is not None:
        if len(args.etas) != args.layers:
            raise InvalidArgumentError(f"--etas needs {args.layers} values, got {len(args.etas)}")
        configs = default_layer_configs(1.0, args.layers, args.patch, depths, 1.0, 1.0, args.iters)
        return [cfg.model_copy(update={"eta": eta}) for cfg, eta in zip(configs, args.etas)]
    if args.sigma is None:
        raise InvalidArgumentError("train needs --etas, --sigma or --config")
    return default_layer_configs(args.sigma, args.layers, args.patch, depths,
                                 args.eta_mult1, args.eta_mult2, args.iters)


def cmd_train(args: argparse.Namespace, argv: Sequence[str]) -> int:
    img = images.load_image(args.image)
    configs = _train_configs(args)
    run_dir = storage.make_run_dir("train", args.out_dir)
    model, report = train_model(img, configs, init_policy=args.init)

    outputs = [run_dir / "model.drst", run_dir / "train_report.json"]
    storage.save_model(model, outputs[0])
    storage.write_report(outputs[1], report)
    for index, (layer, cfg) in enumerate(zip(model.layers, model.configs), start=1):
        path = run_dir / f"atoms_layer{index}.pgm"
        images.save_image(atom_montage(layer, cfg), path, clamp=True)
        outputs.append(path)
    config = {"layers": [cfg.model_dump() for cfg in configs], "init": args.init}
    _write_manifest(run_dir, args, argv, config, [Path(args.image)], outputs)

    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        for layer in report.layers:
            print(f"layer {layer.layer}: filters={layer.filters} eta={layer.eta:g} "
                  f"cost {layer.initial_cost:.6e} -> {layer.cost_trajectory[-1]:.6e} "
                  f"sparsity={layer.sparsity:.4f}")
        print(f"objective: {model_cost(img, model):.6e}")
        print(f"written to {run_dir}")
    return EXIT_OK


def cmd_encode(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model = storage.load_model(args.model)
    img = images.load_image(args.image)
    run_dir = storage.make_run_dir("encode", args.out_dir)
    output = Path(args.output) if args.output else run_dir / "codes.npz"
    enc = encode(img, model)
    storage.save_encoding(enc, output)
    _write_manifest(run_dir, args, argv, {"model": args.model}, [Path(args.model), Path(args.image)], [output])
    print(f"sparsity per layer: {', '.join(f'{s:.4f}' for s in enc.sparsity())}")
    print(f"written to {output}")
    return EXIT_OK


def cmd_decode(args: argparse.Namespace, argv: Sequence[str]) -> int:
    model = storage.load_model(args.model)
    enc = storage.load_encoding(args.codes)
    run_dir = storage.make_run_dir("decode", args.out_dir)
    output = Path(args.output) if args.output else run_dir / "decoded.pgm"
    img = decode(enc, model)
    if output.suffix.lower() == ".npy":
        output.parent.mkdir(parents=True, exist_ok=True)
        np.save(output, img)
    else:
        images.save_image(img, output, clamp=args.clamp)
    _write_manifest(run_dir, args, argv, {"model": args.model, "clamp": args.clamp},
                    [Path(args.model), Path(args.codes)], [output])
    print(f"written to {output}")
    return EXIT_OK


def _denoise_config(args: argparse.Namespace) -> DenoiseConfig:
    return DenoiseConfig(
        sigma=args.sigma,
        layers=args.layers,
        patch=args.patch,
        depths=args.keep_schedule,
        eta_mult1=args.eta_mult1,
        eta_mult2=args.eta_mult2,
        iters=args.iters,
        passes=args.passes,
        pass_sigmas=args.pass_sigmas,
        seed=args.seed,
    )


def cmd_denoise(args: argparse.Namespace, argv: Sequence[str]) -> int:
    cfg = _denoise_config(args)
    clean = images.load_image(args.image)
    run_dir = storage.make_run_dir("denoise", args.out_dir)
    noisy, denoised, report = run_denoise_experiment(clean, cfg)

    outputs = [run_dir / "noisy.pgm", run_dir / "denoised.pgm", run_dir / "denoised.npy", run_dir / "report.json"]
    images.save_image(noisy, outputs[0], clamp=True)
    images.save_image(denoised, outputs[1], clamp=True)
    np.save(outputs[2], denoised)
    storage.write_report(outputs[3], report)
    _write_manifest(run_dir, args, argv, cfg.model_dump(), [Path(args.image)], outputs, seed=cfg.seed)

    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        print(f"input PSNR: {_format_psnr(report.input_psnr)} dB")
        for result in report.passes:
            print(f"pass {result.index} (sigma {result.sigma:g}): {_format_psnr(result.psnr)} dB")
        print(f"written to {run_dir}")
    return EXIT_OK


def cmd_psnr(args: argparse.Namespace, argv: Sequence[str]) -> int:
    value = psnr(images.load_image(args.reference), images.load_image(args.test))
    run_dir = storage.make_run_dir("psnr", args.out_dir)
    _write_manifest(run_dir, args, argv, {}, [Path(args.reference), Path(args.test)], [])
    if args.json:
        print(json.dumps({"psnr": _format_psnr(value) if math.isinf(value) else value}))
    else:
        print(_format_psnr(value))
    return EXIT_OK


def cmd_table(args: argparse.Namespace, argv: Sequence[str]) -> int:
    if not args.sigmas or not args.layers:
        raise InvalidArgumentError("table needs at least one sigma and one layer count")
    named = {}
    for path in args.images:
        name = Path(path).stem
        if name in named:
            raise InvalidArgumentError(f"duplicate image name {name!r}")
        named[name] = images.load_image(path)
    base = DenoiseConfig(
        sigma=args.sigmas[0],
        layers=max(args.layers),
        patch=args.patch,
        depths=args.keep_schedule,
        eta_mult1=args.eta_mult1,
        eta_mult2=args.eta_mult2,
        iters=args.iters,
        passes=args.passes,
        pass_sigmas=args.pass_sigmas,
        seed=args.seed,
    )
    workers = args.workers or get_settings().table_workers
    run_dir = storage.make_run_dir("table", args.out_dir)
    report = denoise_table(named, args.sigmas, args.layers, base, workers=workers)

    outputs = [run_dir / "table.json", run_dir / "table.txt"]
    storage.write_report(outputs[0], report)
    outputs[1].write_text("\n".join(report.rows()) + "\n")
    config = {**base.model_dump(), "sigmas": args.sigmas, "layers": args.layers}
    _write_manifest(run_dir, args, argv, config, [Path(p) for p in args.images], outputs, seed=args.seed)

    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        print("\n".join(report.rows()))
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "denoise": cmd_denoise,
    "psnr": cmd_psnr,
    "table": cmd_table,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)

    configure_logging(args.log_level or get_settings().log_level)
    try:
        return COMMANDS[args.command](args, argv)
    except (InvalidArgumentError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DeepRestError, OSError) as e:
        logger.error(f"[RUN] command={args.command} | {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(cli_main())
