"""
Command-line entry point: gen, train, eval, predict and bench.

Every artifact-producing command writes `<artifact>.manifest.json` next to
its output with the full flag set, seeds and sha256 checksums.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .checkpoint import load_checkpoint, load_model, save_model
from .constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_LAYERS,
    DEFAULT_LR,
    DEFAULT_MODES,
    DEFAULT_RDF_EPSILON,
    DEFAULT_SPLIT_FRACTION,
    DEFAULT_WEIGHT_DECAY,
    DEFAULT_WIDTH,
    FlowKind,
    Interpolation,
    LrSchedule,
    MetricSpace,
    SplitMode,
)
from .datagen import (
    FlowSpec,
    InitSpec,
    SimConfig,
    build_forecast_dataset,
    build_pairs_dataset,
    generate_blob_simulations,
    plan_time_steps,
    simulate,
)
from .dataset_io import export_grid_text, import_grid_text, import_grid_xlsx, read_dataset, write_dataset
from .errors import ConfigError, DataFormatError, InterfaceFnoError, NumericalError, ValidationError
from .fields import Grid2D
from .interface import RdfParams, rdf_to_alpha
from .metrics import format_report, write_report, write_report_xlsx
from .model import FnoConfig, forward_array, init_model
from .optim import AdamWState, OptimConfig
from .pipeline import TrainConfig, bench_inference, evaluate, mean_evolution, split_dataset, train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Forecast case: a column resting on the floor of the unit domain, spread by
# a stagnation flow centred on the floor.
FORECAST_COLUMN = (0.3, 0.0, 0.4, 0.5)
FORECAST_FLOW = "stagnation:1.0:0.5:0.0"
FORECAST_FRAMES = 50
FORECAST_T_FINAL = 1.0
BLOB_SNAPSHOTS = (0.0, 0.25, 0.5)
BLOB_SIMULATIONS = 200


class UsageError(Exception):
    """Bad command-line usage detected after argparse accepted the flags."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    """Reproduction record written beside an artifact."""

    command: str
    flags: Dict[str, object]
    seeds: Dict[str, int]
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    checksums: Dict[str, str] = field(default_factory=dict)
    timestamp: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "command": self.command,
            "flags": self.flags,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "checksums": self.checksums,
            "timestamp": self.timestamp,
            "version": __version__,
        }


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path(artifact: Path) -> Path:
    return artifact.with_name(artifact.name + ".manifest.json")


def write_manifest(args: argparse.Namespace, seeds: Dict[str, int], inputs: Sequence[Path], outputs: Sequence[Path]) -> Path:
    """Write the manifest for outputs[0] atomically (temp file, then rename)."""
    flags = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key not in ("handler",)
    }
    manifest = RunManifest(
        command=args.command,
        flags=flags,
        seeds=seeds,
        inputs=[str(path) for path in inputs],
        outputs=[str(path) for path in outputs],
        checksums={str(path): sha256_file(path) for path in list(inputs) + list(outputs) if path.is_file()},
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
    target = manifest_path(Path(outputs[0]))
    fd, tmp = tempfile.mkstemp(prefix=target.name, suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(manifest.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info("Wrote run manifest %s.", target)
    return target


def parse_flow(text: str, grid: Grid2D) -> Optional[FlowSpec]:
    """
    Parse `rotation:OMEGA[:XC:YC]`, `vortex:PERIOD[:AMP]`,
    `stagnation:GAMMA[:XC:YC]`, `fall:V` or `mixed` (returns None).

    Raises:
        UsageError: On an unknown kind or malformed numbers.
    """

    kind, *raw = text.strip().split(":")
    if kind == "mixed" and not raw:
        return None
    try:
        values = [float(item) for item in raw]
    except ValueError:
        raise UsageError(f"flow '{text}' has a non-numeric parameter")
    counts = {
        FlowKind.RIGID_ROTATION.value: (1, 3),
        FlowKind.SINGLE_VORTEX.value: (1, 2),
        FlowKind.STAGNATION_COLLAPSE.value: (1, 3),
        FlowKind.UNIFORM_FALL.value: (1,),
    }
    if kind not in counts:
        raise UsageError(f"unknown flow kind '{kind}' (rotation, vortex, stagnation, fall, mixed)")
    if len(values) not in counts[kind]:
        raise UsageError(f"flow '{text}' takes {' or '.join(map(str, counts[kind]))} parameters")
    center = (values[1], values[2]) if len(values) == 3 else None
    if kind == FlowKind.RIGID_ROTATION.value:
        flow = FlowSpec.rigid_rotation(values[0], center)
    elif kind == FlowKind.SINGLE_VORTEX.value:
        flow = FlowSpec.single_vortex(values[0], *values[1:])
    elif kind == FlowKind.STAGNATION_COLLAPSE.value:
        flow = FlowSpec.stagnation_collapse(values[0], center)
    else:
        flow = FlowSpec.uniform_fall(values[0])
    return flow.bind(grid)


def _unit_domain(height: int, width: int) -> Grid2D:
    return Grid2D(height, width, dx=1.0 / width, dy=1.0 / height)


def cmd_gen(args: argparse.Namespace) -> int:
    height, width = args.grid
    grid = _unit_domain(height, width)
    if args.case == "forecast":
        frames_wanted = args.n if args.n is not None else FORECAST_FRAMES
        snapshots = tuple(args.snapshots) if args.snapshots else tuple(np.linspace(0.0, FORECAST_T_FINAL, frames_wanted))
        flow = parse_flow(args.flow or FORECAST_FLOW, grid)
        if flow is None:
            raise UsageError("the forecast case needs a single flow, not 'mixed'")
        dt, n_steps = plan_time_steps(flow, grid, max(snapshots), snapshots)
        config = SimConfig(grid, dt, n_steps, snapshots, interpolation=Interpolation(args.interpolation))
        frames = simulate(InitSpec.column(*FORECAST_COLUMN), flow, config)
        provenance = f"forecast grid={height}x{width} flow={flow.describe()} frames={len(frames)} seed={args.seed}"
        dataset = build_forecast_dataset(frames, args.epsilon, provenance)
    else:
        snapshots = tuple(args.snapshots) if args.snapshots else BLOB_SNAPSHOTS
        if len(snapshots) != 3:
            raise UsageError("the blobs case takes exactly three --snapshots times")
        flow = parse_flow(args.flow or "mixed", grid)
        count = args.n if args.n is not None else BLOB_SIMULATIONS
        simulations = generate_blob_simulations(
            count, grid, snapshots, seed=args.seed, flow=flow, interpolation=Interpolation(args.interpolation)
        )
        label = "mixed" if flow is None else flow.describe()
        provenance = f"blobs grid={height}x{width} flow={label} simulations={count} seed={args.seed}"
        dataset = build_pairs_dataset(simulations, args.epsilon, provenance)
    out = write_dataset(dataset, args.out)
    write_manifest(args, {"seed": args.seed}, [], [out])
    print(f"wrote {dataset.n} samples to {out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    dataset = read_dataset(args.data)
    train_config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        split_fraction=args.split,
        split_mode=SplitMode(args.split_mode),
        seed=args.seed,
        optim=OptimConfig(lr=args.lr, weight_decay=args.wd, schedule=LrSchedule(args.schedule)),
        loss_log_path=Path(args.log) if args.log else None,
    )
    if args.resume:
        model, state = load_checkpoint(args.resume)
        state = state or AdamWState.zeros_like(model.parameters())
        logger.info("Resuming from %s at optimizer step %d; architecture flags ignored.", args.resume, state.step)
    else:
        config = FnoConfig(
            d_v=args.width,
            k_x=args.modes[0],
            k_y=args.modes[1],
            n_layers=args.layers,
            use_norm=args.norm == "on",
        )
        model = init_model(config, seed=args.seed)
        state = AdamWState.zeros_like(model.parameters())
    model, history = train(model, dataset, train_config, state=state)
    out = save_model(model, args.out, state=state)
    outputs = [out] + ([Path(args.log)] if args.log else [])
    inputs = [Path(args.data)] + ([Path(args.resume)] if args.resume else [])
    write_manifest(args, {"seed": args.seed}, inputs, outputs)
    print(f"final train_loss={history.train_loss[-1]!r} val_loss={history.val_loss[-1]!r}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    dataset = read_dataset(args.data)
    if args.split is not None:
        split = TrainConfig(split_fraction=args.split, split_mode=SplitMode(args.split_mode), seed=args.seed)
        _, dataset = split_dataset(dataset, split)
    report = evaluate(model, dataset, MetricSpace(args.space))
    for row in mean_evolution(model, dataset).iter_rows(named=True):
        logger.info("t=%.6g predicted mean=%.6g true mean=%.6g", row["time"], row["predicted_mean"], row["true_mean"])
    if args.report:
        path = Path(args.report)
        out = write_report_xlsx(report, path) if path.suffix.lower() == ".xlsx" else write_report(report, path)
        write_manifest(args, {"seed": args.seed}, [Path(args.model), Path(args.data)], [out])
    else:
        sys.stdout.write(format_report(report))
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    source = Path(args.input)
    if source.suffix.lower() == ".xlsx":
        zeta = import_grid_xlsx(source, args.epsilon)
    else:
        zeta = import_grid_text(source, args.epsilon)
    x = np.stack([zeta.values, np.full(zeta.grid.shape, args.t)])[None]
    predicted = zeta.with_values(forward_array(model, x)[0, 0].astype(np.float64))
    if args.output_space == MetricSpace.ALPHA.value:
        predicted = rdf_to_alpha(predicted, RdfParams(epsilon=args.epsilon))
    out = export_grid_text(predicted, args.out)
    write_manifest(args, {}, [Path(args.model), source], [out])
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.iters < 10:
        raise UsageError(f"--iters must be at least 10, got {args.iters}")
    if args.model:
        model = load_model(args.model)
    else:
        model = init_model(FnoConfig(), seed=args.seed)
    if args.float32:
        model = model.astype(np.float32)
    result = bench_inference(model, Grid2D(*args.grid), iters=args.iters, warmup=args.warmup, seed=args.seed)
    print(
        f"grid={args.grid[0]}x{args.grid[1]} params={result.n_params} "
        f"min_ms={result.min_ms:.3f} median_ms={result.median_ms:.3f} p95_ms={result.p95_ms:.3f}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="interface-fno", description="Fourier neural operator for interface dynamics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    parser.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="Generate a dataset (.fnds).")
    gen.add_argument("--case", choices=("forecast", "blobs"), default="blobs", help="Column forecast or random-blob pairs.")
    gen.add_argument("--grid", nargs=2, type=int, metavar=("H", "W"), default=(64, 64), help="Grid cells on the unit domain.")
    gen.add_argument("--n", type=int, help="Frames (forecast, default 50) or simulations (blobs, default 200).")
    gen.add_argument("--snapshots", nargs="+", type=float, metavar="T", help="Snapshot times in seconds.")
    gen.add_argument("--flow", help="rotation:OMEGA[:XC:YC] | vortex:PERIOD[:AMP] | stagnation:GAMMA[:XC:YC] | fall:V | mixed.")
    gen.add_argument("--epsilon", type=float, default=DEFAULT_RDF_EPSILON, help="RDF smoothing length in cells.")
    gen.add_argument("--interpolation", choices=[i.value for i in Interpolation], default=Interpolation.LINEAR.value, help="Advection interpolation.")
    gen.add_argument("--seed", type=int, default=0, help="Master random seed.")
    gen.add_argument("--out", required=True, help="Output dataset path.")
    gen.set_defaults(handler=cmd_gen)

    tr = sub.add_parser("train", help="Train a model on a dataset.")
    tr.add_argument("--data", required=True, help="Dataset path (.fnds).")
    tr.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS, help="Training epochs.")
    tr.add_argument("--lr", type=float, default=DEFAULT_LR, help="AdamW learning rate.")
    tr.add_argument("--wd", type=float, default=DEFAULT_WEIGHT_DECAY, help="AdamW decoupled weight decay.")
    tr.add_argument("--batch", type=int, default=DEFAULT_BATCH_SIZE, help="Batch size.")
    tr.add_argument("--split", type=float, default=DEFAULT_SPLIT_FRACTION, help="Training share of the samples.")
    tr.add_argument("--split-mode", choices=[m.value for m in SplitMode], default=SplitMode.RANDOM.value, help="Split by time order or seeded shuffle.")
    tr.add_argument("--modes", nargs=2, type=int, metavar=("KX", "KY"), default=DEFAULT_MODES, help="Retained Fourier modes.")
    tr.add_argument("--width", type=int, default=DEFAULT_WIDTH, help="Hidden channels.")
    tr.add_argument("--layers", type=int, default=DEFAULT_LAYERS, help="Fourier layers.")
    tr.add_argument("--norm", choices=("on", "off"), default="on", help="Per-channel normalization in hidden layers.")
    tr.add_argument("--schedule", choices=[s.value for s in LrSchedule], default=LrSchedule.CONSTANT.value, help="Learning-rate schedule.")
    tr.add_argument("--resume", help="Checkpoint to continue training from.")
    tr.add_argument("--seed", type=int, default=0, help="Seed for initialization, split and shuffles.")
    tr.add_argument("--out", required=True, help="Output checkpoint path (.fnck).")
    tr.add_argument("--log", help="Per-epoch loss log path.")
    tr.set_defaults(handler=cmd_train)

    ev = sub.add_parser("eval", help="Report validation metrics.")
    ev.add_argument("--model", required=True, help="Checkpoint path.")
    ev.add_argument("--data", required=True, help="Dataset path.")
    ev.add_argument("--space", choices=[s.value for s in MetricSpace], default=MetricSpace.RDF.value, help="Compare ζ or binarized α.")
    ev.add_argument("--split", type=float, help="Evaluate only the validation partition of this split.")
    ev.add_argument("--split-mode", choices=[m.value for m in SplitMode], default=SplitMode.RANDOM.value, help="Split mode used with --split.")
    ev.add_argument("--seed", type=int, default=0, help="Split seed used with --split.")
    ev.add_argument("--report", help="Report path; .xlsx writes a workbook, anything else key = value text.")
    ev.set_defaults(handler=cmd_eval)

    pr = sub.add_parser("predict", help="Predict ζ at time t from an α grid.")
    pr.add_argument("--model", required=True, help="Checkpoint path.")
    pr.add_argument("--input", required=True, help="α grid as text or .xlsx.")
    pr.add_argument("--t", type=float, required=True, help="Time-channel value.")
    pr.add_argument("--epsilon", type=float, default=DEFAULT_RDF_EPSILON, help="RDF smoothing length in cells.")
    pr.add_argument("--output-space", choices=[s.value for s in MetricSpace], default=MetricSpace.RDF.value, help="Write ζ or α.")
    pr.add_argument("--out", required=True, help="Output text grid.")
    pr.set_defaults(handler=cmd_predict)

    be = sub.add_parser("bench", help="Time single-sample inference.")
    be.add_argument("--model", help="Checkpoint path; a freshly initialised default model when omitted.")
    be.add_argument("--grid", nargs=2, type=int, metavar=("H", "W"), default=(84, 84), help="Evaluation grid.")
    be.add_argument("--iters", type=int, default=50, help="Timed iterations (at least 10).")
    be.add_argument("--warmup", type=int, default=3, help="Untimed warm-up iterations.")
    be.add_argument("--float32", action="store_true", help="Run inference in 32-bit precision.")
    be.add_argument("--seed", type=int, default=0, help="Seed for the input and any fresh model.")
    be.set_defaults(handler=cmd_bench)
    return parser


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 1 for usage and configuration errors, 2 for data and
        file errors, 3 for numerical failures.
    """

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.handler(args)
    except (UsageError, ConfigError) as exc:
        print(f"interface-fno {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"interface-fno {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataFormatError, ValidationError, InterfaceFnoError, OSError) as exc:
        print(f"interface-fno {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
