"""Command-line lab driver.

One binary, five subcommands:

  train     fit one model (tunnelling or classical) on IDX data
  compare   per-category output distributions, JSD and entropy for a model pair
  speed     iterations-to-accuracy-threshold race between the two models
  simulate  2D wave-packet tunnelling runs with PGM snapshots
  analyze   weight-history divergences and weight-matrix spectra

Every command writes ``manifest.json`` into its output directory with the
command line, the fully resolved configuration, dataset digests, artifact
names, and timing, so a deterministic run can be reproduced exactly.
"""

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .activations import ActivationKind, ActivationMode, ActivationSpec
from .data import FASHION_MNIST_CATEGORIES, Dataset, split_per_category, take_per_category
from .network import (
    DEFAULT_TRAINING_ACTIVATION,
    Network,
    NetworkConfig,
    TrainingSchedule,
    evaluate,
    init_network,
    load_checkpoint,
    save_checkpoint,
    save_shared_init,
    top1_accuracy,
    train,
)
from .schrodinger import BarrierGeometry, BarrierKind, GridSpec, run_simulation
from .stats import (
    histogram_divergence,
    jsd,
    read_weight_history_csv,
    shannon_entropy,
    spectrum2d,
    write_matrix_csv,
    write_pgm,
    write_weight_history_csv,
)

_TRAIN_DEFAULTS = DEFAULT_TRAINING_ACTIVATION
_BARRIER_TOKENS = {
    "rect": BarrierKind.RECTANGULAR,
    "double-slit": BarrierKind.DOUBLE_SLIT,
    "none": BarrierKind.NONE,
}
_CONVENTIONS = {
    "units": "nondimensional",
    "hbar": 1.0,
    "mass_convention": "2m = 1 (identical to the activation module's 2m/hbar^2 = 1)",
    "equation": "i dpsi/dt = -laplacian(psi) + V psi",
    "boundaries": "hard walls (psi = 0 on the box edge)",
}


class RunContext:
    """Tracks artifacts for one command and writes the run manifest."""

    def __init__(self, command: str, argv, out_dir):
        self.command = command
        self.argv = list(argv)
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts = []
        self._t0 = time.monotonic()

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.out / name

    def write_manifest(self, resolved: dict, **extra) -> None:
        manifest = {
            "tool": "qtnn",
            "version": __version__,
            "command": self.command,
            "argv": self.argv,
            "resolved": resolved,
            "artifacts": sorted(self.artifacts),
            "wall_clock_seconds": round(time.monotonic() - self._t0, 3),
            "status": "complete",
        }
        manifest.update(extra)
        with open(self.out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=False)
            fh.write("\n")

    def discard_artifacts(self) -> None:
        for name in self.artifacts:
            (self.out / name).unlink(missing_ok=True)

    # A failed command must not leave partial artifacts behind.
    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self.discard_artifacts()
        return False


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _resolved(args, skip=("func", "argv")) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = str(value) if isinstance(value, Path) else value
    return out


def _category_names(count: int):
    if count == len(FASHION_MNIST_CATEGORIES):
        return list(FASHION_MNIST_CATEGORIES)
    return [f"category_{c}" for c in range(count)]


def _activation_spec(args, model: str) -> ActivationSpec:
    if model == "classical":
        kind = ActivationKind.RELU
    else:
        kind = ActivationKind.QT
    return ActivationSpec(
        kind=kind,
        barrier_height=args.barrier_height,
        barrier_thickness=args.barrier_thickness,
        energy_gain=args.energy_gain,
        mode=ActivationMode(args.activation_mode),
    )


def _network_config(args, dataset: Dataset, model: str, seed=None) -> NetworkConfig:
    return NetworkConfig(
        input_size=dataset.input_size,
        hidden_size=args.hidden_size,
        output_size=dataset.num_categories,
        learning_rate=args.alpha,
        seed=args.seed if seed is None else seed,
        activation=_activation_spec(args, model),
    )


def _schedule(args) -> TrainingSchedule:
    return TrainingSchedule(
        n_batches=args.batches,
        epochs_per_batch=args.epochs,
        images_per_category_per_batch=args.per_category,
        history_stride=args.history_stride,
    )


def _load_dataset(args) -> tuple[Dataset, dict]:
    digests = {
        "images_sha256": _sha256(args.images),
        "labels_sha256": _sha256(args.labels),
    }
    dataset = Dataset.from_idx(args.images, args.labels, num_categories=args.categories)
    return dataset, digests


def _write_loss_csv(path, losses) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "loss"])
        for i, value in enumerate(losses, start=1):
            writer.writerow([i, f"{value:.17g}"])


# ---------------------------------------------------------------- train

def cmd_train(args) -> int:
    with RunContext("train", args.argv, args.out) as ctx:
        dataset, digests = _load_dataset(args)
        if args.subset_per_category:
            dataset = take_per_category(dataset, args.subset_per_category, args.seed)
        config = _network_config(args, dataset, args.model)
        schedule = _schedule(args)

        net = init_network(config)
        save_shared_init(net, ctx.path("initial_state.npz"))
        result = train(net, dataset, schedule, histogram_bins=args.histogram_bins)
        save_checkpoint(result.network, ctx.path("checkpoint.npz"))
        write_weight_history_csv(result.history_w1, ctx.path("history_w1.csv"))
        write_weight_history_csv(result.history_w2, ctx.path("history_w2.csv"))
        _write_loss_csv(ctx.path("loss.csv"), result.loss_trace)

        ctx.write_manifest(
            _resolved(args),
            dataset=digests,
            iterations=result.iterations,
            final_loss=float(result.loss_trace[-1]) if result.iterations else None,
        )
        print(f"trained {args.model} model: {result.iterations} iterations -> {ctx.out}")
        return 0


# ---------------------------------------------------------------- compare

def cmd_compare(args) -> int:
    with RunContext("compare", args.argv, args.out) as ctx:
        net_qt = load_checkpoint(args.checkpoint_qt)
        net_classical = load_checkpoint(args.checkpoint_classical)
        if net_qt.config.output_size != net_classical.config.output_size:
            raise ValueError(
                "architecture mismatch: checkpoints classify "
                f"{net_qt.config.output_size} vs {net_classical.config.output_size} categories"
            )
        if net_qt.config.input_size != net_classical.config.input_size:
            raise ValueError("architecture mismatch: checkpoints expect different input sizes")
        args.categories = net_qt.config.output_size
        dataset, digests = _load_dataset(args)

        report_qt = evaluate(net_qt, dataset, args.per_category, seed=args.seed)
        report_classical = evaluate(net_classical, dataset, args.per_category, seed=args.seed)
        names = _category_names(dataset.num_categories)

        rows = []
        for c, name in enumerate(names):
            p_qt = report_qt.mean_outputs[c]
            p_cl = report_classical.mean_outputs[c]
            rows.append((name, "jsd", jsd(p_qt, p_cl, args.log_base)))
            rows.append((name, "se_qt", shannon_entropy(p_qt, args.log_base)))
            rows.append((name, "se_classical", shannon_entropy(p_cl, args.log_base)))
            rows.append((name, "accuracy_qt", report_qt.per_category_accuracy[c]))
            rows.append((name, "accuracy_classical", report_classical.per_category_accuracy[c]))
        rows.append(("ALL", "accuracy_qt", report_qt.accuracy))
        rows.append(("ALL", "accuracy_classical", report_classical.accuracy))

        with open(ctx.path("report.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["category", "metric", "value"])
            for name, metric, value in rows:
                writer.writerow([name, metric, f"{value:.17g}"])

        with open(ctx.path("distributions.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["category", "model"] + [f"p_{c}" for c in range(dataset.num_categories)])
            for c, name in enumerate(names):
                writer.writerow([name, "qt"] + [f"{v:.17g}" for v in report_qt.mean_outputs[c]])
                writer.writerow([name, "classical"] + [f"{v:.17g}" for v in report_classical.mean_outputs[c]])

        ctx.write_manifest(
            _resolved(args),
            dataset=digests,
            accuracy={"qt": report_qt.accuracy, "classical": report_classical.accuracy},
        )
        print(f"overall top-1 accuracy: qt {report_qt.accuracy:.3f}, classical {report_classical.accuracy:.3f}")
        for name, metric, value in rows:
            if metric == "jsd":
                print(f"  {name:>11s}: jsd = {value:.4f}")
        return 0


# ---------------------------------------------------------------- speed

def _iterations_to_threshold(config, train_set, test_set, schedule, threshold, check_every):
    """First iteration at which held-out accuracy reaches the threshold."""
    net = init_network(config)
    if top1_accuracy(net, test_set) >= threshold:
        return 0
    hit = {"iteration": None}

    def probe(iteration, current):
        if top1_accuracy(current, test_set) >= threshold:
            hit["iteration"] = iteration
            return True
        return False

    train(net, train_set, schedule, iteration_hook=probe, hook_every=check_every)
    return hit["iteration"]


def cmd_speed(args) -> int:
    with RunContext("speed", args.argv, args.out) as ctx:
        if not 0.0 <= args.threshold < 1.0:
            raise ValueError("threshold must lie in [0, 1)")
        dataset, digests = _load_dataset(args)
        seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
        if not seeds:
            raise ValueError("no seeds given")

        budget = _schedule(args).total_iterations(dataset.num_categories)
        results = []
        for seed in seeds:
            subset = take_per_category(dataset, args.subset_per_category, seed) if args.subset_per_category else dataset
            train_set, test_set = split_per_category(subset, args.train_per_category, seed)
            schedule = _schedule(args)
            per_model = {}
            for model in ("qt", "classical"):
                config = _network_config(args, train_set, model, seed=seed)
                per_model[model] = _iterations_to_threshold(
                    config, train_set, test_set, schedule, args.threshold, args.check_every
                )
            it_qt, it_cl = per_model["qt"], per_model["classical"]
            if it_qt is not None and it_cl is not None:
                ratio = 1.0 if it_qt == it_cl == 0 else (it_cl / it_qt if it_qt > 0 else float("inf"))
            else:
                ratio = None
            notes = []
            if it_qt is None:
                notes.append(f"qt not reached within {budget}")
            if it_cl is None:
                notes.append(f"classical not reached within {budget}")
            results.append((seed, it_qt, it_cl, ratio, "; ".join(notes)))
            print(
                f"seed {seed}: qt {it_qt if it_qt is not None else 'not reached'}, "
                f"classical {it_cl if it_cl is not None else 'not reached'}"
                + (f", classical/qt ratio {ratio:.3f}" if ratio is not None else "")
            )

        with open(ctx.path("speed.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "iterations_qt", "iterations_classical", "classical_over_qt_ratio", "note"])
            for seed, it_qt, it_cl, ratio, note in results:
                writer.writerow(
                    [
                        seed,
                        "" if it_qt is None else it_qt,
                        "" if it_cl is None else it_cl,
                        "" if ratio is None else f"{ratio:.17g}",
                        note,
                    ]
                )

        ratios = [r for (_, _, _, r, _) in results if r is not None]
        ctx.write_manifest(
            _resolved(args),
            dataset=digests,
            iteration_budget=budget,
            ratios=ratios,
        )
        return 0


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    with RunContext("simulate", args.argv, args.out) as ctx:
        grid = GridSpec(
            nx=args.nx,
            ny=args.ny,
            dx=args.dx,
            dy=args.dy,
            dt=args.dt,
            n_steps=args.steps,
            snapshot_stride=args.snapshot_stride,
        )
        xmax = (grid.nx - 1) * grid.dx
        ymax = (grid.ny - 1) * grid.dy
        barrier_center = xmax / 2.0 if args.barrier_center is None else args.barrier_center
        slit_center_y = ymax / 2.0 if args.slit_center_y is None else args.slit_center_y
        barrier = BarrierGeometry(
            kind=_BARRIER_TOKENS[args.barrier],
            height=args.v0,
            x_start=barrier_center - args.thickness / 2.0,
            x_end=barrier_center + args.thickness / 2.0,
            slit_width=args.slit_width,
            slit_separation=args.slit_separation,
            slit_center_y=slit_center_y,
        )
        packet_y = ymax / 2.0 if args.packet_y is None else args.packet_y
        result = run_simulation(
            grid,
            barrier,
            center=(args.packet_x, packet_y),
            sigma=args.sigma,
            momentum=(args.kx, args.ky),
        )

        snapshot_meta = []
        for snap in result.snapshots:
            name = f"snapshot_{snap.step_index:06d}.pgm"
            scale = write_pgm(snap.density, ctx.path(name))
            if args.csv_density:
                write_matrix_csv(snap.density, ctx.path(f"snapshot_{snap.step_index:06d}.csv"))
            snapshot_meta.append(
                {
                    "step": snap.step_index,
                    "time": snap.time,
                    "file": name,
                    "pgm_scale": scale,
                    "p_reflected": snap.p_reflected,
                    "p_barrier": snap.p_barrier,
                    "p_transmitted": snap.p_transmitted,
                }
            )
            print(
                f"step {snap.step_index:6d} t={snap.time:8.3f}  "
                f"P(reflected/barrier/transmitted) = {snap.p_reflected:.4f}/{snap.p_barrier:.4f}/{snap.p_transmitted:.4f}"
            )

        ctx.write_manifest(
            _resolved(args),
            conventions=_CONVENTIONS,
            barrier={
                "kind": barrier.kind.value,
                "height": barrier.height,
                "x_start": barrier.x_start,
                "x_end": barrier.x_end,
            },
            snapshots=snapshot_meta,
        )
        return 0


# ---------------------------------------------------------------- analyze

def _load_weight_matrices(path):
    """Accept either a full checkpoint or a shared-init container."""
    with np.load(path, allow_pickle=False) as bundle:
        return bundle["w1"].copy(), bundle["w2"].copy()


def cmd_analyze(args) -> int:
    with RunContext("analyze", args.argv, args.out) as ctx:
        if not args.history and not args.checkpoint:
            raise ValueError("nothing to analyze: pass --history and/or --checkpoint")

        summary = {}
        for hist_path in args.history or []:
            history = read_weight_history_csv(hist_path)
            counts = history.counts
            stamps = history.iteration_stamps
            center = counts.shape[1] // 2
            name = Path(hist_path).stem
            out_name = f"{name}_jsd_vs_initial.csv"
            with open(ctx.path(out_name), "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iteration", "jsd_vs_initial", "central_bin_mass"])
                for i, stamp in enumerate(stamps):
                    value = histogram_divergence(counts[0], counts[i], args.log_base) if i else 0.0
                    mass = counts[i][center] / counts[i].sum()
                    writer.writerow([int(stamp), f"{value:.17g}", f"{mass:.17g}"])
            final = histogram_divergence(counts[0], counts[-1], args.log_base) if len(stamps) > 1 else 0.0
            summary[name] = {"jsd_initial_vs_final": final}
            print(f"{name}: JSD(initial, final) = {final:.6g}")

        if args.cross:
            a = read_weight_history_csv(args.cross[0])
            b = read_weight_history_csv(args.cross[1])
            stamps_a = {int(s): i for i, s in enumerate(a.iteration_stamps)}
            with open(ctx.path("cross_jsd.csv"), "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iteration", "jsd"])
                for i, stamp in enumerate(b.iteration_stamps):
                    stamp = int(stamp)
                    if stamp in stamps_a:
                        value = histogram_divergence(a.counts[stamps_a[stamp]], b.counts[i], args.log_base)
                        writer.writerow([stamp, f"{value:.17g}"])
            final_cross = histogram_divergence(a.counts[-1], b.counts[-1], args.log_base)
            summary["cross"] = {"jsd_final_vs_final": final_cross}
            print(f"cross-history JSD at final stamps = {final_cross:.6g}")

        for ckpt_path in args.checkpoint or []:
            w1, w2 = _load_weight_matrices(ckpt_path)
            name = Path(ckpt_path).stem
            for label, matrix in (("w1", w1), ("w2", w2)):
                spectrum = spectrum2d(matrix)
                write_pgm(spectrum, ctx.path(f"{name}_spectrum_{label}.pgm"))
                if args.csv_spectra:
                    write_matrix_csv(spectrum, ctx.path(f"{name}_spectrum_{label}.csv"))
            print(f"{name}: exported weight spectra")

        ctx.write_manifest(_resolved(args), summary=summary)
        return 0


# ---------------------------------------------------------------- parser

def _add_data_flags(parser, required=True):
    parser.add_argument("--images", required=required, help="IDX image file (optionally .gz)")
    parser.add_argument("--labels", required=required, help="IDX label file (optionally .gz)")
    parser.add_argument("--categories", type=int, default=10, help="number of label categories")


def _add_model_flags(parser):
    parser.add_argument("--seed", type=int, default=0, help="run seed; all randomness derives from it")
    parser.add_argument("--alpha", type=float, default=NetworkConfig.learning_rate, help="learning rate")
    parser.add_argument("--hidden-size", type=int, default=NetworkConfig.hidden_size)
    parser.add_argument("--barrier-height", type=float, default=_TRAIN_DEFAULTS.barrier_height)
    parser.add_argument("--barrier-thickness", type=float, default=_TRAIN_DEFAULTS.barrier_thickness)
    parser.add_argument("--energy-gain", type=float, default=_TRAIN_DEFAULTS.energy_gain)
    parser.add_argument(
        "--activation-mode",
        choices=[m.value for m in ActivationMode],
        default=_TRAIN_DEFAULTS.mode.value,
        help="tunnelling activation mode (ignored by the classical model)",
    )


def _add_schedule_flags(parser, batches, epochs):
    parser.add_argument("--batches", type=int, default=batches, help="training batches (fresh images each)")
    parser.add_argument("--epochs", type=int, default=epochs, help="epochs per batch")
    parser.add_argument("--per-category", type=int, default=1, help="images per category per batch")
    parser.add_argument("--history-stride", type=int, default=100, help="record weight histograms every k iterations")
    parser.add_argument("--histogram-bins", type=int, default=101)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtnn",
        description="Quantum-tunnelling neural network lab",
    )
    parser.add_argument("--version", action="version", version=f"qtnn {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("train", help="train one model on IDX data")
    _add_data_flags(p)
    p.add_argument("--model", choices=["qt", "classical"], default="qt")
    _add_model_flags(p)
    _add_schedule_flags(p, batches=32, epochs=100)
    p.add_argument("--subset-per-category", type=int, default=0, help="seeded subset size per category (0 = all)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="compare a trained qt/classical pair on test data")
    p.add_argument("--checkpoint-qt", required=True)
    p.add_argument("--checkpoint-classical", required=True)
    _add_data_flags(p)
    p.add_argument("--per-category", type=int, default=50, help="test images per category")
    p.add_argument("--seed", type=int, default=0, help="seed for the test-image selection")
    p.add_argument("--log-base", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("speed", help="iterations-to-threshold race between both models")
    _add_data_flags(p)
    _add_model_flags(p)
    _add_schedule_flags(p, batches=10, epochs=20)
    p.add_argument("--threshold", type=float, default=0.6, help="held-out accuracy threshold")
    p.add_argument("--seeds", default="1,2,3,4,5", help="comma-separated list of run seeds")
    p.add_argument("--check-every", type=int, default=50, help="accuracy check cadence in iterations")
    p.add_argument("--subset-per-category", type=int, default=100, help="seeded subset per category (0 = all)")
    p.add_argument("--train-per-category", type=int, default=50, help="training images per category; rest held out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("simulate", help="2D wave-packet tunnelling run")
    p.add_argument("--nx", type=int, default=GridSpec.nx)
    p.add_argument("--ny", type=int, default=GridSpec.ny)
    p.add_argument("--dx", type=float, default=GridSpec.dx)
    p.add_argument("--dy", type=float, default=GridSpec.dy)
    p.add_argument("--dt", type=float, default=GridSpec.dt)
    p.add_argument("--steps", type=int, default=GridSpec.n_steps)
    p.add_argument("--snapshot-stride", type=int, default=GridSpec.snapshot_stride)
    p.add_argument("--barrier", choices=sorted(_BARRIER_TOKENS), default="rect")
    p.add_argument("--v0", type=float, default=2.0, help="barrier height")
    p.add_argument("--thickness", type=float, default=1.0, help="barrier thickness along x")
    p.add_argument("--barrier-center", type=float, default=None, help="barrier center x (default: domain center)")
    p.add_argument("--slit-width", type=float, default=1.0)
    p.add_argument("--slit-separation", type=float, default=3.0)
    p.add_argument("--slit-center-y", type=float, default=None, help="midpoint between slits (default: domain center)")
    p.add_argument("--packet-x", type=float, default=8.0)
    p.add_argument("--packet-y", type=float, default=None, help="default: domain center")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--kx", type=float, default=1.0)
    p.add_argument("--ky", type=float, default=0.0)
    p.add_argument("--csv-density", action="store_true", help="also export densities as CSV matrices")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="weight-history divergences and weight spectra")
    p.add_argument("--history", action="append", help="weight-history CSV (repeatable)")
    p.add_argument("--cross", nargs=2, metavar=("A", "B"), help="cross-compare two weight-history CSVs")
    p.add_argument("--checkpoint", action="append", help="checkpoint or initial-state .npz (repeatable)")
    p.add_argument("--csv-spectra", action="store_true", help="also export spectra as CSV matrices")
    p.add_argument("--log-base", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
