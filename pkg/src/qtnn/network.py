"""The 784-800-10 dense network: forward pass, error backpropagation,
batch/epoch training with weight-history capture, and per-category
evaluation.

Training follows the plain delta-rule chain: the output-layer error
e = target - y is propagated back directly (delta2 = e), the hidden
delta is delta1 = phi'(v1) * (W2^T delta2), and each weight moves by
alpha * delta * input.  Under the linear-output error convention
(e = target - v2) this chain is the exact gradient step on the squared
error 1/2 ||target - v2||^2, which is what the gradient checks pin
down; the training loop forms e against the reported Softmax output y.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .activations import (
    ActivationKind,
    ActivationMode,
    ActivationSpec,
    activate,
    activate_derivative,
    softmax,
)
from .data import Dataset, make_schedule
from .seeding import substream
from .stats import DEFAULT_BINS, DEFAULT_RANGE, WeightHistory

__all__ = [
    "DEFAULT_LEARNING_RATE",
    "NetworkConfig",
    "Network",
    "TrainingSignal",
    "TrainingSchedule",
    "TrainingDivergenceError",
    "TrainResult",
    "CategoryReport",
    "init_network",
    "forward",
    "backprop_update",
    "delta_rule_update",
    "train",
    "evaluate",
    "top1_accuracy",
    "one_hot",
    "save_checkpoint",
    "load_checkpoint",
    "save_shared_init",
    "load_shared_init",
]

CHECKPOINT_VERSION = 1

# Training defaults, tuned on desk-scale runs (see README): stable and
# accurate for both activation kinds at this rate.
DEFAULT_LEARNING_RATE = 0.02

# The tunnelling network trains on sampled (stochastic) activations by
# default, with the energy gain scaled so typical weighted sums of
# [0, 1] pixels under [-1, 1] weights land in the transmission rise.
DEFAULT_TRAINING_ACTIVATION = ActivationSpec(
    kind=ActivationKind.QT,
    barrier_height=1.0,
    barrier_thickness=1.0,
    energy_gain=0.05,
    mode=ActivationMode.STOCHASTIC,
)


@dataclass(frozen=True)
class NetworkConfig:
    input_size: int = 784
    hidden_size: int = 800
    output_size: int = 10
    learning_rate: float = DEFAULT_LEARNING_RATE
    seed: int = 0
    activation: ActivationSpec = field(default_factory=lambda: DEFAULT_TRAINING_ACTIVATION)

    def __post_init__(self):
        for name in ("input_size", "hidden_size", "output_size"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.learning_rate > 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class Network:
    """Two dense weight matrices plus the configuration that shaped them."""

    w1: np.ndarray  # hidden x input
    w2: np.ndarray  # output x hidden
    config: NetworkConfig

    def __post_init__(self):
        self.w1 = np.asarray(self.w1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        cfg = self.config
        if self.w1.shape != (cfg.hidden_size, cfg.input_size):
            raise ValueError(f"w1 shape {self.w1.shape} does not match config")
        if self.w2.shape != (cfg.output_size, cfg.hidden_size):
            raise ValueError(f"w2 shape {self.w2.shape} does not match config")
        if not (np.all(np.isfinite(self.w1)) and np.all(np.isfinite(self.w2))):
            raise ValueError("weights must be finite")

    def copy(self) -> "Network":
        return Network(self.w1.copy(), self.w2.copy(), self.config)


@dataclass
class TrainingSignal:
    """Everything produced while pushing one sample through the network."""

    x: np.ndarray
    v1: np.ndarray
    h: np.ndarray
    v2: np.ndarray
    y: np.ndarray
    target: np.ndarray | None = None
    error: np.ndarray | None = None
    delta1: np.ndarray | None = None
    delta2: np.ndarray | None = None


@dataclass(frozen=True)
class TrainingSchedule:
    """Batch/epoch arithmetic: total iterations =
    n_batches * epochs_per_batch * categories * images_per_category_per_batch."""

    n_batches: int = 32
    epochs_per_batch: int = 100
    images_per_category_per_batch: int = 1
    history_stride: int = 100

    def __post_init__(self):
        if self.n_batches < 0 or self.epochs_per_batch < 0:
            raise ValueError("batch and epoch counts cannot be negative")
        if self.images_per_category_per_batch < 1:
            raise ValueError("images_per_category_per_batch must be >= 1")
        if self.history_stride < 1:
            raise ValueError("history_stride must be >= 1")

    def total_iterations(self, num_categories: int) -> int:
        return (
            self.n_batches
            * self.epochs_per_batch
            * num_categories
            * self.images_per_category_per_batch
        )


class TrainingDivergenceError(RuntimeError):
    pass


def one_hot(category: int, size: int) -> np.ndarray:
    target = np.zeros(size)
    target[int(category)] = 1.0
    return target


def init_network(config: NetworkConfig) -> Network:
    """Draw every weight uniformly from [-1, 1] with the seed's init stream."""
    rng = substream(config.seed, "init")
    w1 = rng.uniform(-1.0, 1.0, size=(config.hidden_size, config.input_size))
    w2 = rng.uniform(-1.0, 1.0, size=(config.output_size, config.hidden_size))
    return Network(w1, w2, config)


def forward(net: Network, x, rng: np.random.Generator | None = None, target=None) -> TrainingSignal:
    """Run one input through the network, filling the signal through y."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.config.input_size,):
        raise ValueError(f"input has shape {x.shape}, expected ({net.config.input_size},)")
    v1 = net.w1 @ x
    h = activate(v1, net.config.activation, rng)
    v2 = net.w2 @ h
    y = softmax(v2)
    tgt = None if target is None else np.asarray(target, dtype=float)
    return TrainingSignal(x=x, v1=v1, h=h, v2=v2, y=y, target=tgt)


def _scoring_spec(net: Network) -> ActivationSpec:
    """Predictions are scored on the expected-value activation: stochastic
    sampling is training-time behaviour, and the deterministic transmission
    curve is exactly the Bernoulli activation's mean."""
    spec = net.config.activation
    if spec.mode is ActivationMode.STOCHASTIC:
        return replace(spec, mode=ActivationMode.DETERMINISTIC)
    return spec


def _batch_outputs(net: Network, inputs) -> np.ndarray:
    """Pre-softmax outputs for a stack of inputs (rows), expected-value scored."""
    v1 = inputs @ net.w1.T
    h = activate(v1, _scoring_spec(net))
    return h @ net.w2.T


def delta_rule_update(net: Network, signal: TrainingSignal, error) -> Network:
    """Propagate an output-layer error down the delta chain and update in place.

    delta2 = error (used directly), hidden error = W2^T delta2,
    delta1 = phi'(v1) * hidden error, and each matrix moves by
    alpha * delta (x) input.  With the linear-output error convention
    (error = target - v2) this is the exact gradient step on
    1/2 ||target - v2||^2.
    """
    alpha = net.config.learning_rate
    delta2 = np.asarray(error, dtype=float)
    hidden_error = net.w2.T @ delta2
    delta1 = activate_derivative(signal.v1, net.config.activation) * hidden_error
    if not (np.all(np.isfinite(delta2)) and np.all(np.isfinite(delta1))):
        raise TrainingDivergenceError(
            "non-finite backpropagation signal; the run has diverged "
            f"(max |v2| = {np.abs(signal.v2).max():.3e})"
        )
    net.w2 += alpha * np.outer(delta2, signal.h)
    net.w1 += alpha * np.outer(delta1, signal.x)
    signal.error = delta2
    signal.delta1 = delta1
    signal.delta2 = delta2
    return net


def backprop_update(net: Network, signal: TrainingSignal) -> Network:
    """One training update: error = target - y against the reported output."""
    if signal.target is None:
        raise ValueError("signal carries no training target")
    return delta_rule_update(net, signal, signal.target - signal.y)


@dataclass
class TrainResult:
    network: Network
    history_w1: WeightHistory
    history_w2: WeightHistory
    loss_trace: np.ndarray  # per-iteration 1/2 ||error||^2
    iterations: int


def train(
    net: Network,
    dataset: Dataset,
    schedule: TrainingSchedule,
    *,
    histogram_bins: int = DEFAULT_BINS,
    histogram_range=DEFAULT_RANGE,
    iteration_hook=None,
    hook_every: int = 0,
) -> TrainResult:
    """Run the full batch/epoch schedule of per-sample updates.

    Weight histograms of both matrices are recorded at iteration 0,
    every ``schedule.history_stride`` iterations, and at the end.
    Deterministic-activation runs are bit-reproducible for a fixed
    (seed, data, schedule).

    ``iteration_hook(iteration, net)`` is called every ``hook_every``
    iterations when given; a truthy return stops training early.
    """
    if dataset.num_categories != net.config.output_size:
        raise ValueError(
            f"dataset has {dataset.num_categories} categories, network outputs {net.config.output_size}"
        )
    for c in range(dataset.num_categories):
        if len(dataset.category_index[c]) == 0:
            raise ValueError(f"category {c} is empty")

    plan = make_schedule(dataset, schedule, net.config.seed)
    stochastic = net.config.activation.mode is ActivationMode.STOCHASTIC
    act_rng = substream(net.config.seed, "stochastic") if stochastic else None

    history_w1 = WeightHistory(histogram_bins, histogram_range)
    history_w2 = WeightHistory(histogram_bins, histogram_range)
    history_w1.record(0, net.w1)
    history_w2.record(0, net.w2)

    losses = np.zeros(len(plan))
    iteration = 0
    for iteration, sample in enumerate(plan, start=1):
        x = dataset.images[sample]
        target = one_hot(dataset.labels[sample], net.config.output_size)
        try:
            signal = forward(net, x, rng=act_rng, target=target)
            backprop_update(net, signal)
        except TrainingDivergenceError as exc:
            raise TrainingDivergenceError(f"iteration {iteration}: {exc}") from None
        except ValueError as exc:
            # shapes and pixel ranges were validated up front, so a ValueError
            # mid-run means the arithmetic blew up (non-finite forward pass)
            raise TrainingDivergenceError(f"iteration {iteration}: {exc}") from None
        losses[iteration - 1] = 0.5 * float(signal.error @ signal.error)
        if iteration % schedule.history_stride == 0:
            history_w1.record(iteration, net.w1)
            history_w2.record(iteration, net.w2)
        if iteration_hook is not None and hook_every and iteration % hook_every == 0:
            if iteration_hook(iteration, net):
                losses = losses[:iteration]
                break
    if history_w1.iteration_stamps[-1] != iteration:
        history_w1.record(iteration, net.w1)
        history_w2.record(iteration, net.w2)
    return TrainResult(net, history_w1, history_w2, losses, iteration)


@dataclass
class CategoryReport:
    """Mean output distribution per true category, plus top-1 accuracies."""

    mean_outputs: np.ndarray  # (categories, categories); row c averages y over category c
    accuracy: float
    per_category_accuracy: np.ndarray
    per_category: int


def evaluate(net: Network, dataset: Dataset, per_category: int, seed: int | None = None) -> CategoryReport:
    """Average the softmax outputs over seed-selected test images.

    The same ``seed`` selects the same image sequence, so two models can
    be scored on identical inputs.  Stochastic-activation models are
    scored on their expected-value (deterministic) transmission curve.
    """
    if dataset.num_categories != net.config.output_size:
        raise ValueError("dataset categories do not match the network output size")
    if per_category < 1:
        raise ValueError("per_category must be >= 1")
    rng = substream(net.config.seed if seed is None else seed, "eval")

    m = net.config.output_size
    rows = np.zeros((m, m))
    hits = np.zeros(m)
    for c in range(m):
        pool = dataset.category_index[c]
        if len(pool) < per_category:
            raise ValueError(f"category {c} holds {len(pool)} test images, need {per_category}")
        picks = rng.choice(pool, size=per_category, replace=False)
        outputs = _batch_outputs(net, dataset.images[picks])
        shifted = np.exp(outputs - outputs.max(axis=1, keepdims=True))
        dists = shifted / shifted.sum(axis=1, keepdims=True)
        rows[c] = dists.mean(axis=0)
        hits[c] = int((outputs.argmax(axis=1) == c).sum())
    per_cat_acc = hits / per_category
    return CategoryReport(
        mean_outputs=rows,
        accuracy=float(hits.sum() / (m * per_category)),
        per_category_accuracy=per_cat_acc,
        per_category=per_category,
    )


def top1_accuracy(net: Network, dataset: Dataset) -> float:
    """Top-1 accuracy over the whole dataset (batched, expected-value scored)."""
    outputs = _batch_outputs(net, dataset.images)
    return float((outputs.argmax(axis=1) == dataset.labels).mean())


def _config_to_json(config: NetworkConfig) -> str:
    spec = config.activation
    return json.dumps(
        {
            "input_size": config.input_size,
            "hidden_size": config.hidden_size,
            "output_size": config.output_size,
            "learning_rate": config.learning_rate,
            "seed": config.seed,
            "activation": {
                "kind": spec.kind.value,
                "barrier_height": spec.barrier_height,
                "barrier_thickness": spec.barrier_thickness,
                "energy_gain": spec.energy_gain,
                "mode": spec.mode.value,
            },
        }
    )


def _config_from_json(text: str) -> NetworkConfig:
    raw = json.loads(text)
    act = raw.pop("activation")
    spec = ActivationSpec(
        kind=ActivationKind(act["kind"]),
        barrier_height=act["barrier_height"],
        barrier_thickness=act["barrier_thickness"],
        energy_gain=act["energy_gain"],
        mode=ActivationMode(act["mode"]),
    )
    return NetworkConfig(activation=spec, **raw)


def save_checkpoint(net: Network, path) -> None:
    """Versioned container: config, both weight matrices, seed; lossless."""
    np.savez(
        path,
        format_version=np.int64(CHECKPOINT_VERSION),
        config_json=_config_to_json(net.config),
        w1=net.w1,
        w2=net.w2,
    )


def load_checkpoint(path) -> Network:
    with np.load(path, allow_pickle=False) as bundle:
        version = int(bundle["format_version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        config = _config_from_json(str(bundle["config_json"]))
        return Network(bundle["w1"].copy(), bundle["w2"].copy(), config)


def save_shared_init(net: Network, path) -> None:
    """Model-agnostic initial state: sizes, seed and the raw weight draws.

    Deliberately excludes the activation choice and learning rate so the
    QT and classical runs of one seed write identical files.
    """
    np.savez(
        path,
        format_version=np.int64(CHECKPOINT_VERSION),
        input_size=np.int64(net.config.input_size),
        hidden_size=np.int64(net.config.hidden_size),
        output_size=np.int64(net.config.output_size),
        seed=np.uint64(net.config.seed),
        w1=net.w1,
        w2=net.w2,
    )


def load_shared_init(path, config: NetworkConfig) -> Network:
    with np.load(path, allow_pickle=False) as bundle:
        version = int(bundle["format_version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported init-state version {version}")
        sizes = (int(bundle["input_size"]), int(bundle["hidden_size"]), int(bundle["output_size"]))
        if sizes != (config.input_size, config.hidden_size, config.output_size):
            raise ValueError(f"stored sizes {sizes} do not match the requested config")
        stored_seed = int(bundle["seed"])
        if stored_seed != config.seed:
            raise ValueError(
                f"stored initial state was drawn from seed {stored_seed}, config has {config.seed}"
            )
        return Network(bundle["w1"].copy(), bundle["w2"].copy(), config)
