"""qtnn: a lab for quantum-tunnelling activation networks.

Train the tunnelling-activation network and its ReLU twin on Fashion
MNIST, compare their output distributions with divergence/entropy
metrics, inspect weight-distribution dynamics, and visualise the
underlying barrier physics with a 2D wave-packet simulator.
"""

from .activations import (
    ActivationKind,
    ActivationMode,
    ActivationSpec,
    qt_activation,
    qt_activation_derivative,
    qt_transmission,
    qt_transmission_derivative,
    relu,
    relu_derivative,
    softmax,
)
from .data import (
    FASHION_MNIST_CATEGORIES,
    Dataset,
    IdxFormatError,
    encode_idx_images,
    encode_idx_labels,
    load_idx_images,
    load_idx_labels,
    make_schedule,
    split_per_category,
    take_per_category,
)
from .network import (
    CategoryReport,
    Network,
    NetworkConfig,
    TrainingDivergenceError,
    TrainingSchedule,
    TrainingSignal,
    TrainResult,
    backprop_update,
    delta_rule_update,
    evaluate,
    forward,
    init_network,
    load_checkpoint,
    load_shared_init,
    save_checkpoint,
    save_shared_init,
    top1_accuracy,
    train,
)
from .schrodinger import (
    BarrierGeometry,
    BarrierKind,
    GridSpec,
    SimulationResult,
    WaveField,
    init_gaussian_packet,
    probability_density,
    run_simulation,
    step,
)
from .stats import (
    WeightHistory,
    histogram_divergence,
    jsd,
    kld,
    shannon_entropy,
    spectrum2d,
    weight_histogram,
)

__version__ = "0.1.0"
