"""Radar/communications signal synthesis and LSTM classification workbench."""

from .codes import (
    barker_sequence,
    costas_array,
    enumerate_costas_arrays,
    huffman_sequence,
    polyphase_code,
    zadoff_chu,
)
from .dataset import (
    DataError,
    DatasetManifest,
    ImportLayout,
    LabeledExample,
    SplitData,
    build_dataset,
    deepradar_manifest,
    eightclass_manifest,
    generate_example,
    import_external,
    load_manifest,
    read_split,
    save_manifest,
    write_split,
)
from .evaluate import (
    AccuracyCurve,
    ConfusionMatrix,
    accuracy_by_snr,
    confusion_matrix,
    emit_report,
    model_classifier,
    sensitivity,
    sensitivity_table,
)
from .lstm import (
    CellState,
    LstmLayerParams,
    Model,
    NumericError,
    count_head_params,
    count_params,
    cross_entropy_loss,
    init_model,
    load_model,
    lstm_cell_forward,
    lstm_layer_forward,
    model_backward,
    model_forward,
    model_forward_batch,
    save_model,
    softmax,
)
from .optim import AdamState, TrainConfig, adam_step, cyclical_lr
from .signal import (
    IQSignal,
    NoiseSpec,
    apply_snr,
    autocorrelation,
    mean_power,
    normalize_power,
    resample_to_length,
)
from .train import predict_classes, signals_to_features, split_accuracy, train
from .waveforms import (
    DEEPRADAR_CLASSES,
    EIGHTCLASS_CLASSES,
    WaveformSpec,
    polytime_phases,
    polytime_ramp,
    sample_spec,
    synthesize,
    synthesize_8class,
)

__version__ = "0.1.0"
