"""Unsupervised domain adaptation by jointly learning a source subspace and a max-margin classifier."""

__version__ = "0.1.0"

from .baselines import BASELINES, LinearPipelineModel, fit_baseline
from .benchmark import METHODS, FixedParams, run_benchmark, synthetic_pair
from .data import LabeledDataset, SyntheticShiftSpec, load_csv, save_csv, synth_shift
from .divergence import h_delta_h, h_delta_h_jcsl
from .errors import (
    SubspaceDAError, DimensionMismatch, DimensionTooLarge, DegenerateData, SingleClassData,
    NonBinaryLabels, TooFewSamples, ClassTooSmall, EmptyFeasibleGrid, InvalidSpec, ParseError,
    RaggedRows, NonIntegerLabel,
)
from .jcsl import (
    JcslHyperParams,
    JcslMulticlassModel,
    jcsl_objective,
    jcsl_subgradients,
    predict_jcsl,
    train_jcsl,
    train_jcsl_binary,
)
from .linalg import SubspaceBasis, align_subspaces, pca_basis, project
from .model_select import HyperGrid, grid_search_jcsl, stratified_two_fold
from .persist import load_model, save_model
from .svm import LinearModel, predict, train_linear_svm
