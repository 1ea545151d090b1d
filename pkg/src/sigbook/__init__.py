"""Truncated path signatures as features for classifying order-book streams."""
from .errors import *  # noqa: F401,F403
from .evaluation import (
    ClassificationReport,
    confusion_at_threshold,
    ks_distance,
    learning_curve,
    randomized_label_baseline,
    roc_auc,
)
from .lasso import LassoModel, TrainConfig, coordinate_descent, load_model, predict, save_model, train
from .lead_lag import LeadLagSpec, cross_variation, lead_lag_transform, lead_transform, lag_transform, partial_lead_lag
from .market_features import (
    OrderBookStream,
    assemble_input,
    featurize,
    featurize_streams,
    normalize,
    parse_order_book_csv,
    read_feature_csv,
    slice_bucket,
    write_feature_csv,
)
from .signature import Stream, area, batch_signature, second_order_area, stream_signature
from .synthetic import GeneratorConfig, generate_dataset, generate_stream
from .tensor_algebra import AlgebraParams, TruncatedTensor, concat_product, exp, log, shuffle_product

__version__ = "0.1.0"
