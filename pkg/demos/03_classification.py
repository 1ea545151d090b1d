"""
Classifying trading days from signature features
================================================

Generate two labelled classes, featurise each stream with its
depth-4 signature, fit a cross-validated LASSO and compare against
the randomised-label baseline.
"""

import warnings

import numpy as np

from sigbook import evaluation as ev
from sigbook._rng import derive_rng
from sigbook.errors import ConvergenceWarning
from sigbook.lasso import TrainConfig
from sigbook.market_features import featurize_streams
from sigbook.synthetic import GeneratorConfig, generate_dataset

warnings.simplefilter("ignore", ConvergenceWarning)


def features(class_a, class_b, depth, count=100):
    streams = generate_dataset(GeneratorConfig(class_a, noise_level=0.3, seed=1, count=count),
                               GeneratorConfig(class_b, noise_level=0.3, seed=2, count=count))
    recs = featurize_streams(streams, depth=depth)
    return np.array([r.features for r in recs]), np.array([r.label for r in recs])


X, y = features("back_loaded", "front_loaded", 4)
print("feature matrix", X.shape)

learn, test = ev.stratified_split(y, 0.75, derive_rng(0, "split"))
model, rep, _ = ev.run_split(X, y, learn, test, TrainConfig(seed=0))
print(f"alpha={rep.alpha:.4g}  nonzero={rep.nonzero}")
print(f"KS  learning {rep.ks_learning:.3f}  out-of-sample {rep.ks_oos:.3f}")
print(f"AUC learning {rep.auc_learning:.3f}  out-of-sample {rep.auc_oos:.3f}")
print(f"correct ratio {rep.correct_ratio:.3f}")

# with labels shuffled there is nothing to learn
base = ev.randomized_label_baseline(X, y, 10, seed=0)
print(f"shuffled labels, 95th percentile AUC {base['auc']:.3f}, KS {base['ks']:.3f}")

# the symmetric pair needs the third level
for depth in (2, 3):
    Xs, ys = features("mid_loaded", "front_and_back_loaded", depth)
    _, r, _ = ev.run_split(Xs, ys, learn, test, TrainConfig(seed=0))
    print(f"mid vs front-and-back, depth {depth}: AUC {r.auc_oos:.3f}")
