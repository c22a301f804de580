"""Depth-based DD^G classification for functional data.

Curves are mapped to a low-dimensional vector of data depths (one coordinate
per group and depth feature) and any multivariate classifier is trained on
that space.  The package covers the depth families (integrated, h-mode,
random projection), distance-correlation depth selection, DD-plot polynomial
classifiers alongside six regular ones, the simulation models, and a CLI.
"""

from .classifiers import (
    ConfusionSummary,
    DDkClassifier,
    DiscriminantClassifier,
    GAMClassifier,
    KNNClassifier,
    LogisticClassifier,
    MDClassifier,
    NPClassifier,
    evaluate,
    fit_ddk,
    fit_ddk_multigroup,
    fit_discriminant,
    fit_gam,
    fit_glm,
    fit_knn,
    fit_np,
    make_classifier,
)
from .ddg import DDGTransform, DepthFeatureMatrix, drop_constant_columns
from .depths import (
    DepthModel,
    DepthSpec,
    combine_weighted,
    fit_hm_bandwidth,
    fm_depth,
    fm_depth_pvariate,
    halfspace_depth_2d,
    mahalanobis_depth,
    univariate_depth,
)
from .energy import dcor, dcor_flagged, distance_matrix, select_depths
from .fdata import (
    FunctionalDataSet,
    Grid,
    LabeledFunctionalData,
    MultiFunctionalDataSet,
    derivative,
    equispaced_grid,
    impute_missing,
    l2_metric,
    load_csv,
    save_csv,
    trapezoid_integral,
)
from .sim import (
    ExperimentResult,
    SimConfig,
    gp_sample,
    model_mean,
    point_depth_features,
    run_experiment,
    simulate_model,
    simulate_normals,
    simulate_rings,
)

__version__ = "0.1.0"
