"""Split linearized Bregman iteration for sparse GLMs on voxel lattices.

The solver traces a regularization path of coupled estimators: a dense
predictor and a structurally sparse selector tied together by a variable
splitting term.  See README.md for an overview and the demos/ directory
for narrative examples.
"""

from .glm import (
    Dataset,
    Family,
    LinearPredictor,
    augmented_grads,
    augmented_loss,
    logistic_grad,
    logistic_loss,
    squared_grad,
    squared_loss,
)
from .lattice import (
    PowerIterationError,
    SplitOperator,
    VoxelGraph,
    build_lattice,
    connected_components,
    edgeless_graph,
    graph_from_edges,
    operator_norms,
)
from .projection import Decomposition, Support, decompose, project_lesion
from .solver import (
    DivergedError,
    FixedIters,
    Hyperparams,
    ModelState,
    PathPoint,
    RegularizationPath,
    SupportSizeCap,
    ValidationAccuracyPlateau,
    default_step_size,
    entry_order,
    resolve_alpha,
    run_path,
    shrink,
    step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
