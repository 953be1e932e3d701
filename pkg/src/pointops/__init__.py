"""Global image enhancement with tone curves and color matrices.

The model is two point operators in sequence: a 256-entry monotone tone
curve applied through intensity-ratio scaling, then a 3x3 color matrix
with unit row sums. Per-pair optimal parameters come from two small
constrained least-squares problems; corpora of optimal curves compress
into a low-rank basis; and style profiles predict feasible parameters
for unseen images, supporting switching, interpolation, and chaining.
"""

from .basis import (
    CurveBasis,
    DEFAULT_NUM_COMPONENTS,
    build_basis,
    load_basis,
    project,
    rank_error_curve,
    reconstruct,
    save_basis,
)
from .dataset import PairedDataset, generate_dataset, load_dir_pair, load_manifest
from .evaluate import EvalReport, eval_style, eval_upper_bound
from .fileio import read_image, write_image
from .image import gamma_bt709, intensities, intensity_of, psnr
from .oracle import (
    BinStats,
    CcmDesign,
    UpperBoundReport,
    bin_stats,
    brute_force_ccm,
    brute_force_tone_curve,
    ccm_design,
    optimal_ccm,
    optimal_tone_curve,
    upper_bound,
)
from .style import (
    StyleProfile,
    StyleSet,
    chain_styles,
    enhance_with_style,
    features,
    fit_style,
    interpolate_styles,
    load_style_set,
    predict,
    save_style_set,
)
from .transform import (
    apply_color_matrix,
    apply_tone_curve,
    enhance,
    identity_curve,
    identity_matrix,
    monotonize,
    quantize,
)

__version__ = "0.1.0"
