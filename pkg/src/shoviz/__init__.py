"""shoviz: characterize and visualize linear operators on spherical-harmonics fields."""

from shoviz.characterize import (
    ResponseField,
    characterize_field,
    directional_gain,
    energy_vector,
    field_to_json,
    raster_to_csv,
    re_max,
    reconstruct_operator,
    response,
    responses_over_grid,
)
from shoviz.colormaps import available_colormaps, colormap_apply, colormap_lookup
from shoviz.grids import (
    SphereGrid,
    UnsupportedDegreeError,
    builtin_tdesign,
    design_above,
    design_with_points,
    display_tdesign,
    equal_weight_grid,
    equirect_raster,
    gauss_ring_grid,
    quadrature_deviation,
    verify_degree,
)
from shoviz.operators import (
    ConvergenceError,
    Rotation3,
    SceneSource,
    SHOperator,
    SourceScene,
    apply,
    compose,
    identity_op,
    identity_plus_mirror_op,
    mirror_op,
    nr_dp_from_covariances,
    nr_dp_op,
    nr_pm_from_covariances,
    nr_pm_op,
    op_from_file,
    op_from_json,
    op_to_file,
    op_to_json,
    rotation_op,
    scene_covariances,
    scene_from_file,
    scene_preset,
    scene_to_file,
    three_source_scene,
    warp_f,
    warp_f_inv,
    warp_g,
    warp_op,
)
from shoviz.render import (
    RenderSpec,
    Trail,
    great_circle_trail,
    project_equirect,
    render_ppm,
    render_svg,
    split_at_seam,
    trail_steps,
)
from shoviz.sph import (
    Direction,
    SHVector,
    acn_index,
    analyze,
    dirac_excitation,
    dirac_pattern,
    eval_sh_row,
    legendre_max_zero,
    legendre_p,
    sh_matrix,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "Direction",
    "RenderSpec",
    "ResponseField",
    "Rotation3",
    "SceneSource",
    "SHOperator",
    "SHVector",
    "SourceScene",
    "SphereGrid",
    "Trail",
    "UnsupportedDegreeError",
    "acn_index",
    "analyze",
    "apply",
    "available_colormaps",
    "builtin_tdesign",
    "characterize_field",
    "colormap_apply",
    "colormap_lookup",
    "compose",
    "design_above",
    "design_with_points",
    "dirac_excitation",
    "dirac_pattern",
    "directional_gain",
    "display_tdesign",
    "energy_vector",
    "equal_weight_grid",
    "equirect_raster",
    "eval_sh_row",
    "field_to_json",
    "gauss_ring_grid",
    "great_circle_trail",
    "identity_op",
    "identity_plus_mirror_op",
    "legendre_max_zero",
    "legendre_p",
    "mirror_op",
    "nr_dp_from_covariances",
    "nr_dp_op",
    "nr_pm_from_covariances",
    "nr_pm_op",
    "op_from_file",
    "op_from_json",
    "op_to_file",
    "op_to_json",
    "project_equirect",
    "quadrature_deviation",
    "raster_to_csv",
    "re_max",
    "reconstruct_operator",
    "render_ppm",
    "render_svg",
    "response",
    "responses_over_grid",
    "rotation_op",
    "scene_covariances",
    "scene_from_file",
    "scene_preset",
    "scene_to_file",
    "sh_matrix",
    "split_at_seam",
    "synthesize",
    "three_source_scene",
    "trail_steps",
    "verify_degree",
    "warp_f",
    "warp_f_inv",
    "warp_g",
    "warp_op",
    "__version__",
]
