"""chan3d: system-level 3D stochastic channel simulator.

Generates polarized double-directional MIMO channel realizations over a
tri-sector hexagonal deployment with 3D UE dropping, and computes the
standard slow-fading and fast-fading calibration metrics (coupling gain,
geometry factor, spread and eigenvalue CDFs).
"""
from .antenna import (
    ArrayGeometry,
    PatternSpec,
    array_response,
    composite_port_gain_db,
    downtilt_weights,
    element_gain_db,
    element_pattern_3gpp,
    itu_port_pattern,
    port_gain_itu_db,
    slant_fields_36814,
    uniform_planar_array,
    virtualize_port,
)
from .calib import (
    DropReport,
    angular_spread_deg,
    attach,
    coupling_gain_db,
    delay_spread_s,
    empirical_cdf,
    geometry_factor_db,
    rsrp_db,
    rsrp_fast_fading_db,
    top_eigenvalues,
)
from .campaign import run_campaign
from .config import ConfigError, RunConfig, default_config, emit_config, parse_config
from .deploy import UE, Cell, Site, drop_ues, hex_layout, legacy_2d_drop
from .geom import (
    SPEED_OF_LIGHT,
    AngleVector,
    GeometryError,
    Vec3,
    WaveVector,
    doppler_phase,
    field_lcs_to_gcs,
    los_angles,
    unit_vector,
    wave_vector,
)
from .lsp import (
    LargeScaleParams,
    LinkGeometry,
    LosProbability,
    LspDistributionSpec,
    LspSampler,
    draw_lsps,
    pathloss_db,
    pathloss_model_for,
)
from .ssp import (
    ClusterSet,
    SspConfig,
    SubpathOffsets,
    draw_polarization,
    expand_subpaths,
    generate_cluster_angles,
    generate_cluster_powers,
    generate_cluster_set,
    generate_delays,
)
from .synth import (
    ChannelRealization,
    LinkContext,
    LinkEnd,
    cluster_matrix_nlos,
    cluster_matrix_with_los,
    dump_realization,
    synthesize,
)

__version__ = "0.1.0"
