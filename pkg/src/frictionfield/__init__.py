"""Visuo-haptic surface friction estimation and friction-aware grasp sampling.

The library fuses a colored point cloud with a sparse sliding-contact trace:
the cloud is filtered and partitioned into color-homogeneous regions, contact
forces become per-point friction coefficients, a joint color+friction
Gaussian mixture (with an uninformative background component) is fitted, and
conditional inference fills in friction mean and uncertainty for unexplored
regions. The resulting field can be transferred to a triangle mesh to drive
an antipodal grasp sampler scored by a wrench-space quality metric.
"""

from .cloud import (
    ColoredPoint,
    PlaneModel,
    PointCloud,
    crop_depth,
    load_cloud,
    load_friction_cloud,
    remove_plane,
    save_cloud,
)
from .dataset import VisuoHapticDataset, VisuoHapticSample, build_dataset
from .estimators import FrictionMixtureRegressor, SupervoxelSegmenter
from .field import (
    DensityHistogram,
    FrictionField,
    density_histogram,
    histogram_peaks,
    infer_field,
)
from .grasping import (
    Contact,
    FrictionCone,
    GraspCandidate,
    GraspScore,
    GripperGeometry,
    NoValidGraspError,
    SamplingInfeasibleError,
    assign_face_friction,
    check_collision,
    contact_wrenches,
    ferrari_canny_l1,
    rank_grasps,
    sample_antipodal,
)
from .haptics import (
    ContactSample,
    DegenerateContactError,
    HapticTrace,
    LuGreParams,
    PointAnnotation,
    associate,
    coulomb_cof,
    estimate_trace,
    load_trace_csv,
    save_trace_csv,
    simulate_lugre,
    synth_trace,
)
from .hull import hull_interior_distance
from .mesh import TriangleMesh, load_mesh, save_mesh_off
from .mixture import (
    GaussianComponent,
    NumericalFitError,
    VisuoHapticMixture,
    fit_mixture,
    infer_friction,
    make_background,
    visual_responsibilities,
)
from .plyio import PlyParseError
from .segmentation import (
    Partition,
    PartitionError,
    Region,
    export_partition_ply,
    segment,
    validate_partition,
)
from .synthetic import SyntheticScene, default_trace_chord, generate_scene, mug_proxy_mesh

__version__ = "0.1.0"
