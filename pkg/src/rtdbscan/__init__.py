"""Density-based clustering on an eps-sphere bounding volume hierarchy."""

from .bvh import BuildConfig, Bvh, build_bvh, count_within, query_point, validate_bvh
from .data import Dataset, generate, load_csv, write_csv
from .dbscan import (
    NOISE,
    Labeling,
    PointClass,
    canonicalize_labels,
    classic_dbscan,
    compare_clusterings,
    form_clusters,
    identify_core_points,
    rt_dbscan,
)
from .disjoint_set import DisjointSet, ds_find, ds_union
from .errors import DatasetError, EmptyDatasetError, ParameterError
from .geometry import (
    Aabb,
    Params,
    Point,
    Sphere,
    distance,
    expand_sphere,
    point_in_aabb,
    point_in_sphere,
    sphere_aabb,
)
from .neighbor import NeighborIndex, brute_force_neighborhood, build_index, find_neighborhood

__version__ = "0.1.0"
