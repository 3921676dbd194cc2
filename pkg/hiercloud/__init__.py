from hiercloud.ensemble import LevelDistributions, hierarchical_ensemble, mc_decision
from hiercloud.errors import HierCloudError
from hiercloud.geom.pointcloud import PointCloud
from hiercloud.hierarchy import LabelHierarchy, campus3d, parse_hierarchy, read_hierarchy
from hiercloud.metrics import consistency_proportion, consistency_rate, evaluate
from hiercloud.report import MetricReport

__all__ = [
    "HierCloudError",
    "LabelHierarchy",
    "LevelDistributions",
    "MetricReport",
    "PointCloud",
    "campus3d",
    "consistency_proportion",
    "consistency_rate",
    "evaluate",
    "hierarchical_ensemble",
    "mc_decision",
    "parse_hierarchy",
    "read_hierarchy",
]
