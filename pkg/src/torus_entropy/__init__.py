"""Numerical laboratory for robust entropy of geodesic flows on the 2-torus."""
from .metric import (ConformalSpec, MetricField, NeckReport, NeckSpec, D_of_g, area,
                     build_neck_metric, c0_distance, check_retractable, christoffel,
                     eval_metric)

__version__ = "0.1.0"
