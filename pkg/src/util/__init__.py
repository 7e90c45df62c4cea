"""Utility modules."""

from .fitting import loglog_slope, ratio_band, spearman_trend
from .parse import parse_key_values, parse_number, parse_number_list
from .quadrature import gauss_legendre, r_schedule, tensor_rule
