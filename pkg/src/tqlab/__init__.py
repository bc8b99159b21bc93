"""Simulation and diffusion-limit toolkit for the transitory single-server queue."""
from .limit import LimitParams, sample_free_limit, sample_single_bm_limit
from .models import ArrivalModel, ServiceModel, heavy_traffic_gap, stream
from .paths import CadlagPath, ContractError, DomainError, compose, reflect
from .prelimit import QueueRealization, build_processes, simulate, simulate_scaled

__version__ = "0.1.0"
