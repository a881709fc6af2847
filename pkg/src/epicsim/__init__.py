"""Swarm coordination under signaling silence: channel, beliefs, planner, engine."""

__version__ = "0.1.0"

from .channel import ChannelParams, Target, wce
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .engine import run_trial, run_trials, sweep
from .kinematics import AgentState, KinematicLimits, Volume
from .signaling import LinkParams
from .stsi import BeliefEntry, Scheme, StsiParams, stsi_infer

__all__ = [
    "AgentState",
    "BeliefEntry",
    "ChannelParams",
    "ConfigError",
    "KinematicLimits",
    "LinkParams",
    "ScenarioConfig",
    "Scheme",
    "StsiParams",
    "Target",
    "Volume",
    "load_config",
    "parse_config",
    "run_trial",
    "run_trials",
    "stsi_infer",
    "sweep",
    "wce",
]
