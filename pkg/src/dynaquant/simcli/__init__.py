"""Evolution engines, scenario pipelines, algebra verification and CLI."""
from .algebra import AlgebraReport, check_algebra
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .engine import EXPM, RK4, EvolutionResult, StepSizeError, evolve_heisenberg, evolve_quantum
from .fokker_planck import FPCoefficients, build_fp_master_direct, trace_preservation_scan
from .scenarios import run_scenario
