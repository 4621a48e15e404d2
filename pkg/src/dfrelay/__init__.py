"""Joint power allocation and subcarrier pairing for two-hop OFDM decode-and-forward links."""
from .baselines import opa_no_sp, upa_no_sp, upa_sorted_sp
from .channel import ChannelRealization, GainSet, Geometry, draw_gains, gen_channels, normalize, snr_db_to_budget
from .codebook import Codebook, Codeword, read_codebook, select_index, train_codebook, write_codebook
from .errors import ContractError, IntegrityError, OracleLimitError, ParameterError
from .harness import ExperimentConfig, run_sweep
from .matching import finalize_pairing
from .model import Allocation, PairPowers, PowerBudget, Scheme, SolverOptions
from .oracle import exhaustive_solve
from .rates import equivalent_gain, pair_rate, recompute_rate, relay_useful, split_pair_power
from .solvers import solve, solve_enhanced_individual, solve_enhanced_sum, solve_selective_sum
from .waterfill import waterfill

__all__ = [
    "Allocation", "ChannelRealization", "Codebook", "Codeword", "ContractError", "ExperimentConfig",
    "GainSet", "Geometry", "IntegrityError", "OracleLimitError", "PairPowers", "ParameterError",
    "PowerBudget", "Scheme", "SolverOptions", "draw_gains", "equivalent_gain", "exhaustive_solve",
    "finalize_pairing", "gen_channels", "normalize", "opa_no_sp", "pair_rate", "read_codebook",
    "recompute_rate", "relay_useful", "run_sweep", "select_index", "snr_db_to_budget", "solve",
    "solve_enhanced_individual", "solve_enhanced_sum", "solve_selective_sum", "split_pair_power",
    "train_codebook", "upa_no_sp", "upa_sorted_sp", "waterfill", "write_codebook",
]
