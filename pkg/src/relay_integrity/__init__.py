"""Integrity-guaranteed coding over a two-way amplify-and-forward relay.

The package simulates a discrete memoryless multiple-access channel whose
output is echoed back to both senders by a possibly Byzantine relay, builds
typical-set codebooks with rate-splitting randomization, decodes with an
untrusted-verdict typicality decoder, certifies channels against invisible
substitution attacks, computes the guaranteed-integrity inner-bound rate
region, and runs seeded Monte Carlo attack/detection campaigns.
"""

from .channel import (Alphabet, ConditionalPmf, DecodeAndReforge, DeterministicMap,
                      Honest, MacChannel, MemorylessSubstitution,
                      PartialBlockSubstitution, binary_erasure_mac, format_channel_spec,
                      load_channel_spec, observation_channel, parse_channel_spec,
                      relay_forward, transmit_mac, uniform_noise_mac)
from .codec import (Codebook, RatePlan, Verdict, build_codebook, decode, encode,
                    encode_split, export_codebook, load_codebook, plan_rates,
                    recover_message)
from .errors import InfeasibleError, InputError, RateError, ResourceError, SamplingError
from .harness import (ExperimentConfig, TrialResult, run_experiment, run_trial,
                      wilson_interval)
from .manipulability import (MinMiDiagnostic, UpsilonWitness, classify_window,
                             find_witness, min_conditional_mi, min_conditional_mi_grid,
                             theorem_condition_holds, witness_to_attack)
from .region import (JointPmf, MutualInformations, RateRegion, inner_bound_region,
                     input_posterior, joint_from, mutual_informations)
from .typicality import (EmpiricalPmf, ToleranceSchedule, default_schedule,
                         empirical_pmf, is_typical, max_deviation, sample_typical)

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "ConditionalPmf", "MacChannel", "Honest", "DeterministicMap",
    "MemorylessSubstitution", "PartialBlockSubstitution", "DecodeAndReforge",
    "binary_erasure_mac", "uniform_noise_mac", "transmit_mac", "relay_forward",
    "observation_channel", "parse_channel_spec", "load_channel_spec",
    "format_channel_spec",
    "EmpiricalPmf", "ToleranceSchedule", "default_schedule", "empirical_pmf",
    "is_typical", "max_deviation", "sample_typical",
    "Codebook", "RatePlan", "Verdict", "build_codebook", "plan_rates", "encode",
    "encode_split", "decode", "recover_message", "export_codebook", "load_codebook",
    "UpsilonWitness", "MinMiDiagnostic", "find_witness", "theorem_condition_holds",
    "witness_to_attack", "min_conditional_mi", "min_conditional_mi_grid",
    "classify_window",
    "JointPmf", "MutualInformations", "RateRegion", "joint_from",
    "mutual_informations", "inner_bound_region", "input_posterior",
    "ExperimentConfig", "TrialResult", "run_trial", "run_experiment",
    "wilson_interval",
    "InputError", "RateError", "InfeasibleError", "ResourceError", "SamplingError",
]
