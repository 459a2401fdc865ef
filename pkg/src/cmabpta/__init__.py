"""Combinatorial bandits with probabilistically triggered arms: CTS, CUCB,
cascading environments, exact oracles and regret-bound diagnostics."""

__version__ = "0.1.0"

from .model import (CmabError, InfeasibleArmError, InstanceTooLargeError, InvalidArmError,
                    InvalidParameterError, InvalidSuperArmError, Observation, ProblemInstance,
                    SuperArm, project, regret_increment)
from .environments import (CascadingInstance, TabularInstance, instance_from_dict, load_instance,
                           make_blb, make_conjunctive_needle, make_uniform_random)
from .oracles import OracleResult, brute_force_oracle, cascading_oracle
from .learners import CTS, CUCB
from .analysis import (UNBOUNDED, diagnose, sampling_threshold, theorem1_bound, trial_threshold)
from .harness import (ExperimentAggregate, ExperimentConfig, RegretTrajectory, read_results,
                      run_experiment, run_replication, write_results)
