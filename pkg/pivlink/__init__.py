__version__ = '0.1-dev'

from .config import LinkConfig
from .constants import N_SIM, V0, V1, XI, Z0, Z1
from .evaluate import (ConfusionCounts, confusion, format_report, metrics,
                       report_frame, simplistic_link)
from .exceptions import (ConfigurationError, DataError,
                         DegenerateParameterWarning, NumericalError,
                         PivlinkError)
from .independence import CaptureScenario, capture_ratio, ratio_grid
from .inference.gibbs import (GibbsSampler, LatentState, SufficientStats,
                              init_state, log_complete_likelihood,
                              resample_linkage_cell, resample_truth_linked,
                              resample_truth_nonlinked, run_chain)
from .inference.mstep import (MStepConfig, update_alpha, update_eta,
                              update_gamma, update_phi_mistake)
from .inference.posterior import (LinkagePosterior, LinkSet, estimated_fdr,
                                  read_links, sample_posterior, select_by_fdr,
                                  select_by_threshold)
from .inference.stem import (ParameterTrace, StemConfig, export_trace, fit,
                             mean_abs_time_difference)
from .ingest import (PivSpec, RecordTable, SupportMap, build_support,
                     decode_table, encode_table, merge_pivs, missing_rates,
                     read_tables, soundex)
from .kernels import (ModelParams, linked_truth_joint, obs_given_truth,
                      survival_prob, truth_prior)
from .simulate.distortion import distortion_level, inject_distortion
from .simulate.experiments import (ExperimentConfig, distortion_ladder,
                                   f1_loss, replicate, summarize)
from .simulate.scenario import (GroundTruth, ScenarioConfig,
                                generate_scenario, read_truth, scenario_specs,
                                write_scenario)

__all__ = ['LinkConfig', 'N_SIM', 'V0', 'V1', 'XI', 'Z0', 'Z1',
           'ConfusionCounts', 'confusion', 'format_report', 'metrics',
           'report_frame', 'simplistic_link',
           'ConfigurationError', 'DataError', 'DegenerateParameterWarning',
           'NumericalError', 'PivlinkError',
           'CaptureScenario', 'capture_ratio', 'ratio_grid',
           'GibbsSampler', 'LatentState', 'SufficientStats', 'init_state',
           'log_complete_likelihood', 'resample_linkage_cell',
           'resample_truth_linked', 'resample_truth_nonlinked', 'run_chain',
           'MStepConfig', 'update_alpha', 'update_eta', 'update_gamma',
           'update_phi_mistake',
           'LinkagePosterior', 'LinkSet', 'estimated_fdr', 'read_links',
           'sample_posterior', 'select_by_fdr', 'select_by_threshold',
           'ParameterTrace', 'StemConfig', 'export_trace', 'fit',
           'mean_abs_time_difference',
           'PivSpec', 'RecordTable', 'SupportMap', 'build_support',
           'decode_table', 'encode_table', 'merge_pivs', 'missing_rates',
           'read_tables', 'soundex',
           'ModelParams', 'linked_truth_joint', 'obs_given_truth',
           'survival_prob', 'truth_prior',
           'distortion_level', 'inject_distortion',
           'ExperimentConfig', 'distortion_ladder', 'f1_loss', 'replicate',
           'summarize',
           'GroundTruth', 'ScenarioConfig', 'generate_scenario', 'read_truth',
           'scenario_specs', 'write_scenario']
