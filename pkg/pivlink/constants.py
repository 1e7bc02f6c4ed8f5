"""
This module defines the default parameterisation of the linkage engine.

Defaults reproduce the settings of the reference simulation study: 100 StEM
iterations of which the first 75 are burn-in, 200 Gibbs sweeps per iteration
of which the first 100 are burn-in, and 1000 simulated linkage matrices for
the final posterior.
"""
from numpy import log

# StEM iterations (burn-in, kept):
V0 = 75
V1 = 25

# Gibbs sweeps per StEM iteration (burn-in, kept):
Z0 = 100
Z1 = 100

# linkage matrices simulated at the final parameter estimate, and the burn-in
# of that final chain:
N_SIM = 1000
POSTERIOR_Z0 = 100

# initial registration-error, link-proportion and change probabilities:
PHI0 = 0.05
GAMMA0 = 0.05
CHANGE0 = 0.05

# cap on the probability of a registration mistake for a stable PIV:
MISTAKE_BOUND = 0.10

# bounded search for the log baseline hazard of an unstable PIV:
ALPHA_INTERVAL = (-10.0, 5.0)
ALPHA_TOLERANCE = 1e-6

# floor on 1 - gamma in the linkage odds:
GAMMA_FLOOR = 1e-12

# default threshold on posterior linkage probabilities:
XI = 0.5

# number of uniform bins of the exported posterior histogram:
HISTOGRAM_BINS = 50

# raw values treated as missing (compared case-insensitively):
MISSING_MARKERS = ('', 'NA')

# soundex code emitted for strings with no codable letter:
SOUNDEX_EMPTY = '0000'

# the latent PIV distribution of the simulation design weights value h by
# exp(SIMULATION_SLOPE * h):
SIMULATION_SLOPE = 0.25

# constant hazard of the unstable PIV in the simulation design:
SIMULATION_HAZARD = 0.28
SIMULATION_LOG_HAZARD = log(SIMULATION_HAZARD)

# log-pmf terms further than this many nats below the largest term are
# dropped from the capture-ratio convolutions:
LOG_TRUNCATION = 40.0
