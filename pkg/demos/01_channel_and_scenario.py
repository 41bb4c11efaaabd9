"""
Link budget and a random network instance
=========================================

Two pico base stations, five resource blocks each, ten users. Users 8-10
are outpatients. Every (user, RB, PBS) triple gets its own received power.
"""

import numpy as np

from patient_hetnet.channel import ChannelParams, dbm_to_mw, mw_to_dbm, noise_power_mw, path_loss_db
from patient_hetnet.scenario import ScenarioConfig, generate, max_rbs_per_user

params = ChannelParams()
for d in (40, 70, 100):
    print(f"path loss at {d:3d} m: {path_loss_db(params, d):6.2f} dB")

sigma = noise_power_mw(params)
print(f"noise per RB: {sigma:.3e} mW ({mw_to_dbm(sigma):.2f} dBm)")

# 23 dBm per connection, 17 dBm per RB: a user can drive at most 3 RBs
cfg = ScenarioConfig()
print("per-RB power", round(dbm_to_mw(cfg.tx_per_rb), 3), "mW, RB cap", max_rbs_per_user(cfg))

sc = generate(cfg, seed=7)
print("omega shape (users, RBs, PBSs):", sc.omega.shape)
print("distances to PBS 1 and 2 (m):")
print(np.round(sc.distances, 1))

# interference-free SINR in dB, user x (RB, PBS)
snr_db = 10 * np.log10(sc.snr)
print("best interference-free SINR per user (dB):", np.round(snr_db.max(axis=(1, 2)), 1))
