"""Hand evaluation of getTime for worker M at wp = 10 on data/table2.scenario.

Written straight from the cost formulas with exact fractions; it does not
import or call the C++ code. The printed values are frozen into
tests/test_cost.cpp (GoldenMistBreakdown).
"""
from fractions import Fraction as F

wp = 10

# Calibration block of the fixture.
t_pk_mdl, t_pk_alg, t_pk_d = F("0.90"), F("0.005"), F("0.06")
t_upk_mdl, t_upk_alg, t_upk_d = F("0.70"), F("0.004"), F("0.05")
t_proc1, t_pk_o1, t_upk_o1 = F("1.20"), F("0.03"), F("0.02")
out_bytes = 200000

# Request sizes.
byte_alg, byte_mdl, byte_d = 1203, 14100000, 3000000

# Delegator and receiver T; worker M.
rw_T = F(547_000_000 + 220_000_000, 2)
rw_M = F(237_000_000 + 121_000_000, 2)

def score(bench, cores, ram_total, ram_used, cpu_usage):
    # uniform weights over benchmark, cores, free RAM in GB, idle fraction
    free_gb = F(ram_total - ram_used, 10**9)
    return (F(bench) + cores + free_gb + (1 - F(cpu_usage))) / 4

score_T = score(2000, 2, 4_000_000_000, 2_600_000_000, "0.30")
score_M = score(1950, 2, 4_000_000_000, 2_200_000_000, "0.20")

# T <-> M Wi-Fi Direct link.
per_byte, latency = F("2.0e-7"), F("0.010")

pack = t_pk_mdl + t_pk_alg + t_pk_d * wp
request_send = per_byte * (byte_mdl + byte_alg + byte_d * wp) + latency
unpack = (t_upk_mdl + t_upk_alg + t_upk_d * wp) * rw_T / rw_M
process = t_proc1 * wp * score_T / score_M
output_pack = t_pk_o1 * wp * rw_T / rw_M
output_send = per_byte * out_bytes * wp + latency
output_unpack = t_upk_o1 * wp * rw_T / rw_T

terms = dict(pack=pack, request_send=request_send, unpack=unpack, process=process,
             output_pack=output_pack, output_send=output_send, output_unpack=output_unpack)
for name, v in terms.items():
    print(f"{name:14s} {float(v):.17g}")
print(f"{'total':14s} {float(sum(terms.values())):.17g}")
