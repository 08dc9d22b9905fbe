"""Finding the maximum of N distributed values with few uploads.

Each round doubles the send probability; nodes already beaten by the
broadcast maximum drop out. The answer is always exact, only the number of
uploads is random.
"""
import math

from topkmon import Fabric, RandomSource, run_extremum
from topkmon.harness import protocol_bench
from topkmon.protocols import send_probability_bound

# %% one run, with its message log
values = {1: 17, 2: 3, 3: 42, 4: 8, 5: 23, 6: 15, 7: 4, 8: 30}
fabric = Fabric()
outcome = run_extremum(values, 8, RandomSource(seed=5), fabric)
print(f"winner node {outcome.winner} with value {outcome.winner_value}")
print(f"{outcome.uploads} uploads, {outcome.round_broadcasts} round broadcasts")
print(fabric.event_log_text())

# %% many runs: mean uploads against 2*log2(N) + 1
for N in (16, 256, 1024):
    stats = protocol_bench(N, 2000, seed=N)
    print(f"N={N:5d}  mean uploads {stats.mean_uploads:6.2f}  ceiling {2 * math.log2(N) + 1:5.1f}")

# %% how often each rank sends, against the analytic per-rank bound
stats = protocol_bench(64, 20_000, seed=1)
for i in (1, 2, 4, 8, 16, 32, 64):
    print(f"rank {i:2d}: sent {stats.rank_frequency(i):.3f} of the time, bound {send_probability_bound(i, 64):.3f}")
