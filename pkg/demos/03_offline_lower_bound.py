"""The offline lower bound: how often must any filter-based scheme re-assign?

A window of steps can share one filter set only if the top-k set stays the
same and the lowest insider value never drops below the highest outsider
value. Greedy maximal windows give the smallest such cover.
"""
import numpy as np

from topkmon import Trace, compute_delta, opt_lower_bound
from topkmon.oracle import min_feasible_partition

# three nodes, four steps, k = 1
trace = Trace(np.array([[10, 5, 1], [10, 5, 1], [4, 8, 1], [4, 8, 1]]), k=1)
part = opt_lower_bound(trace)
print("windows:", part.intervals)
print("lower bound:", part.lower_bound, "| exhaustive minimum:", min_feasible_partition(trace))
print("delta (largest k-th vs (k+1)-st gap):", compute_delta(trace))
