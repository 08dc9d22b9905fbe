"""Monitoring the top-k set step by step.

Insiders get the filter [M, inf], outsiders [-inf, M]. Quiet steps cost
nothing; a violation triggers a few protocol runs and either a new midpoint
or a full reset.
"""
from topkmon import Fabric, RandomSource, validate_filter_set
from topkmon import monitor

rows = [
    {1: 10, 2: 4, 3: 2},   # initialization: M = 7
    {1: 9, 2: 6, 3: 3},    # everything inside its filter
    {1: 10, 2: 8, 3: 2},   # node 2 crosses M, but stays below node 1
    {1: 10, 2: 12, 3: 2},  # node 2 overtakes node 1
]

rng, fabric = RandomSource(0), Fabric()
state = monitor.initialize(rows[0], 1, rng, fabric)
print(f"t=1 top={state.top_k} M={state.boundary} messages={fabric.tally_snapshot().total}")

for values in rows[1:]:
    state, report = monitor.step(state, values, rng, fabric)
    assert not validate_filter_set(state.filters, values, 1)
    what = "reset" if report.reset_invoked else "new midpoint" if report.handler_invoked else "quiet"
    print(
        f"t={report.t} violations={list(report.violations)} {what:12s} "
        f"top={report.answer} M={state.boundary} messages={report.tally_delta.total}"
    )
