"""Online messages against the offline lower bound, per stream family."""
from topkmon import Family, GeneratorSpec, generate, simulate

print(f"{'family':22s} {'messages':>9s} {'opt lb':>7s} {'ratio':>8s} {'envelope use':>13s}")
for family in Family:
    trace = generate(GeneratorSpec(family, n=32, k=4, T=1000, seed=3))
    run = simulate(trace, seed=3, keep_log=False)
    assert run.ok
    print(
        f"{family.value:22s} {run.tally.total:9d} {run.opt.lower_bound:7d} "
        f"{float(run.empirical_ratio):8.1f} {run.tally.total / run.envelope:13.3f}"
    )
