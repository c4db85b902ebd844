"""Why a core-set must keep a pool: five identical items, one deletion.

Every non-empty set has value 1.  A core-set that keeps only its single
best pick loses everything when the adversary deletes that pick; the robust
builder keeps the top d+1 singletons plus a random pick from a pool of at
least d/eps candidates, so any single deletion leaves a survivor.
"""

from robustsub import (
    AlgoParams,
    IdenticalItemsOracle,
    build_coreset_centralized,
    build_coreset_streaming,
    extract_solution_centralized,
    extract_solution_streaming,
)


def main():
    oracle = IdenticalItemsOracle(5)
    params = AlgoParams(k=1, d=1, epsilon=0.5, seed=3)

    cs = build_coreset_centralized(oracle, None, params)
    print(f"centralized core-set: reserve {cs.reserve}, picks {cs.selected()}, stored {len(cs)}")
    for e in range(5):
        sol = extract_solution_centralized(oracle, cs, {e})
        print(f"  delete {e}: keep {list(sol.elements)} value {sol.value:g}")

    st = build_coreset_streaming(oracle, range(5), params)
    print(f"streaming core-set stores {len(st)} elements")
    worst = min(extract_solution_streaming(oracle, st, {e}).value for e in range(5))
    print(f"  worst value over single deletions: {worst:g}")


if __name__ == "__main__":
    main()
