#!/usr/bin/env python3
"""Brute-force padding oracle for epoch-plan dumps.

Reads the output of `cargo run --example dump_plan` and recomputes, by
direct enumeration and nothing else, the padded-slot and total-slot
counts of each plan. The numbers printed here are pinned as golden
values in tests/acceptance.rs; this script shares no code with the
crate, so an error in the crate's analytic accounting cannot leak into
the expected values.

Usage: python3 tools/padding_oracle.py DUMP_FILE
"""

import sys
from fractions import Fraction


def parse(path):
    lines = open(path).read().splitlines()
    i = 0
    assert lines[i].startswith("# corpus "), "missing corpus header"
    corpus = lines[i].split(" ", 2)[2]
    i += 1
    head, n = lines[i].split()
    assert head == "lengths"
    n = int(n)
    i += 1
    lengths = [int(x) for x in lines[i : i + n]]
    assert len(lengths) == n
    i += n
    plans = {}
    while i < len(lines):
        parts = lines[i].split()
        assert parts[0] == "plan", f"unexpected line: {lines[i]!r}"
        name = parts[1]
        i += 1
        batches = []
        while i < len(lines) and not lines[i].startswith("plan "):
            batches.append([int(x) for x in lines[i].split()])
            i += 1
        plans[name] = batches
    return corpus, lengths, plans


def check_partition(batches, n):
    seen = sorted(idx for batch in batches for idx in batch)
    assert seen == list(range(n)), "plan does not partition the index set"


def tally(batches, lengths):
    padded = 0
    total = 0
    for batch in batches:
        longest = max(lengths[i] for i in batch)
        total += longest * len(batch)
        padded += sum(longest - lengths[i] for i in batch)
    return padded, total


def main():
    corpus, lengths, plans = parse(sys.argv[1])
    print(f"corpus: {corpus}")
    print(f"samples: {len(lengths)}")
    print(f"min_len: {min(lengths)}")
    print(f"max_len: {max(lengths)}")
    print(f"sum_len: {sum(lengths)}")
    ratios = {}
    for name, batches in plans.items():
        check_partition(batches, len(lengths))
        padded, total = tally(batches, lengths)
        ratios[name] = Fraction(padded, total)
        print(f"{name}: batches={len(batches)} padded_slots={padded} "
              f"total_slots={total} padding_ratio={padded / total:.6f}")
    if {"random", "fixed-bucket"} <= ratios.keys():
        assert ratios["fixed-bucket"] < ratios["random"], \
            "bucketing must reduce padding on this corpus"
        reduction = 1 - ratios["fixed-bucket"] / ratios["random"]
        print(f"padding_reduction: {float(reduction):.6f}")


if __name__ == "__main__":
    main()
