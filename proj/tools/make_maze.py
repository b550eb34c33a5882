#!/usr/bin/env python3
"""Print the bitmap rows of a perfect maze (depth-first carving) for a scenario's "maze" block.

Rows alternate wall rows and cell rows: '#' at (even row, odd col) is a horizontal wall,
at (odd row, even col) a vertical wall. The outer border is left open because the surface
domain already bounds the tool.
"""
import argparse
import json
import random


def carve(rows, cols, seed):
    rng = random.Random(seed)
    h, w = 2 * rows + 1, 2 * cols + 1
    grid = [[" "] * w for _ in range(h)]
    for r in range(h):
        for c in range(w):
            if (r % 2 == 0) != (c % 2 == 0):
                grid[r][c] = "#"
    seen = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        r, c = stack[-1]
        nbrs = [(r + dr, c + dc) for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if 0 <= r + dr < rows and 0 <= c + dc < cols and (r + dr, c + dc) not in seen]
        if not nbrs:
            stack.pop()
            continue
        nr, nc = rng.choice(nbrs)
        grid[r + nr + 1][c + nc + 1] = " "
        seen.add((nr, nc))
        stack.append((nr, nc))
    for r in range(h):
        for c in range(w):
            if r in (0, h - 1) or c in (0, w - 1):
                grid[r][c] = " "
    return ["".join(row) for row in grid]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=8)
    ap.add_argument("--cols", type=int, default=8)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    print(json.dumps(carve(args.rows, args.cols, args.seed), indent=2))


if __name__ == "__main__":
    main()
