"""Walk one mask through the forward process and back again.

The forward process swaps pixels of a fine mask over to a coarse mask, one
random subset per step, until nothing fine is left. Refinement runs it in
reverse: a denoiser proposes a fine mask and its confidence decides how many
coarse pixels switch back at each step.

    python demos/forward_reverse.py
"""

import numpy as np

from maskrefine import DEFAULT_SCHEDULE, OracleDenoiser, RngStream, forward_trajectory, refine


def show(mask, title):
    print(title)
    for row in mask[::2]:
        print("  " + "".join("#" if v else "." for v in row))


size = 24
rr, cc = np.mgrid[:size, :size]
fine = (((rr - 12) / 8.0) ** 2 + ((cc - 12) / 6.0) ** 2 <= 1).astype(np.uint8)
coarse = np.zeros_like(fine)
coarse[5:19, 4:21] = 1  # a sloppy box around the ellipse

schedule = DEFAULT_SCHEDULE
print("bar_beta:", schedule.bar_beta)

masks = forward_trajectory(fine, coarse, schedule, RngStream(1))
for t in (0, 2, 4, 6):
    wrong = np.count_nonzero(masks[t] != fine)
    show(masks[t], f"\nforward m_{t}  ({wrong} pixels differ from the fine mask)")

# an oracle that knows the answer and is fully sure of it recovers it exactly
res = refine(np.zeros((size, size)), coarse, OracleDenoiser(fine), schedule, RngStream(2),
             keep_intermediates=True)
for k in (0, 3, 6):
    show(res.intermediate_masks[k], f"\nreverse m_{schedule.T - k}")
print("\nrecovered exactly:", np.array_equal(res.final_mask, fine))

# with confidence p, a pixel stays coarse through every step with probability 1 - p
big_fine = np.ones((300, 300), np.uint8)
big_coarse = np.zeros_like(big_fine)
for p in (0.5, 0.8, 0.95):
    out = refine(np.zeros(big_fine.shape), big_coarse, OracleDenoiser(big_fine, p), schedule,
                 RngStream(3)).final_mask
    print(f"confidence {p:.2f}: {np.mean(out == 0):.4f} of pixels kept their coarse value")
