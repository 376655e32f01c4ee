"""Box geometry walkthrough: corner and center-size forms, IoU, and GIoU.

All boxes live in normalized [0, 1] image coordinates, corner order
(x1, y1, x2, y2).  GIoU extends IoU below zero for disjoint boxes, which
is what makes it usable as a regression signal when there is no overlap.
"""

import numpy as np

from tubekit import Box, giou, iou, to_center_size, to_corner


def main():
    a = Box(0.2, 0.2, 0.5, 0.5)
    b = Box(0.3, 0.25, 0.62, 0.57)
    print("two overlapping boxes")
    print(f"  a = {a.to_list()}")
    print(f"  b = {b.to_list()}")
    print(f"  iou(a, b)  = {iou(a, b):.6f}")
    print(f"  giou(a, b) = {giou(a, b):.6f}")
    print()

    # Disjoint boxes: IoU saturates at zero but GIoU still orders them
    # by how far apart they sit inside their enclosing hull.
    near = Box(0.52, 0.2, 0.8, 0.5)
    far = Box(0.7, 0.7, 0.95, 0.95)
    print("disjoint boxes, same IoU, different GIoU")
    print(f"  iou(a, near) = {iou(a, near):.6f}   giou(a, near) = {giou(a, near):.6f}")
    print(f"  iou(a, far)  = {iou(a, far):.6f}   giou(a, far)  = {giou(a, far):.6f}")
    print()

    cs = to_center_size(a)
    back = to_corner(cs)
    print("center-size round trip")
    print(f"  corners {a.to_list()} -> (cx={cs.cx}, cy={cs.cy}, w={cs.w}, h={cs.h})")
    print(f"  and back -> {back.to_list()}")
    print()

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(2000):
        x1, y1 = rng.uniform(0, 0.8, size=2)
        w, h = rng.uniform(0.05, 0.2, size=2)
        box = Box(x1, y1, x1 + w, y1 + h)
        rt = to_corner(to_center_size(box))
        worst = max(worst, max(abs(p - q) for p, q in zip(box.to_list(), rt.to_list())))
    print(f"worst round-trip drift over 2000 random boxes: {worst:.3e}")

    # GIoU never exceeds IoU and both are symmetric.
    def random_box():
        x = np.sort(rng.uniform(0, 1, size=2))
        y = np.sort(rng.uniform(0, 1, size=2))
        return Box(x[0], y[0], max(x[1], x[0] + 1e-3), max(y[1], y[0] + 1e-3))

    viol = 0
    for _ in range(2000):
        p, q = random_box(), random_box()
        if giou(p, q) > iou(p, q) + 1e-15 or giou(p, q) != giou(q, p):
            viol += 1
    print(f"giou <= iou and symmetry violations over 2000 random pairs: {viol}")


if __name__ == "__main__":
    main()
