import json
import pathlib
import struct

import numpy as np


def random_track(rng, frames):
    """Drifting ground truth with about 15% absent frames and a noisy prediction."""
    centre = rng.uniform(100.0, 400.0, size=2)
    size = rng.uniform(10.0, 80.0, size=2)
    gt = np.empty((frames, 4))
    for t in range(frames):
        centre = centre + rng.normal(0.0, 3.0, size=2)
        size = np.clip(size * rng.uniform(0.97, 1.03, size=2), 4.0, 200.0)
        gt[t] = [centre[0] - size[0] / 2, centre[1] - size[1] / 2, size[0], size[1]]
    absent = (rng.uniform(size=frames) < 0.15).astype(np.uint8)
    absent[0] = 0
    pred = gt + rng.normal(0.0, 4.0, size=gt.shape)
    pred[:, 2:] = np.abs(pred[:, 2:])
    miss = rng.uniform(size=frames) < 0.1
    pred[miss, 0] += 300.0
    empty = rng.uniform(size=frames) < 0.05
    pred[empty, 2:] = 0.0
    gt[absent == 1] = 0.0
    return gt, absent, pred


def write_boxes(path, boxes):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(",".join(repr(float(v)) for v in b) + "\n" for b in boxes))


def read_boxes(path):
    return np.array([[float(v) for v in line.split(",")[:4]] for line in path.read_text().splitlines()])


def write_sequence(root, name, gt, absent):
    d = pathlib.Path(root) / name
    write_boxes(d / "groundtruth_rect.txt", gt)
    (d / "absent.txt").write_text("".join(f"{int(a)}\n" for a in absent))
    (d / "language.txt").write_text("track the fish\n")
    (d / "attributes.txt").write_text("")
    meta = {"class": "clownfish", "superclass": "fish", "width": 1280, "height": 720, "fps": 30}
    (d / "meta.json").write_text(json.dumps(meta) + "\n")


def write_container(path, maps):
    maps = np.ascontiguousarray(maps, dtype="<f4")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(struct.pack("<II", maps.shape[0], maps.shape[1]) + maps.tobytes())


def blob(n, row, col, peak):
    r, c = np.mgrid[0:n, 0:n]
    return (peak * np.exp(-((r - row) ** 2 + (c - col) ** 2) / 2.0)).astype(np.float32)


def drift_fixture(frames=100, lock_start=30, lock_length=40, n=16):
    """A 40x40 target moving +2 px/frame. During the lock window a brighter
    blob 60 px below pulls the raw argmax box away."""
    size, stride, speed, mid = 40.0, 10.0, 2.0, n // 2
    truth = np.array([[200.0 + speed * t - size / 2, 240.0 - size / 2, size, size] for t in range(frames)])
    raw = [truth[0]]
    maps = []
    for t in range(1, frames):
        prev_cx, prev_cy = truth[t - 1, 0] + size / 2, truth[t - 1, 1] + size / 2
        ox = prev_cx + speed - (mid + 0.5) * stride
        oy = prev_cy - (mid + 0.5) * stride
        locked = lock_start <= t < lock_start + lock_length
        progress = (t - lock_start) / (lock_length - 1) if locked and lock_length > 1 else 0.0
        dcol = mid + int(np.rint((55.0 - 110.0 * progress) / stride))
        drow = mid + 6
        m = np.maximum(blob(n, mid, mid, 0.9), blob(n, drow, dcol, 1.0 if locked else 0.7))
        row, col = (drow, dcol) if locked else (mid, mid)
        cx, cy = ox + (col + 0.5) * stride, oy + (row + 0.5) * stride
        raw.append([cx - size / 2, cy - size / 2, size, size])
        maps.append(m)
    return truth, np.array(raw), np.array(maps, dtype=np.float32)


def iou(a, b):
    x1, y1 = max(a[0], b[0]), max(a[1], b[1])
    x2, y2 = min(a[0] + a[2], b[0] + b[2]), min(a[1] + a[3], b[1] + b[3])
    inter = max(0.0, x2 - x1) * max(0.0, y2 - y1)
    union = a[2] * a[3] + b[2] * b[3] - inter
    return inter / union if union > 0 else 0.0


def tracked(boxes, truth):
    return np.mean([iou(boxes[t], truth[t]) >= 0.5 for t in range(1, len(truth))])
