"""CLEAR-MOT evaluation: MOTA, FP/FN, identity switches, and IDF1.

Per-frame matching keeps an existing target/hypothesis pairing alive
while its overlap stays above the threshold (continuity preference);
the remaining boxes are matched by minimum-cost assignment on 1 - IoU
restricted to pairs at or above the threshold. IDF1 comes from one
global trajectory-level assignment maximizing per-frame co-occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import km_solve, solve_dense
from .gating import GatedCost
from .geometry import BoundingBox, boxes_to_array, iou, iou_matrix

Trajectories = dict[int, dict[int, BoundingBox]]


@dataclass
class EvalReport:
    mota: float
    idf1: float
    fp: int
    fn: int
    ids: int
    total_gt: int
    matches: int = 0
    sequences: dict[str, "EvalReport"] = field(default_factory=dict)

    def summary(self) -> str:
        return (
            f"MOTA {self.mota:.4f}  IDF1 {self.idf1:.4f}  "
            f"FP {self.fp}  FN {self.fn}  IDS {self.ids}  GT {self.total_gt}"
        )


def _frame_view(trajectories: Trajectories) -> dict[int, dict[int, BoundingBox]]:
    frames: dict[int, dict[int, BoundingBox]] = {}
    for tid, history in trajectories.items():
        for frame, box in history.items():
            frames.setdefault(frame, {})[tid] = box
    return frames


def _match_frame(
    gt_items: list[tuple[int, BoundingBox]],
    hyp_items: list[tuple[int, BoundingBox]],
    threshold: float,
) -> list[tuple[int, int]]:
    """Optimal IoU matching for one frame's leftover boxes; returns
    (gt_id, hyp_id) pairs."""
    if not gt_items or not hyp_items:
        return []
    g_boxes = boxes_to_array([b for _, b in gt_items])
    h_boxes = boxes_to_array([b for _, b in hyp_items])
    overlaps = iou_matrix(g_boxes, h_boxes)
    rows, cols = np.nonzero(overlaps >= threshold)
    cost = GatedCost(
        len(gt_items), len(hyp_items), rows, cols, 1.0 - overlaps[rows, cols]
    )
    assignment = km_solve(cost)
    return [
        (gt_items[r][0], hyp_items[c][0]) for r, c in assignment.pairs
    ]


def evaluate(
    hypotheses: Trajectories,
    ground_truth: Trajectories,
    iou_match_threshold: float = 0.5,
) -> EvalReport:
    """Score hypothesis trajectories against ground truth."""
    total_gt = sum(len(h) for h in ground_truth.values())
    if total_gt == 0:
        raise ValueError("ground truth is empty")

    gt_frames = _frame_view(ground_truth)
    hyp_frames = _frame_view(hypotheses)
    frames = sorted(set(gt_frames) | set(hyp_frames))

    mapping: dict[int, int] = {}  # gt id -> last matched hyp id
    fp = fn = ids = matches = 0

    for frame in frames:
        gt_here = gt_frames.get(frame, {})
        hyp_here = hyp_frames.get(frame, {})

        frame_pairs: list[tuple[int, int]] = []
        used_hyp: set[int] = set()
        leftover_gt: list[tuple[int, BoundingBox]] = []
        for gid in sorted(gt_here):
            prev = mapping.get(gid)
            if (
                prev is not None
                and prev in hyp_here
                and prev not in used_hyp
                and iou(gt_here[gid], hyp_here[prev]) >= iou_match_threshold
            ):
                frame_pairs.append((gid, prev))
                used_hyp.add(prev)
            else:
                leftover_gt.append((gid, gt_here[gid]))
        leftover_hyp = [
            (hid, box) for hid, box in sorted(hyp_here.items()) if hid not in used_hyp
        ]

        for gid, hid in _match_frame(leftover_gt, leftover_hyp, iou_match_threshold):
            if gid in mapping and mapping[gid] != hid:
                ids += 1
            frame_pairs.append((gid, hid))
            used_hyp.add(hid)

        for gid, hid in frame_pairs:
            mapping[gid] = hid
        matches += len(frame_pairs)
        fn += len(gt_here) - len(frame_pairs)
        fp += len(hyp_here) - len(frame_pairs)

    mota = 1.0 - (fp + fn + ids) / total_gt
    idf1 = _idf1(hypotheses, ground_truth, iou_match_threshold)
    return EvalReport(mota, idf1, fp, fn, ids, total_gt, matches)


def _idf1(
    hypotheses: Trajectories, ground_truth: Trajectories, threshold: float
) -> float:
    total_gt = sum(len(h) for h in ground_truth.values())
    total_hyp = sum(len(h) for h in hypotheses.values())
    if total_hyp == 0:
        return 0.0

    gt_ids = sorted(ground_truth)
    hyp_ids = sorted(hypotheses)
    counts = np.zeros((len(gt_ids), len(hyp_ids)))
    for gi, gid in enumerate(gt_ids):
        g_hist = ground_truth[gid]
        for hi, hid in enumerate(hyp_ids):
            h_hist = hypotheses[hid]
            shared = set(g_hist) & set(h_hist)
            counts[gi, hi] = sum(
                1 for f in shared if iou(g_hist[f], h_hist[f]) >= threshold
            )

    # Maximize total co-occurring frames over a one-to-one id matching.
    cost = -counts
    if cost.shape[0] > cost.shape[1]:
        cost = cost.T
    row_col = solve_dense(cost)
    idtp = -float(sum(cost[r, c] for r, c in enumerate(row_col)))
    return 2.0 * idtp / (total_gt + total_hyp)


def trajectories_from_tracks(tracks) -> Trajectories:
    """Adapt finalized TrackRecords to evaluation input form."""
    return {t.track_id: dict(t.history) for t in tracks}


def evaluate_many(
    pairs: dict[str, tuple[Trajectories, Trajectories]],
    iou_match_threshold: float = 0.5,
) -> EvalReport:
    """Micro-averaged report over named sequences."""
    if not pairs:
        raise ValueError("no sequences to evaluate")
    sequences = {
        name: evaluate(h, g, iou_match_threshold) for name, (h, g) in pairs.items()
    }
    fp = sum(r.fp for r in sequences.values())
    fn = sum(r.fn for r in sequences.values())
    ids = sum(r.ids for r in sequences.values())
    total = sum(r.total_gt for r in sequences.values())
    matches = sum(r.matches for r in sequences.values())
    # Frame-count-weighted IDF1 keeps the aggregate in [0, 1].
    idf1 = sum(r.idf1 * r.total_gt for r in sequences.values()) / total
    report = EvalReport(
         1.0 - (fp + fn + ids) / total, idf1, fp, fn, ids, total, matches
    )
    report.sequences = sequences
    return report
